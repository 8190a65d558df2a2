use super::dynamics::*;
use super::*;
use crate::lattice::{rat, Rat, ResonanceVector};
use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

const PHI: f64 = 1.618033988749895;

fn cos_field(n: usize, k: Vec<i64>, a: f64) -> FourierField {
    let mut f = FourierField::new(n);
    f.add_cos(k, a);
    f
}

#[test]
fn cr_norm_examples() {
    // zero field
    assert_eq!(cr_norm(&FourierField::new(2), 3), 0.0);
    // cos x1, n = 2, r = 1: per mode |c|·Σ_{|β|≤1}(|k^β|+1) = ½·(2+2+1),
    // summed over k = ±(1,0) gives 5.
    let f = cos_field(2, vec![1, 0], 1.0);
    assert!((cr_norm(&f, 1) - 5.0).abs() < 1e-12);
    // homogeneity
    let g = f.scale(-3.5);
    assert!((cr_norm(&g, 1) - 3.5 * cr_norm(&f, 1)).abs() < 1e-12);
}

#[test]
fn realness_check() {
    let mut f = FourierField::new(2);
    f.add_cos(vec![1, -1], 0.7);
    f.add_sin(vec![2, 1], -0.3);
    assert!(f.check_real().is_ok());
    // break it
    f.push_mode(vec![1, -1], num_complex::Complex64::new(0.0, 0.5));
    assert!(matches!(f.check_real(), Err(HamError::NotReal(_))));
}

#[test]
fn homogenize_quadratic_trivial() {
    // h = ½|y|², P = 0: A = id, ω* = y*, V = 0, remainders vanish.
    let h = FourierHamiltonian {
        n: 2,
        h: IntegrablePart::quadratic_identity(2),
        pert: FourierField::new(2),
        epsilon: 1e-3,
    };
    let hh = homogenize(&h, &[0.4, 1.3], 1e-3, 1.0).unwrap();
    assert_eq!(hh.a_mat, DMatrix::identity(2, 2));
    assert_eq!(hh.omega_star, vec![0.4, 1.3]);
    assert!(hh.v.modes.is_empty());
    assert!(hh.p1_bound < 1e-12 && hh.p2_bound < 1e-12);
}

#[test]
fn homogenize_cos_mode() {
    // P = cos x₁ is y-independent: V = cos x₁, P_II ≡ 0.
    let mut pert = FourierField::new(2);
    pert.add_cos(vec![1, 0], 1.0);
    let h = FourierHamiltonian {
        n: 2,
        h: IntegrablePart::quadratic_identity(2),
        pert,
        epsilon: 1e-4,
    };
    let hh = homogenize(&h, &[1.0, PHI], 1e-4, 1.0).unwrap();
    assert!(hh.p2_bound < 1e-14);
    let x = [0.7, 0.2];
    assert!((hh.v.eval_x(&x) - x[0].cos()).abs() < 1e-12);
    // reconstruction identity ε𝖧(x,(y−y*)/√ε) = H(x,y)
    let y = [1.0 + 3e-3, PHI - 2e-3];
    let y_big: Vec<f64> = y
        .iter()
        .zip(&hh.y_star)
        .map(|(&yi, &ys)| (yi - ys) / hh.epsilon.sqrt())
        .collect();
    let lhs = hh.epsilon * hh.eval_full(&x, &y_big);
    let rhs = h.value(&x, &y);
    assert!((lhs - rhs).abs() < 1e-10);
}

#[test]
fn homogenize_random_quartic_reconstruction() {
    // residual of the reconstruction identity ≤ 1e−10 for a quartic h
    let value = |y: &[f64]| 0.5 * (y[0] * y[0] + 1.4 * y[1] * y[1]) + 0.25 * y[0].powi(4);
    let grad = |y: &[f64]| vec![y[0] + y[0].powi(3), 1.4 * y[1]];
    let hess = |y: &[f64]| {
        DMatrix::from_row_slice(2, 2, &[1.0 + 3.0 * y[0] * y[0], 0.0, 0.0, 1.4])
    };
    let mut pert = FourierField::new(2);
    pert.add_cos(vec![1, 1], 0.5);
    let h = FourierHamiltonian {
        n: 2,
        h: IntegrablePart::Callback {
            value: Arc::new(value),
            grad: Arc::new(grad),
            hess: Arc::new(hess),
        },
        pert,
        epsilon: 1e-4,
    };
    let hh = homogenize(&h, &[0.8, -0.3], 1e-4, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let x = [rng.gen_range(0.0..crate::TAU), rng.gen_range(0.0..crate::TAU)];
        let y_big = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let y: Vec<f64> = hh
            .y_star
            .iter()
            .zip(&y_big)
            .map(|(&ys, &yb)| ys + hh.epsilon.sqrt() * yb)
            .collect();
        let lhs = hh.epsilon * hh.eval_full(&x, &y_big);
        let rhs = h.value(&x, &y);
        assert!((lhs - rhs).abs() < 1e-10);
    }
    // rejects an indefinite base point
    let hess_bad = |_: &[f64]| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5]);
    let h_bad = FourierHamiltonian {
        n: 2,
        h: IntegrablePart::Callback {
            value: Arc::new(value),
            grad: Arc::new(grad),
            hess: Arc::new(hess_bad),
        },
        pert: FourierField::new(2),
        epsilon: 1e-4,
    };
    assert!(matches!(
        homogenize(&h_bad, &[0.0, 0.0], 1e-4, 1.0),
        Err(HamError::NotPositiveDefinite)
    ));
}

#[test]
fn split_resonant_example() {
    let module = vec![ResonanceVector(vec![0, 1, -2])];
    let mut v = FourierField::new(3);
    v.add_cos(vec![0, 1, -2], 1.0);
    v.add_cos(vec![0, 2, -4], 0.5);
    v.add_cos(vec![1, 0, 0], 0.2);
    let (res, le, gt) = split_resonant(&v, &module, 3).unwrap();
    assert_eq!(res.modes.len(), 4); // two cosines = four exponentials
    assert_eq!(le.modes.len(), 2);
    assert!(gt.modes.is_empty());
    // far off-module mode lands in R_>
    let mut v2 = v.clone();
    v2.add_cos(vec![2, 1, 1], 0.1); // |k|₁ = 4 > K = 3, off module
    let (_, le2, gt2) = split_resonant(&v2, &module, 3).unwrap();
    assert_eq!(le2.modes.len(), 2);
    assert_eq!(gt2.modes.len(), 2);
    // exact partition: reassembly reproduces the field pointwise
    let (r3, l3, g3) = split_resonant(&v2, &module, 3).unwrap();
    for s in 0..20 {
        let x = [0.37 * s as f64, 0.11 * s as f64, 1.0 + 0.05 * s as f64];
        let sum = r3.eval_x(&x) + l3.eval_x(&x) + g3.eval_x(&x);
        assert!((sum - v2.eval_x(&x)).abs() < 1e-12);
    }
    // empty input
    let (r, l, g) = split_resonant(&FourierField::new(3), &module, 3).unwrap();
    assert!(r.modes.is_empty() && l.modes.is_empty() && g.modes.is_empty());
    // dependent module rejected
    let bad = vec![
        ResonanceVector(vec![0, 1, -2]),
        ResonanceVector(vec![0, -2, 4]),
    ];
    assert!(matches!(
        split_resonant(&v, &bad, 3),
        Err(HamError::DependentModule)
    ));
}

#[test]
fn cohomological_single_mode() {
    // R = cos(x₁−x₂), ω* = (1, 1−φ̂) with φ̂ = φ−1: divisor φ̂ ≈ 0.618.
    let phi_hat = PHI - 1.0;
    let omega = [1.0, 1.0 - phi_hat];
    let r = cos_field(2, vec![1, -1], 1.0);
    let f = solve_cohomological(&r, &omega, 1e-8).unwrap();
    // F = −sin(x₁−x₂)/φ̂
    for s in 0..12 {
        let x = [0.5 * s as f64, 0.23 * s as f64];
        let expect = -(x[0] - x[1]).sin() / phi_hat;
        assert!((f.eval_x(&x) - expect).abs() < 1e-12);
    }
    let resid = super::kam::cohomological_residual(&r, &f, &omega, 64);
    assert!(resid < 1e-12, "residual {resid}");
    // R = 0 → F = 0
    let f0 = solve_cohomological(&FourierField::new(2), &omega, 1e-8).unwrap();
    assert!(f0.modes.is_empty());
    // resonant mode → small divisor error naming k
    let bad = cos_field(2, vec![0, 1], 1.0);
    let err = solve_cohomological(&bad, &[1.0, 0.0], 1e-8);
    match err {
        Err(HamError::SmallDivisor { k, .. }) => assert_eq!(k.iter().map(|e| e.abs()).sum::<i64>(), 1),
        other => panic!("expected small divisor, got {other:?}"),
    }
}

fn golden_omega_hh(pert: FourierField, epsilon: f64) -> HomogenizedHamiltonian {
    let n = pert.n;
    let h = FourierHamiltonian {
        n,
        h: IntegrablePart::quadratic_identity(n),
        pert,
        epsilon,
    };
    let y_star = vec![1.0, PHI];
    homogenize(&h, &y_star, epsilon, 1.0).unwrap()
}

#[test]
fn one_step_kam_zero_perturbation_is_identity() {
    let hh = golden_omega_hh(FourierField::new(2), 1e-4);
    let module = vec![ResonanceVector(vec![1, -1])];
    let nf = one_step_kam(&hh, &module, 5, 0.04, 6, None).unwrap();
    assert!(nf.generator.modes.is_empty());
    assert!(nf.resonant_part.modes.is_empty());
    assert!(nf.tail_r1.modes.is_empty());
    assert_eq!(nf.tail_r2_sampled, 0.0);
    // transformation is the identity
    let y = nf.transform(&hh, &[0.3, 0.4], &[0.5, -0.2]);
    assert_eq!(y, vec![0.5, -0.2]);
}

#[test]
fn one_step_kam_two_modes() {
    // resonant mode survives, the small off-module mode is averaged away
    let eps = 1e-4;
    let kp = vec![1i64, -1];
    let mut pert = FourierField::new(2);
    pert.add_cos(kp.clone(), 1.0);
    pert.add_cos(vec![1, 0], 0.01);
    let hh = golden_omega_hh(pert, eps);
    let module = vec![ResonanceVector(kp.clone())];
    let nf = one_step_kam(&hh, &module, 5, 0.04, 6, Some(1e-6)).unwrap();
    // V_res is exactly the resonant cosine
    for s in 0..10 {
        let x = [0.61 * s as f64, 0.17 * s as f64];
        assert!((nf.resonant_part.eval_x(&x) - (x[0] - x[1]).cos()).abs() < 1e-12);
    }
    // post-transform Hamiltonian matches the normal form to O(√ε·amplitude)
    let bound = 20.0 * eps.sqrt() * 0.01 + 1e-12;
    assert!(
        nf.tail_r2_sampled < bound,
        "sampled remainder {} vs bound {}",
        nf.tail_r2_sampled,
        bound
    );
    // the shear map from the midpoint integrator agrees with the closed form
    let grad_at = |x: &[f64]| nf.generator.grad_x(x, &[0.0, 0.0]);
    let x0 = [1.1, 2.3];
    let y0 = [0.4, -0.7];
    let field = ClosureField {
        dim: 4,
        f: |_t: f64, z: &[f64], out: &mut [f64]| {
            // averaging shear flow: ẋ = 0, Ẏ = √ε ∇F
            let g = grad_at(&z[0..2]);
            out[0] = 0.0;
            out[1] = 0.0;
            out[2] = eps.sqrt() * g[0];
            out[3] = eps.sqrt() * g[1];
        },
    };
    let z1 = integrate_midpoint(&field, 0.0, &[x0[0], x0[1], y0[0], y0[1]], 1.0, 20);
    let closed = nf.transform(&hh, &x0, &y0);
    assert!((z1[2] - closed[0]).abs() < 1e-12);
    assert!((z1[3] - closed[1]).abs() < 1e-12);
}

#[test]
fn one_step_kam_double_resonance_keeps_both_families() {
    // at a double-resonant ω* both module mode families survive in V_res
    let mut pert = FourierField::new(3);
    pert.add_cos(vec![1, -1, 0], 0.8);
    pert.add_cos(vec![0, 1, -1], 0.5);
    pert.add_cos(vec![1, 1, 1], 0.05);
    let h = FourierHamiltonian {
        n: 3,
        h: IntegrablePart::quadratic_identity(3),
        pert,
        epsilon: 1e-4,
    };
    let hh = homogenize(&h, &[1.0, 1.0, 1.0], 1e-4, 1.0).unwrap();
    let module = vec![
        ResonanceVector(vec![1, -1, 0]),
        ResonanceVector(vec![0, 1, -1]),
    ];
    let nf = one_step_kam(&hh, &module, 4, 0.06, 6, Some(1e-6)).unwrap();
    let x = [0.31f64, 1.7, 2.9];
    let expect = (x[0] - x[1]).cos() * 0.8 + (x[1] - x[2]).cos() * 0.5;
    assert!((nf.resonant_part.eval_x(&x) - expect).abs() < 1e-12);
}

#[test]
fn shear_diagonal_is_identity() {
    let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 2.0]);
    let fr = shear_frame(&a, 3).unwrap();
    assert_eq!(fr.s, DMatrix::identity(3, 3));
    assert_eq!(fr.b, vec![2.0]);
    assert_eq!(fr.s_coeffs, vec![0.0]);
    assert!(fr.defect(&a) < 1e-15);
}

#[test]
fn shear_worked_example() {
    // A = [[2,0,1],[0,2,0],[1,0,2]]: row 3 of S = (−½, 0, 1), b₃ = 3/2, s₃ = ½.
    let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 1.0, 0.0, 2.0, 0.0, 1.0, 0.0, 2.0]);
    let fr = shear_frame(&a, 2).unwrap();
    assert!((fr.s[(2, 0)] + 0.5).abs() < 1e-14);
    assert!((fr.s[(2, 1)]).abs() < 1e-14);
    assert!((fr.s[(2, 2)] - 1.0).abs() < 1e-14);
    assert!((fr.b[0] - 1.5).abs() < 1e-14);
    assert!((fr.s_coeffs[0] - 0.5).abs() < 1e-14);
    assert!(fr.defect(&a) < 1e-12);
}

#[test]
fn shear_random_spd() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let n = rng.gen_range(3..6usize);
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = &m * m.transpose() + DMatrix::identity(n, n) * 0.5;
        let j = rng.gen_range(2..=n);
        let fr = shear_frame(&a, j).unwrap();
        assert!(fr.defect(&a) < 1e-12, "defect {}", fr.defect(&a));
        assert!(fr.b.iter().all(|&b| b > 0.0));
        // unit lower-triangular
        for i in 0..n {
            assert!((fr.s[(i, i)] - 1.0).abs() < 1e-14);
            for c in i + 1..n {
                assert!(fr.s[(i, c)].abs() < 1e-14);
            }
        }
    }
}

#[test]
fn shear_least_squares_identity_and_scaling() {
    // b_i from the congruence chain equals the Gauss least-squares value
    // through the resonance rows; scaling k → mk is exact on rationals.
    let a_rat: Vec<Vec<Rat>> = vec![
        vec![rat(2, 1), rat(1, 2), rat(0, 1)],
        vec![rat(1, 2), rat(3, 1), rat(1, 3)],
        vec![rat(0, 1), rat(1, 3), rat(4, 1)],
    ];
    let rows = [vec![1i64, 0, 0], vec![0i64, 1, 0]];
    let k = vec![1i64, 2, -3];
    let (b, s) = shear_scalars_exact(&a_rat, &rows, &k);
    let km: Vec<i64> = k.iter().map(|&e| 5 * e).collect();
    let (bm, sm) = shear_scalars_exact(&a_rat, &rows, &km);
    assert_eq!(bm, b.clone() * rat(25, 1));
    assert_eq!(sm, s.clone() * rat(5, 1));
    assert!(b > Rat::zero());

    // cross-check against the float chain on the assembled matrix M A Mᵗ
    let a_f = DMatrix::from_row_slice(
        3,
        3,
        &[2.0, 0.5, 0.0, 0.5, 3.0, 1.0 / 3.0, 0.0, 1.0 / 3.0, 4.0],
    );
    let rows_all = [rows[0].clone(), rows[1].clone(), k.clone()];
    let m = DMatrix::from_fn(3, 3, |i, j| rows_all[i][j] as f64);
    let aj = &m * &a_f * m.transpose();
    let fr = shear_frame(&aj, 3).unwrap();
    let b_f: f64 = crate::lattice::rat_f64(&b);
    let s_f: f64 = crate::lattice::rat_f64(&s);
    assert!((fr.b[0] - b_f).abs() < 1e-12);
    assert!((fr.s_coeffs[0] - s_f).abs() < 1e-12);
}

#[test]
fn undo_shear_maps() {
    let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 1.0, 0.0, 2.0, 0.0, 1.0, 0.0, 2.0]);
    let fr = shear_frame(&a, 2).unwrap(); // s₃ = ½
    let ang = undo_shear(&fr, 0, 2);
    let act = undo_shear_action(&fr, 0, 2);
    // angle (φ, x₃) ↦ (φ, x₃ + ½φ); action (I, y₃) ↦ (I − ½y₃, y₃)
    let phi_x = &ang * DVector::from_column_slice(&[2.0, 1.0]);
    assert!((phi_x[0] - 2.0).abs() < 1e-14 && (phi_x[1] - 2.0).abs() < 1e-14);
    let iy = &act * DVector::from_column_slice(&[3.0, 4.0]);
    assert!((iy[0] - 1.0).abs() < 1e-14 && (iy[1] - 4.0).abs() < 1e-14);
    // symplectic pairing preserved: act = ang^{-T}
    let should_be_id = ang.transpose() * act;
    assert!((should_be_id - DMatrix::identity(2, 2)).abs().max() < 1e-14);
    // periodicity on the test lattice: s = p/q with q = 2, so shifting φ by
    // two full periods shifts the image by an integer lattice vector
    let tau = crate::TAU;
    let shift = &ang * DVector::from_column_slice(&[2.0 * tau, 0.0]);
    let lattice_units = [shift[0] / tau, shift[1] / tau];
    for u in lattice_units {
        assert!((u - u.round()).abs() < 1e-12);
    }
    // s = 0 gives the identity
    let d = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 2.0]);
    let fr0 = shear_frame(&d, 2).unwrap();
    assert_eq!(undo_shear(&fr0, 0, 2), DMatrix::identity(2, 2));
}

#[test]
fn energetic_reduction_circle_example() {
    // H = ½(y₁²+y₂²), E* = ½, conjugate index 1: Y₂ = √(1−y₁²).
    let h: Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync> =
        Arc::new(|_x: &[f64], y: &[f64]| 0.5 * (y[0] * y[0] + y[1] * y[1]));
    let xs = vec![vec![0.0, 0.0], vec![1.0, 2.0]];
    let ys = vec![vec![0.0], vec![0.5], vec![-0.5]];
    let red = energetic_reduction(h, 2, 0.5, 1, &xs, &ys, 1.0).unwrap();
    for y1 in [-0.6, 0.0, 0.3, 0.8] {
        let y2 = red.solved_momentum(&[0.0], &[y1], 0.0);
        assert!((y2 - (1.0 - y1 * y1).sqrt()).abs() < 1e-10);
        assert!((red.hamiltonian(&[0.0], &[y1], 0.0) + y2).abs() < 1e-12);
    }
}

#[test]
fn energetic_reduction_pendulum_rotator_flow_match() {
    // pendulum (x₁,y₁) × rotator (x₂,y₂) on the level E* = 1.5, reduced with
    // x₂ as time; orbits match the full flow within 1e−6 over time 100.
    let hv = |x: &[f64], y: &[f64]| {
        0.5 * (y[0] * y[0] + y[1] * y[1]) + (x[0].cos() - 1.0)
    };
    let h: Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync> = Arc::new(hv);
    let xs = vec![vec![0.0, 0.0], vec![2.0, 1.0], vec![4.0, 5.0]];
    let ys = vec![vec![0.0], vec![0.4], vec![-0.4]];
    let red = energetic_reduction(h, 2, 1.5, 1, &xs, &ys, 1.0).unwrap();

    // full flow from (x₁,x₂,y₁,y₂) on the level
    let x10 = 0.7f64;
    let y10 = 0.3f64;
    let y20 = (2.0 * (1.5 - 0.5 * y10 * y10 - (x10.cos() - 1.0))).sqrt();
    let full = ClosureField {
        dim: 4,
        f: |_t: f64, z: &[f64], out: &mut [f64]| {
            out[0] = z[2];
            out[1] = z[3];
            out[2] = z[0].sin();
            out[3] = 0.0;
        },
    };
    let t_end = 100.0;
    let zf = integrate_rk4(&full, 0.0, &[x10, 0.0, y10, y20], t_end, 200_000);

    // reduced flow in the time variable x₂ ∈ [0, y₂·t_end]
    let redref = &red;
    let reduced_field = ClosureField {
        dim: 2,
        f: move |t: f64, z: &[f64], out: &mut [f64]| {
            let e = 1e-6;
            let kp = redref.hamiltonian(&[z[0]], &[z[1] + e], t);
            let km = redref.hamiltonian(&[z[0]], &[z[1] - e], t);
            out[0] = (kp - km) / (2.0 * e);
            let kp = redref.hamiltonian(&[z[0] + e], &[z[1]], t);
            let km = redref.hamiltonian(&[z[0] - e], &[z[1]], t);
            out[1] = -(kp - km) / (2.0 * e);
        },
    };
    let s_end = y20 * t_end; // x₂ advances linearly for the rotator
    let zr = integrate_rk4(&reduced_field, 0.0, &[x10, y10], s_end, 200_000);
    assert!(
        (zf[0] - zr[0]).abs() < 1e-6 && (zf[2] - zr[1]).abs() < 1e-6,
        "full ({}, {}) vs reduced ({}, {})",
        zf[0],
        zf[2],
        zr[0],
        zr[1]
    );
}

#[test]
fn energetic_reduction_rejects_degenerate_momentum() {
    let h: Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync> =
        Arc::new(|_x: &[f64], y: &[f64]| 0.5 * (y[0] * y[0] + y[1] * y[1]));
    // level reachable only with y₂ ~ 0 near y₁ = ±1: derivative vanishes
    let xs = vec![vec![0.0, 0.0]];
    let ys = vec![vec![1.0]];
    assert!(matches!(
        energetic_reduction(h, 2, 0.5, 1, &xs, &ys, 1.0),
        Err(HamError::NonMonotoneMomentum)
    ));
}
