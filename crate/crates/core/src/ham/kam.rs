//! Weighted C^r norms, resonant splitting, the cohomological equation and
//! the single averaging step that produces the resonant normal form.

use super::fourier::{sample_ys, FourierField, Mode, YPoly};
use super::homog::HomogenizedHamiltonian;
use super::HamError;
use crate::lattice::{in_span_one, in_span_two, ResonanceVector};
use num_complex::Complex64;

/// |f|_r = sup_y Σ_k Σ_{|α+β|≤r} |∂^α f^k/∂y^α| (|k^β|+1), with multi-index
/// monomials k^β = k₁^{β₁}···k_n^{β_n}. The sup runs over a fixed sample of
/// the unit y-ball; for x-only fields the sup is exact.
pub fn cr_norm(f: &FourierField, r: u32) -> f64 {
    let n = f.n;
    let alphas = multi_indices(n, r);
    let mut best = 0.0f64;
    for y in sample_ys(n) {
        let mut total = 0.0;
        for m in &f.modes {
            for alpha in &alphas {
                let da = m.coeff.derivative(alpha).eval(&y).norm();
                if da == 0.0 {
                    continue;
                }
                let rem = r - alpha.iter().sum::<u32>();
                total += da * beta_weight(&m.k, rem);
            }
        }
        best = best.max(total);
    }
    best
}

/// Σ_{|β| ≤ m} (|k^β| + 1).
fn beta_weight(k: &[i64], m: u32) -> f64 {
    let betas = multi_indices(k.len(), m);
    betas
        .iter()
        .map(|b| {
            let mut mono = 1.0f64;
            for (e, &ki) in b.iter().zip(k) {
                mono *= (ki as f64).powi(*e as i32);
            }
            mono.abs() + 1.0
        })
        .sum()
}

fn multi_indices(n: usize, max_sum: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Vec<u32>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[pos] = v;
            rec(cur, pos + 1, left - v, out);
        }
        cur[pos] = 0;
    }
    rec(&mut cur, 0, max_sum, &mut out);
    out
}

/// Exact partition of an x-only field by the resonance module: modes in
/// span_Z(module) land in V_res, the remaining ones with |k|₁ ≤ K in R_le,
/// the rest in R_gt. Membership is decided by exact integer linear algebra.
pub fn split_resonant(
    v: &FourierField,
    module: &[ResonanceVector],
    kmax: i64,
) -> Result<(FourierField, FourierField, FourierField), HamError> {
    if module.len() == 2 {
        // linear independence over Q
        let k1 = &module[0];
        let k2 = &module[1];
        let dependent = in_span_one(&k1.primitive_normal(), &k2.primitive_normal())
            || in_span_one(&k2.primitive_normal(), &k1.primitive_normal());
        if dependent {
            return Err(HamError::DependentModule);
        }
    }
    let n = v.n;
    let mut res = FourierField::new(n);
    let mut le = FourierField::new(n);
    let mut gt = FourierField::new(n);
    for m in &v.modes {
        let k = ResonanceVector(m.k.clone());
        let zero = m.k.iter().all(|&e| e == 0);
        let member = zero
            || match module.len() {
                1 => in_span_one(&k, &module[0]),
                2 => in_span_two(&k, &module[0], &module[1]),
                _ => panic!("module of size 1 or 2 expected"),
            };
        let target = if member {
            &mut res
        } else if k.norm_l1() <= kmax {
            &mut le
        } else {
            &mut gt
        };
        target.modes.push(m.clone());
    }
    Ok((res, le, gt))
}

/// Solve R_≤ + ⟨ω*, ∂F/∂x⟩ = 0 mode-wise: F_k = −R_k/(i⟨k,ω*⟩). Errors with
/// the offending k when a divisor falls at or below the floor.
pub fn solve_cohomological(
    r_le: &FourierField,
    omega_star: &[f64],
    divisor_floor: f64,
) -> Result<FourierField, HamError> {
    let mut f = FourierField::new(r_le.n);
    for m in &r_le.modes {
        let div: f64 = m.k.iter().zip(omega_star).map(|(&k, &w)| k as f64 * w).sum();
        if div.abs() <= divisor_floor {
            return Err(HamError::SmallDivisor {
                k: m.k.clone(),
                value: div.abs(),
                floor: divisor_floor,
            });
        }
        let denom = Complex64::new(0.0, div);
        let coeff = YPoly {
            terms: m
                .coeff
                .terms
                .iter()
                .map(|(mi, c)| (mi.clone(), -c / denom))
                .collect(),
        };
        f.modes.push(Mode { k: m.k.clone(), coeff });
    }
    Ok(f)
}

/// Max of |R_≤(x) + ⟨ω*, ∂F/∂x⟩(x)| over a uniform grid.
pub fn cohomological_residual(
    r_le: &FourierField,
    f: &FourierField,
    omega_star: &[f64],
    grid_per_dim: usize,
) -> f64 {
    let n = r_le.n;
    let h = crate::TAU / grid_per_dim as f64;
    let total = grid_per_dim.pow(n as u32);
    let y0 = vec![0.0; n];
    let mut worst = 0.0f64;
    for idx in 0..total {
        let mut rem = idx;
        let mut x = vec![0.0; n];
        for xi in x.iter_mut() {
            *xi = (rem % grid_per_dim) as f64 * h;
            rem /= grid_per_dim;
        }
        let g = f.grad_x(&x, &y0);
        let dot: f64 = g.iter().zip(omega_star).map(|(&a, &b)| a * b).sum();
        worst = worst.max((r_le.eval(&x, &y0) + dot).abs());
    }
    worst
}

/// Resonant normal form produced by one averaging step.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub module: Vec<ResonanceVector>,
    /// V restricted to the module span (plus the mean).
    pub resonant_part: FourierField,
    /// Generator F of the time-1 shear x ↦ x, Y ↦ Y − √ε ∇F(x).
    pub generator: FourierField,
    /// R_> tail (|k| > K off module), with its recorded C^{r-2} norm.
    pub tail_r1: FourierField,
    pub tail_r1_norm: f64,
    /// Sampled sup of the mixed remainder 𝖧∘φ − prediction − R_>.
    pub tail_r2_sampled: f64,
    /// Analytic order of the same remainder: ε^{r/(2(r+2))} for a single
    /// resonance, ε^σ for a double one, times the measured O(1) constant.
    pub tail_r2_analytic: f64,
    pub divisor_floor: f64,
    pub delta: f64,
    pub kmax: i64,
}

impl NormalForm {
    /// Normal-form prediction at (x,Y): model with V replaced by V_res.
    pub fn predict(&self, hh: &HomogenizedHamiltonian, x: &[f64], y_big: &[f64]) -> f64 {
        hh.eval_model(x, y_big) - hh.v.eval_x(x) + self.resonant_part.eval_x(x)
    }

    /// Transformed action of the averaging shear: Y ↦ Y + √ε∇F(x), the
    /// time-1 flow of the generator in the orientation that makes
    /// ⟨ω*, Y⟩/√ε pick up −R_≤ and cancel the low off-module modes.
    /// Exact for x-only F.
    pub fn transform(&self, hh: &HomogenizedHamiltonian, x: &[f64], y_big: &[f64]) -> Vec<f64> {
        let g = self.generator.grad_x(x, &vec![0.0; x.len()]);
        y_big
            .iter()
            .zip(&g)
            .map(|(&y, &gf)| y + hh.epsilon.sqrt() * gf)
            .collect()
    }
}

/// One step of KAM averaging: split 𝖵 by the module, solve the cohomological
/// equation for the non-resonant low modes, and record the remainder sizes
/// of the transformed Hamiltonian. The divisor floor defaults to
/// ε^{1/(r+2)}·δ^{-1/2} when the caller passes none.
pub fn one_step_kam(
    hh: &HomogenizedHamiltonian,
    module: &[ResonanceVector],
    kmax: i64,
    delta: f64,
    r_smooth: u32,
    divisor_floor: Option<f64>,
) -> Result<NormalForm, HamError> {
    let floor = divisor_floor
        .unwrap_or_else(|| hh.epsilon.powf(1.0 / (r_smooth as f64 + 2.0)) * delta.powf(-0.5));
    let (res, le, gt) = split_resonant(&hh.v, module, kmax)?;
    let generator = solve_cohomological(&le, &hh.omega_star, floor)?;
    let tail_r1_norm = if r_smooth >= 2 {
        cr_norm(&gt, r_smooth - 2)
    } else {
        cr_norm(&gt, 0)
    };

    // Sampled size of the transformed mixed remainder
    //   𝖧∘φ(x,Y) − prediction(x,Y) − R_>(x)
    // on a coarse (x,Y) sample; the cancellation of R_≤ happens inside.
    let mut nf = NormalForm {
        module: module.to_vec(),
        resonant_part: res,
        generator,
        tail_r1: gt,
        tail_r1_norm,
        tail_r2_sampled: 0.0,
        tail_r2_analytic: 0.0,
        divisor_floor: floor,
        delta,
        kmax,
    };
    let n = hh.n;
    let mut sampled = 0.0f64;
    for s in 0..6 {
        let x: Vec<f64> = (0..n)
            .map(|d| crate::TAU * (s as f64 / 6.0 + 0.07 * d as f64) + 0.13)
            .collect();
        for dir in 0..n {
            let mut y = vec![0.21; n];
            y[dir] = 0.8;
            let y_new = nf.transform(hh, &x, &y);
            let transformed = hh.eval_full(&x, &y_new);
            let predicted = nf.predict(hh, &x, &y);
            let rem = transformed - predicted - nf.tail_r1.eval_x(&x);
            sampled = sampled.max(rem.abs());
        }
    }
    let single = module.len() == 1;
    let order_exponent = if single {
        r_smooth as f64 / (2.0 * (r_smooth as f64 + 2.0))
    } else {
        // σ < 1/(r+2); the conventional choice σ = 1/(2(r+2))
        1.0 / (2.0 * (r_smooth as f64 + 2.0))
    };
    let scale = cr_norm(&hh.v, r_smooth.min(3)).max(1.0);
    nf.tail_r2_sampled = sampled;
    nf.tail_r2_analytic = hh.epsilon.powf(order_exponent) * scale;
    Ok(nf)
}
