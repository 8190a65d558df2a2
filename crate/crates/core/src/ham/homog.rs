//! Homogenization around a base action point: y = y* + √ε·Y, t = τ/√ε,
//! H = ε·𝖧, with the quadratic model split off and the remainders
//! P_I (integrable tail, cubic and higher in Y) and P_II (mixed tail)
//! retained as callbacks with recorded norm bounds.

use super::fourier::{FourierField, FourierHamiltonian, Mode, YPoly};
use super::HamError;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct HomogenizedHamiltonian {
    pub n: usize,
    pub y_star: Vec<f64>,
    pub epsilon: f64,
    /// 𝖠 = ∂²h(y*), symmetric positive definite.
    pub a_mat: DMatrix<f64>,
    /// ω* = ∂h(y*).
    pub omega_star: Vec<f64>,
    /// 𝖵(x) = P(x, y*), the x-only slice of the perturbation.
    pub v: FourierField,
    /// Original data, kept so the remainders are evaluated exactly.
    pub original: FourierHamiltonian,
    /// h(y*)/ε, the constant discarded by most consumers.
    pub energy_offset: f64,
    /// Sampled sup bound of |P_II| over |Y| ≤ y_ball (zero when P is
    /// y-independent).
    pub p2_bound: f64,
    /// Sampled sup bound of |P_I| over |Y| ≤ y_ball.
    pub p1_bound: f64,
    pub y_ball: f64,
}

impl HomogenizedHamiltonian {
    /// Full homogenized value 𝖧(x,Y) = H(x, y*+√εY)/ε.
    pub fn eval_full(&self, x: &[f64], y_big: &[f64]) -> f64 {
        let y: Vec<f64> = self
            .y_star
            .iter()
            .zip(y_big)
            .map(|(&ys, &yb)| ys + self.epsilon.sqrt() * yb)
            .collect();
        self.original.value(x, &y) / self.epsilon
    }

    /// The quadratic model: h(y*)/ε + ⟨ω*,Y⟩/√ε + ½⟨𝖠Y,Y⟩ + 𝖵(x).
    pub fn eval_model(&self, x: &[f64], y_big: &[f64]) -> f64 {
        let yv = DVector::from_column_slice(y_big);
        let lin: f64 = self.omega_star.iter().zip(y_big).map(|(&w, &y)| w * y).sum();
        self.energy_offset
            + lin / self.epsilon.sqrt()
            + 0.5 * (&self.a_mat * &yv).dot(&yv)
            + self.v.eval_x(x)
    }

    /// P_I(Y): the cubic-and-higher tail of h in the homogenized scale.
    pub fn p1(&self, y_big: &[f64]) -> f64 {
        let se = self.epsilon.sqrt();
        let y: Vec<f64> = self.y_star.iter().zip(y_big).map(|(&ys, &yb)| ys + se * yb).collect();
        let lin: f64 = self
            .omega_star
            .iter()
            .zip(y_big)
            .map(|(&w, &yb)| w * yb)
            .sum();
        let yv = DVector::from_column_slice(y_big);
        (self.original.h.value(&y)
            - self.original.h.value(&self.y_star)
            - se * lin
            - self.epsilon * 0.5 * (&self.a_mat * &yv).dot(&yv))
            / self.epsilon
    }

    /// P_II(x,Y) = P(x, y*+√εY) − P(x, y*).
    pub fn p2(&self, x: &[f64], y_big: &[f64]) -> f64 {
        let se = self.epsilon.sqrt();
        let y: Vec<f64> = self.y_star.iter().zip(y_big).map(|(&ys, &yb)| ys + se * yb).collect();
        self.original.pert.eval(x, &y) - self.original.pert.eval(x, &self.y_star)
    }
}

/// Build the homogenized Hamiltonian at y*. Rejects base points where the
/// Hessian fails positive definiteness; spot-verifies the reconstruction
/// identity ε𝖧(x,(y−y*)/√ε) = H(x,y) and records sampled remainder bounds.
pub fn homogenize(
    h: &FourierHamiltonian,
    y_star: &[f64],
    epsilon: f64,
    y_ball: f64,
) -> Result<HomogenizedHamiltonian, HamError> {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let n = h.n;
    let a_mat = h.h.hess(y_star);
    // positive definiteness via Cholesky
    if nalgebra::Cholesky::new(a_mat.clone()).is_none() {
        return Err(HamError::NotPositiveDefinite);
    }
    let omega_star = h.h.grad(y_star);

    // x-only slice V(x) = P(x, y*): collapse each mode's y-polynomial.
    let mut v = FourierField::new(n);
    for m in &h.pert.modes {
        let c = m.coeff.eval(y_star);
        if c.norm() > 0.0 {
            v.modes.push(Mode { k: m.k.clone(), coeff: YPoly::constant(c, n) });
        }
    }

    let hh = HomogenizedHamiltonian {
        n,
        y_star: y_star.to_vec(),
        epsilon,
        a_mat,
        omega_star,
        v,
        original: h.clone(),
        energy_offset: h.h.value(y_star) / epsilon,
        p2_bound: 0.0,
        p1_bound: 0.0,
        y_ball,
    };

    let mut out = hh;
    let (p1b, p2b) = sample_remainders(&out, y_ball);
    out.p1_bound = p1b;
    out.p2_bound = p2b;
    Ok(out)
}

fn sample_remainders(hh: &HomogenizedHamiltonian, y_ball: f64) -> (f64, f64) {
    let n = hh.n;
    let mut p1 = 0.0f64;
    let mut p2 = 0.0f64;
    let xs = crate::TAU / 7.0;
    for s in 0..7 {
        let x = vec![xs * s as f64; n];
        for dir in 0..n {
            for &t in &[-1.0, -0.5, 0.5, 1.0] {
                let mut y = vec![0.17 * t; n];
                y[dir] = y_ball * t;
                p1 = p1.max(hh.p1(&y).abs());
                p2 = p2.max(hh.p2(&x, &y).abs());
            }
        }
    }
    (p1, p2)
}
