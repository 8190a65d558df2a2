//! Fourier modes with action-polynomial coefficients.

use super::HamError;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Polynomial in y with complex coefficients, stored as (multi-index, coeff)
/// pairs. Degree stays ≤ 2 by default; the algebra only ever needs value and
/// gradient of the perturbation near the base point.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct YPoly {
    pub terms: Vec<(Vec<u32>, Complex64)>,
}

impl YPoly {
    pub fn constant(c: Complex64, n: usize) -> Self {
        YPoly { terms: vec![(vec![0; n], c)] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.norm() == 0.0)
    }

    pub fn eval(&self, y: &[f64]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (mi, c) in &self.terms {
            let mut m = 1.0;
            for (e, yi) in mi.iter().zip(y) {
                m *= yi.powi(*e as i32);
            }
            s += c * m;
        }
        s
    }

    pub fn conj(&self) -> YPoly {
        YPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect(),
        }
    }

    /// ∂^α applied to the polynomial.
    pub fn derivative(&self, alpha: &[u32]) -> YPoly {
        let mut out = Vec::new();
        'terms: for (mi, c) in &self.terms {
            let mut coeff = *c;
            let mut new_mi = mi.clone();
            for (i, &a) in alpha.iter().enumerate() {
                if mi[i] < a {
                    continue 'terms;
                }
                for t in 0..a {
                    coeff *= (mi[i] - t) as f64;
                }
                new_mi[i] = mi[i] - a;
            }
            out.push((new_mi, coeff));
        }
        YPoly { terms: out }
    }

    pub fn scale(&self, s: f64) -> YPoly {
        YPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }
}

/// One Fourier mode c_k(y)·e^{i⟨k,x⟩}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k: Vec<i64>,
    pub coeff: YPoly,
}

/// Finite sum of modes; realness requires the modes to come in conjugate
/// pairs c_{-k} = conj(c_k).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FourierField {
    pub n: usize,
    pub modes: Vec<Mode>,
}

impl FourierField {
    pub fn new(n: usize) -> Self {
        FourierField { n, modes: vec![] }
    }

    /// a·cos(⟨k,x⟩ + phase-free), added as the conjugate pair (a/2)e^{±ikx}.
    pub fn add_cos(&mut self, k: Vec<i64>, a: f64) {
        assert_eq!(k.len(), self.n);
        let c = Complex64::new(a / 2.0, 0.0);
        let neg: Vec<i64> = k.iter().map(|&e| -e).collect();
        self.push_mode(k, c);
        self.push_mode(neg, c);
    }

    /// a·sin(⟨k,x⟩) = (a/2i)e^{ikx} − (a/2i)e^{-ikx}.
    pub fn add_sin(&mut self, k: Vec<i64>, a: f64) {
        assert_eq!(k.len(), self.n);
        let c = Complex64::new(0.0, -a / 2.0);
        let neg: Vec<i64> = k.iter().map(|&e| -e).collect();
        self.push_mode(k, c);
        self.push_mode(neg, c.conj());
    }

    pub fn push_mode(&mut self, k: Vec<i64>, c: Complex64) {
        if let Some(m) = self.modes.iter_mut().find(|m| m.k == k) {
            if let Some((_, c0)) = m.coeff.terms.first_mut() {
                *c0 += c;
            } else {
                m.coeff = YPoly::constant(c, k.len());
            }
        } else {
            let nc = YPoly::constant(c, k.len());
            self.modes.push(Mode { k, coeff: nc });
        }
    }

    pub fn push_mode_poly(&mut self, k: Vec<i64>, coeff: YPoly) {
        self.modes.push(Mode { k, coeff });
    }

    /// Pointwise value; real by the conjugate-pair invariant.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for m in &self.modes {
            let ph: f64 = m.k.iter().zip(x).map(|(&ki, xi)| ki as f64 * xi).sum();
            s += m.coeff.eval(y) * Complex64::from_polar(1.0, ph);
        }
        s.re
    }

    pub fn eval_x(&self, x: &[f64]) -> f64 {
        self.eval(x, &vec![0.0; self.n])
    }

    /// Gradient in x at (x, y).
    pub fn grad_x(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut g = vec![Complex64::new(0.0, 0.0); self.n];
        for m in &self.modes {
            let ph: f64 = m.k.iter().zip(x).map(|(&ki, xi)| ki as f64 * xi).sum();
            let e = m.coeff.eval(y) * Complex64::from_polar(1.0, ph) * Complex64::new(0.0, 1.0);
            for (gi, &ki) in g.iter_mut().zip(&m.k) {
                *gi += e * ki as f64;
            }
        }
        g.into_iter().map(|c| c.re).collect()
    }

    /// c_{-k} = conj(c_k) for every stored mode.
    pub fn check_real(&self) -> Result<(), HamError> {
        for m in &self.modes {
            let neg: Vec<i64> = m.k.iter().map(|&e| -e).collect();
            let partner: YPoly = self
                .modes
                .iter()
                .filter(|mm| mm.k == neg)
                .fold(YPoly::default(), |mut acc, mm| {
                    acc.terms.extend(mm.coeff.terms.clone());
                    acc
                });
            // compare collapsed constant parts at a few sample y's
            for y in sample_ys(self.n) {
                let a = m.coeff.eval(&y);
                let b = partner.eval(&y);
                if (a - b.conj()).norm() > 1e-12 * (1.0 + a.norm()) {
                    return Err(HamError::NotReal(m.k.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn l1_coeff_norm(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.coeff.eval(&vec![0.0; self.n]).norm())
            .sum()
    }

    pub fn scale(&self, s: f64) -> FourierField {
        FourierField {
            n: self.n,
            modes: self
                .modes
                .iter()
                .map(|m| Mode { k: m.k.clone(), coeff: m.coeff.scale(s) })
                .collect(),
        }
    }
}

pub(crate) fn sample_ys(n: usize) -> Vec<Vec<f64>> {
    let mut ys = vec![vec![0.0; n]];
    for i in 0..n {
        let mut y = vec![0.3; n];
        y[i] = -0.7;
        ys.push(y);
    }
    ys.push(vec![0.9; n]);
    ys
}

/// The convex integrable part h(y): value, gradient and Hessian callbacks
/// plus an analytic tag.
#[derive(Clone)]
pub enum IntegrablePart {
    /// h(y) = ½⟨Qy, y⟩ with Q symmetric positive definite.
    Quadratic(nalgebra::DMatrix<f64>),
    /// General callbacks (value, gradient, hessian).
    Callback {
        value: std::sync::Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        grad: std::sync::Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
        hess: std::sync::Arc<dyn Fn(&[f64]) -> nalgebra::DMatrix<f64> + Send + Sync>,
    },
}

impl std::fmt::Debug for IntegrablePart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IntegrablePart::Quadratic(q) => write!(f, "Quadratic({q:?})"),
            IntegrablePart::Callback { .. } => write!(f, "Callback"),
        }
    }
}

impl IntegrablePart {
    pub fn quadratic_identity(n: usize) -> Self {
        IntegrablePart::Quadratic(nalgebra::DMatrix::identity(n, n))
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        match self {
            IntegrablePart::Quadratic(q) => {
                let yv = nalgebra::DVector::from_column_slice(y);
                0.5 * (q * &yv).dot(&yv)
            }
            IntegrablePart::Callback { value, .. } => value(y),
        }
    }

    pub fn grad(&self, y: &[f64]) -> Vec<f64> {
        match self {
            IntegrablePart::Quadratic(q) => {
                let yv = nalgebra::DVector::from_column_slice(y);
                (q * yv).iter().copied().collect()
            }
            IntegrablePart::Callback { grad, .. } => grad(y),
        }
    }

    pub fn hess(&self, y: &[f64]) -> nalgebra::DMatrix<f64> {
        match self {
            IntegrablePart::Quadratic(q) => q.clone(),
            IntegrablePart::Callback { hess, .. } => hess(y),
        }
    }
}

/// H(x,y) = h(y) + ε·P(x,y) with P a finite Fourier sum.
#[derive(Debug, Clone)]
pub struct FourierHamiltonian {
    pub n: usize,
    pub h: IntegrablePart,
    pub pert: FourierField,
    pub epsilon: f64,
}

impl FourierHamiltonian {
    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        self.h.value(y) + self.epsilon * self.pert.eval(x, y)
    }
}
