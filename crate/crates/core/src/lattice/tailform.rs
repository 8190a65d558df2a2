//! Linear forms over the Diophantine tail basis.
//!
//! Frequency entries mix exact rationals with a handful of (algebraically
//! independent) irrational tail components t_1,…,t_m. Every quantity the
//! resonance algebra produces — double-resonance parameters a″, shifted
//! parameters after a reduction step, inner products ⟨k,ω⟩ — is an affine
//! combination c0 + Σ c_i t_i with rational coefficients. Carrying the
//! coefficients exactly lets identities like ⟨k̄″, ω̄_ā″⟩ = 0 be checked as
//! exact vanishing instead of float comparisons.

use super::{rat_f64, Rat};
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq)]
pub struct TailForm {
    pub c0: Rat,
    pub coeffs: Vec<Rat>,
}

impl TailForm {
    pub fn constant(c0: Rat, m: usize) -> Self {
        TailForm { c0, coeffs: vec![Rat::zero(); m] }
    }

    pub fn basis(i: usize, m: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); m];
        coeffs[i] = Rat::from_integer(1.into());
        TailForm { c0: Rat::zero(), coeffs }
    }

    pub fn zero(m: usize) -> Self {
        Self::constant(Rat::zero(), m)
    }

    pub fn is_exact_zero(&self) -> bool {
        self.c0.is_zero() && self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, s: &Rat) -> TailForm {
        TailForm {
            c0: &self.c0 * s,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &TailForm) -> TailForm {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        TailForm {
            c0: &self.c0 + &other.c0,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &TailForm) -> TailForm {
        self.add(&other.scale(&Rat::from_integer((-1).into())))
    }

    pub fn eval(&self, tail: &[f64]) -> f64 {
        assert_eq!(tail.len(), self.coeffs.len());
        let mut v = rat_f64(&self.c0);
        for (c, t) in self.coeffs.iter().zip(tail) {
            if !c.is_zero() {
                v += rat_f64(c) * t;
            }
        }
        v
    }
}
