//! Exact integer and rational arithmetic for resonance vectors, unimodular
//! completions, Diophantine gap bounds, and admissible frequency paths.
//!
//! Conventions follow the usual ones for frequency-line analysis: integer
//! vectors are rows and carry the ℓ1 norm, frequencies are columns and carry
//! the ℓ∞ norm, so |⟨k,ω⟩| ≤ |k|·|ω|.

mod tailform;
mod unimodular;
mod segment;
mod path;

pub use tailform::TailForm;
pub use unimodular::{complete_to_unimodular, primary_resonance, UnimodularMatrix};
pub use segment::{
    build_m_prime, dc_check, dc_max_alpha, descend_resonance, enumerate_l1_ball, in_span_one,
    in_span_two, neighborhood_radius, reduce_segment, second_resonances, triple_resonance_gap,
    DcCert, DoubleResonance, FrequencySegment, GapReport,
};
pub use path::{
    admissible_path, algebraic_tail, best_approx, diophantine_pair, simplest_in_interval,
    verify_path_gaps, AdmissiblePath, Junction, PathSegment,
};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Exact rational scalar used throughout the lattice layer.
pub type Rat = BigRational;

pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_f64(r: &Rat) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum LatticeError {
    #[error("degenerate fraction pair: p = 0 and P = 0 resonate trivially")]
    DegenerateFractions,
    #[error("vector is not primitive (gcd of entries is {0})")]
    NotPrimitive(i64),
    #[error("zero resonance vector")]
    ZeroVector,
    #[error("dimension must be at least 3, got {0}")]
    DimensionTooSmall(usize),
    #[error("denominator must be positive")]
    BadDenominator,
    #[error("{0} is not the primary resonance of the given fractions")]
    WrongPrimary(String),
    #[error("diophantine pair search failed after {retries} retries (alpha shrunk to {alpha:.3e}); K_check or rho too demanding")]
    DiophantineSearchFailed { retries: usize, alpha: f64 },
    #[error("admissible path construction failed: {0}")]
    PathConstruction(String),
}

/// Integer row vector k with ⟨k,ω⟩ = 0 declaring a resonance relation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResonanceVector(pub Vec<i64>);

impl ResonanceVector {
    pub fn new(entries: Vec<i64>) -> Result<Self, LatticeError> {
        if entries.iter().all(|&e| e == 0) {
            return Err(LatticeError::ZeroVector);
        }
        Ok(ResonanceVector(entries))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// ℓ1 norm, the paper-standard size of an integer vector.
    pub fn norm_l1(&self) -> i64 {
        self.0.iter().map(|e| e.abs()).sum()
    }

    pub fn gcd(&self) -> i64 {
        self.0.iter().fold(0i64, |g, &e| num_integer::gcd(g, e.abs()))
    }

    pub fn is_primitive(&self) -> bool {
        self.gcd() == 1
    }

    /// Divide out the gcd and fix the sign so the first nonzero entry is positive.
    pub fn primitive_normal(&self) -> ResonanceVector {
        let g = self.gcd().max(1);
        let mut v: Vec<i64> = self.0.iter().map(|e| e / g).collect();
        if let Some(&first) = v.iter().find(|&&e| e != 0) {
            if first < 0 {
                for e in &mut v {
                    *e = -*e;
                }
            }
        }
        ResonanceVector(v)
    }

    pub fn dot_rat(&self, w: &[Rat]) -> Rat {
        self.0
            .iter()
            .zip(w)
            .map(|(&k, wi)| Rat::from(BigInt::from(k)) * wi)
            .fold(Rat::zero(), |a, b| a + b)
    }
}

impl std::fmt::Display for ResonanceVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Entry of a frequency vector: exact fraction or floating tail component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FreqEntry {
    Rational(Rat),
    Real(f64),
}

impl FreqEntry {
    pub fn to_f64(&self) -> f64 {
        match self {
            FreqEntry::Rational(r) => rat_f64(r),
            FreqEntry::Real(x) => *x,
        }
    }
}

/// Rotation frequency vector in dimension n ≥ 3. Rational entries are exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub entries: Vec<FreqEntry>,
}

impl Frequency {
    pub fn new(entries: Vec<FreqEntry>) -> Result<Self, LatticeError> {
        if entries.len() < 3 {
            return Err(LatticeError::DimensionTooSmall(entries.len()));
        }
        for e in &entries {
            if !e.to_f64().is_finite() {
                return Err(LatticeError::BadDenominator);
            }
        }
        Ok(Frequency { entries })
    }

    pub fn from_reals(v: &[f64]) -> Result<Self, LatticeError> {
        Self::new(v.iter().map(|&x| FreqEntry::Real(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.to_f64()).collect()
    }

    /// ℓ∞ norm, the paper-standard size of a frequency.
    pub fn norm_inf(&self) -> f64 {
        self.to_f64_vec().iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

pub(crate) fn big_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    num_integer::Integer::gcd(&a.abs(), &b.abs())
}

#[cfg(test)]
mod tests;
