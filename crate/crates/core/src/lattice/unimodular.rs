//! SL(n,Z) matrices: exact determinants, inverses, primary resonances and
//! completions of primitive vectors to unimodular bases.

use super::{big_gcd, LatticeError, Rat, ResonanceVector};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Integer matrix with determinant exactly +1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnimodularMatrix {
    pub rows: Vec<Vec<i64>>,
}

impl UnimodularMatrix {
    /// Checked constructor: determinant must be exactly +1 in integer arithmetic.
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self, LatticeError> {
        let m = UnimodularMatrix { rows };
        if m.det() != BigInt::one() {
            return Err(LatticeError::WrongPrimary(format!(
                "matrix has determinant {} instead of 1",
                m.det()
            )));
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        UnimodularMatrix { rows }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Exact determinant by fraction-free Gaussian elimination over BigInt.
    pub fn det(&self) -> BigInt {
        let n = self.n();
        let mut a: Vec<Vec<BigInt>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&e| BigInt::from(e)).collect())
            .collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                    return BigInt::zero();
                };
                a.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[k][k] * &a[i][j] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        sign * a[n - 1][n - 1].clone()
    }

    /// Exact inverse; only valid when det = ±1 so the inverse is integral.
    pub fn inverse(&self) -> UnimodularMatrix {
        let n = self.n();
        let det = self.det();
        assert!(
            det.clone().abs() == BigInt::one(),
            "inverse requested for non-unimodular matrix"
        );
        // Adjugate via cofactors; n is small (≤ 8) so this is cheap.
        let mut inv = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                let minor = self.minor(j, i);
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                let c = BigInt::from(sign) * minor / det.clone();
                inv[i][j] = c.to_i64().expect("inverse entry exceeds i64");
            }
        }
        UnimodularMatrix { rows: inv }
    }

    fn minor(&self, drop_row: usize, drop_col: usize) -> BigInt {
        let n = self.n();
        let rows: Vec<Vec<i64>> = (0..n)
            .filter(|&i| i != drop_row)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != drop_col)
                    .map(|j| self.rows[i][j])
                    .collect()
            })
            .collect();
        if rows.is_empty() {
            return BigInt::one();
        }
        UnimodularMatrix { rows }.det()
    }

    /// Row vector times matrix: k ↦ k·M.
    pub fn row_mul(&self, k: &ResonanceVector) -> ResonanceVector {
        let n = self.n();
        let mut out = vec![0i64; n];
        for (j, o) in out.iter_mut().enumerate() {
            for i in 0..n {
                *o += k.0[i] * self.rows[i][j];
            }
        }
        ResonanceVector(out)
    }

    /// Matrix times exact rational column vector: ω ↦ M·ω.
    pub fn mul_rat_vec(&self, w: &[Rat]) -> Vec<Rat> {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .zip(w)
                    .map(|(&e, wi)| Rat::from(BigInt::from(e)) * wi)
                    .fold(Rat::zero(), |a, b| a + b)
            })
            .collect()
    }

    /// Operator ∞-norm: max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&e| e.abs() as f64).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// The first resonance of the frequency line (a, P/Q, p/q, ω̂*):
/// k′ = (0, Qp, −qP, 0,…,0)/d with d = gcd(pQ, Pq). Primitive by construction.
pub fn primary_resonance(
    big: &Rat,
    small: &Rat,
    n: usize,
) -> Result<ResonanceVector, LatticeError> {
    if n < 3 {
        return Err(LatticeError::DimensionTooSmall(n));
    }
    let (p_cap, q_cap) = (big.numer().clone(), big.denom().clone());
    let (p, q) = (small.numer().clone(), small.denom().clone());
    if p.is_zero() && p_cap.is_zero() {
        return Err(LatticeError::DegenerateFractions);
    }
    let qp = &q_cap * &p; // Qp
    let qcap_p = &q * &p_cap; // qP
    let d = big_gcd(&qp, &qcap_p);
    let mut k = vec![0i64; n];
    k[1] = (&qp / &d).to_i64().ok_or(LatticeError::BadDenominator)?;
    k[2] = (-(&qcap_p / &d)).to_i64().ok_or(LatticeError::BadDenominator)?;
    let k = ResonanceVector(k);
    debug_assert!(k.is_primitive());
    Ok(k)
}

/// Extended Euclid: returns (g, x, y) with a·x + b·y = g = gcd(a,b) ≥ 0.
pub fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

/// Completes a primitive integer row vector to an SL(n,Z) matrix whose first
/// row is the given vector. Column-reduction of k is mirrored by inverse row
/// operations on the accumulated matrix, so no matrix inversion is needed.
pub fn complete_to_unimodular(k: &ResonanceVector) -> Result<UnimodularMatrix, LatticeError> {
    let g = k.gcd();
    if g != 1 {
        return Err(LatticeError::NotPrimitive(g));
    }
    let n = k.dim();
    if n < 2 {
        return Err(LatticeError::DimensionTooSmall(n));
    }
    // Work on c (copy of k) with column ops; maintain W = U^{-1} with the
    // mirrored inverse row ops so that c = k·U implies row 0 of W is k / c[0].
    let mut c: Vec<i64> = k.0.clone();
    let mut w = UnimodularMatrix::identity(n).rows;
    let mut det_sign = 1i64;

    // Reduce all entries beyond index 0 to zero by Euclid between positions.
    for j in 1..n {
        while c[j] != 0 {
            if c[0] == 0 {
                c.swap(0, j);
                w.swap(0, j);
                det_sign = -det_sign;
                continue;
            }
            let q = c[0].div_euclid(c[j]);
            // col op: col0 -= q*colj  ⇒ row op on W: rowj += q*row0
            c[0] -= q * c[j];
            for t in 0..n {
                let add = q * w[0][t];
                w[j][t] += add;
            }
            if c[0] != 0 {
                c.swap(0, j);
                w.swap(0, j);
                det_sign = -det_sign;
            }
        }
    }
    debug_assert!(c[1..].iter().all(|&e| e == 0));
    if c[0] < 0 {
        for t in 0..n {
            w[0][t] = -w[0][t];
        }
        det_sign = -det_sign;
    }
    if det_sign < 0 {
        // Fix the determinant without touching the first row.
        for t in 0..n {
            w[n - 1][t] = -w[n - 1][t];
        }
    }
    let m = UnimodularMatrix { rows: w };
    debug_assert_eq!(m.rows[0], k.0);
    debug_assert_eq!(m.det(), BigInt::one());
    Ok(m)
}
