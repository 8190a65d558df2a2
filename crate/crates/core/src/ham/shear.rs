//! Shear transforms: unit lower-triangular congruences that block-diagonalize
//! the kinetic quadratic form, the scalars b_i, s_i they produce, and the
//! undo-shear maps restoring torus periodicity after a reduction of order.

use super::HamError;
use crate::lattice::Rat;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::Zero;

#[derive(Debug, Clone)]
pub struct ShearFrame {
    /// Unit lower-triangular S with S·A·Sᵗ = diag(Ã, b₃,…,b_j, B).
    pub s: DMatrix<f64>,
    /// Leading 2×2 block Ã.
    pub tilde_a: DMatrix<f64>,
    /// Scalars b_i for i = 3..=j (1-based block positions).
    pub b: Vec<f64>,
    /// Trailing (n−j)×(n−j) block B = Â − Ăᵗ Ã⁻¹ Ă.
    pub bb: DMatrix<f64>,
    /// Undo-shear scalars s_i (first entry of 𝖺_i Ã⁻¹_{i-1}) for i = 3..=j.
    pub s_coeffs: Vec<f64>,
    pub j: usize,
}

impl ShearFrame {
    /// ‖S·A·Sᵗ − blockdiag‖_max, the defect certified ≤ 1e−12.
    pub fn defect(&self, a: &DMatrix<f64>) -> f64 {
        let n = a.nrows();
        let conj = &self.s * a * self.s.transpose();
        let mut block = DMatrix::<f64>::zeros(n, n);
        block.view_mut((0, 0), (2, 2)).copy_from(&self.tilde_a);
        for (t, &bi) in self.b.iter().enumerate() {
            block[(2 + t, 2 + t)] = bi;
        }
        let off = 2 + self.b.len();
        let m = n - off;
        if m > 0 {
            block.view_mut((off, off), (m, m)).copy_from(&self.bb);
        }
        (conj - block).abs().max()
    }
}

/// Block-diagonalize an SPD matrix: split at position j into the leading
/// block and the Schur complement B, then iterate single-row shears inside
/// the leading block down to diag(Ã, b₃,…,b_j). j = n removes the trailing
/// block entirely.
pub fn shear_frame(a: &DMatrix<f64>, j: usize) -> Result<ShearFrame, HamError> {
    let n = a.nrows();
    assert!(a.is_square() && a.nrows() == n, "square matrix expected");
    assert!((2..=n).contains(&j), "block size j must be in 2..=n");
    // A scalar trailing block is the same thing as one more chain step.
    let j = if n - j == 1 { n } else { j };
    if nalgebra::Cholesky::new(a.clone()).is_none() {
        return Err(HamError::NotPositiveDefinite);
    }

    // Outer split S_I at j.
    let mut s_i = DMatrix::<f64>::identity(n, n);
    let bb = if j < n {
        let tilde = a.view((0, 0), (j, j)).into_owned();
        let breve = a.view((0, j), (j, n - j)).into_owned();
        let hat = a.view((j, j), (n - j, n - j)).into_owned();
        let tilde_inv = tilde
            .clone()
            .try_inverse()
            .ok_or(HamError::NotPositiveDefinite)?;
        // rows j.. get −Ăᵗ Ã⁻ᵗ in the leading columns
        let corr = -breve.transpose() * tilde_inv.transpose();
        s_i.view_mut((j, 0), (n - j, j)).copy_from(&corr);
        hat - breve.transpose() * tilde_inv * breve
    } else {
        DMatrix::<f64>::zeros(0, 0)
    };

    // Inner chain T_2…T_{j-1} diagonalizing the leading j×j beyond the 2×2.
    let lead = (&s_i * a * s_i.transpose()).view((0, 0), (j, j)).into_owned();
    let mut s_ii = DMatrix::<f64>::identity(n, n);
    let mut b = Vec::new();
    let mut s_coeffs = Vec::new();
    let mut cur = lead;
    for i in 2..j {
        // a_i = row i of the current matrix restricted to columns 0..i
        let tilde_i = cur.view((0, 0), (i, i)).into_owned();
        let a_row = cur.view((i, 0), (1, i)).into_owned();
        let tilde_inv = tilde_i
            .clone()
            .try_inverse()
            .ok_or(HamError::NotPositiveDefinite)?;
        let coeffs = &a_row * &tilde_inv; // 1×i
        let bi = cur[(i, i)] - (&coeffs * a_row.transpose())[(0, 0)];
        let mut t = DMatrix::<f64>::identity(n, n);
        for c in 0..i {
            t[(i, c)] = -coeffs[(0, c)];
        }
        s_coeffs.push(coeffs[(0, 0)]);
        b.push(bi);
        // apply T to the working leading block
        let tj = t.view((0, 0), (j, j)).into_owned();
        cur = &tj * &cur * tj.transpose();
        s_ii = &t * s_ii;
    }
    if b.iter().any(|&bi| bi <= 0.0) {
        return Err(HamError::NotPositiveDefinite);
    }
    let s = &s_ii * s_i;
    let tilde_a = cur.view((0, 0), (2, 2)).into_owned();
    Ok(ShearFrame { s, tilde_a, b, bb, s_coeffs, j })
}

/// Exact rational evaluation of the Gauss least-squares scalars for the
/// resonance-matrix formulation:
/// b_i = kⁱ(𝖠 − 𝖠Kᵗ(K𝖠Kᵗ)⁻¹K𝖠)(kⁱ)ᵗ and s_i = first entry of kⁱ𝖠Kᵗ(K𝖠Kᵗ)⁻¹,
/// with K the matrix of earlier resonance rows. Exactness makes the scaling
/// law b_i(m·k) = m²·b_i(k), s_i(m·k) = m·s_i(k) an identity, not a limit.
pub fn shear_scalars_exact(a: &[Vec<Rat>], rows: &[Vec<i64>], k: &[i64]) -> (Rat, Rat) {
    let n = k.len();
    let m = rows.len();
    assert!(m >= 1);
    let ar = |i: usize, j: usize| a[i][j].clone();
    // K A Kᵗ (m×m), k A Kᵗ (1×m), k A kᵗ (scalar)
    let mut kak = vec![vec![Rat::zero(); m]; m];
    for (r, kr) in rows.iter().enumerate() {
        for (c, kc) in rows.iter().enumerate() {
            let mut s = Rat::zero();
            for i in 0..n {
                for j in 0..n {
                    s += Rat::from(BigInt::from(kr[i])) * ar(i, j) * Rat::from(BigInt::from(kc[j]));
                }
            }
            kak[r][c] = s;
        }
    }
    let mut kak_inv = rat_inverse(&kak);
    let mut kat = vec![Rat::zero(); m];
    for (c, kc) in rows.iter().enumerate() {
        let mut s = Rat::zero();
        for i in 0..n {
            for j in 0..n {
                s += Rat::from(BigInt::from(k[i])) * ar(i, j) * Rat::from(BigInt::from(kc[j]));
            }
        }
        kat[c] = s;
    }
    let mut kak_scalar = Rat::zero();
    for i in 0..n {
        for j in 0..n {
            s_add(&mut kak_scalar, Rat::from(BigInt::from(k[i])) * ar(i, j) * Rat::from(BigInt::from(k[j])));
        }
    }
    // s_i = (kAKᵗ · (KAKᵗ)⁻¹)_1 ; b_i = kAkᵗ − kAKᵗ (KAKᵗ)⁻¹ (kAKᵗ)ᵗ
    let mut proj = vec![Rat::zero(); m];
    for r in 0..m {
        let mut s = Rat::zero();
        for c in 0..m {
            s += kat[c].clone() * kak_inv[c][r].clone();
        }
        proj[r] = s;
    }
    let mut quad = Rat::zero();
    for r in 0..m {
        s_add(&mut quad, proj[r].clone() * kat[r].clone());
    }
    kak_inv.clear();
    (kak_scalar - quad, proj.swap_remove(0))
}

fn s_add(acc: &mut Rat, v: Rat) {
    *acc += v;
}

fn rat_inverse(m: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut inv: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Rat::from(BigInt::from(1))
                    } else {
                        Rat::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .expect("singular rational matrix");
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = a[col][j].clone() / p.clone();
            inv[col][j] = inv[col][j].clone() / p.clone();
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let av = a[col][j].clone();
                let iv = inv[col][j].clone();
                a[r][j] = a[r][j].clone() - f.clone() * av;
                inv[r][j] = inv[r][j].clone() - f.clone() * iv;
            }
        }
    }
    inv
}

/// Undo-shear on the angle side for one reduction step: the unit lower
/// triangular map (φ, x) ↦ (φ, x + s·φ) in the (i, i+1) slot.
pub fn undo_shear(frame: &ShearFrame, i: usize, n: usize) -> DMatrix<f64> {
    let s = frame.s_coeffs[i];
    let mut m = DMatrix::<f64>::identity(n, n);
    m[(1, 0)] = s;
    m
}

/// The conjugate action map (I, y) ↦ (I − s·y, y): S⁻ᵗ of the angle map.
pub fn undo_shear_action(frame: &ShearFrame, i: usize, n: usize) -> DMatrix<f64> {
    let s = frame.s_coeffs[i];
    let mut m = DMatrix::<f64>::identity(n, n);
    m[(0, 1)] = -s;
    m
}
