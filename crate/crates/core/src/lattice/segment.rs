//! Frequency segments (a, P/Q, p/q, ω̂*), their double resonances, and the
//! quantitative gap bounds that keep the line away from triple resonance.

use super::unimodular::egcd;
use super::{rat_f64, LatticeError, Rat, ResonanceVector, TailForm, UnimodularMatrix};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

/// Finite Diophantine certificate: |⟨(1,v),k⟩| ≥ α/|k|₁^τ was checked for all
/// integer k with 0 < |k|₁ ≤ k_check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcCert {
    pub alpha: f64,
    pub tau: f64,
    pub k_check: i64,
}

/// A frequency line segment in projective form (a, rationals…, tail…), the
/// first rational playing P/Q and the second p/q.
///
/// Tail entries index into a shared basis of algebraically independent
/// irrational constants, so linear-form arithmetic stays exact across
/// reduction steps that consume tail entries one at a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySegment {
    /// Exact fractions occupying entries 1..=rationals.len().
    pub rationals: Vec<Rat>,
    /// Basis indices of the trailing irrational entries.
    pub tail_ids: Vec<usize>,
    /// The shared irrational constants.
    pub basis: Vec<f64>,
    /// Parameter interval for the moving leading entry.
    pub interval: (f64, f64),
    /// Certificate for the tail vector (entries tail_ids, in order).
    pub dc: DcCert,
    /// Lower bound on the projective normalization λ_a over the interval.
    /// The bound formulas take it as an input; it depends on h and the
    /// energy level, which the lattice layer does not know.
    pub inf_lambda: f64,
}

impl FrequencySegment {
    /// Canonical segment with tail basis equal to the tail itself.
    pub fn canonical(
        big: Rat,
        small: Rat,
        tail: Vec<f64>,
        interval: (f64, f64),
        dc: DcCert,
    ) -> Self {
        let tail_ids = (0..tail.len()).collect();
        FrequencySegment {
            rationals: vec![big, small],
            tail_ids,
            basis: tail,
            interval,
            dc,
            inf_lambda: 1.0,
        }
    }

    pub fn n(&self) -> usize {
        1 + self.rationals.len() + self.tail_ids.len()
    }

    pub fn big_fraction(&self) -> &Rat {
        &self.rationals[0]
    }

    pub fn small_fraction(&self) -> &Rat {
        &self.rationals[1]
    }

    pub fn tail_values(&self) -> Vec<f64> {
        self.tail_ids.iter().map(|&i| self.basis[i]).collect()
    }

    /// ⟨k, ω_a⟩ as an affine function of a: returns (k₁, form) with
    /// ⟨k, ω_a⟩ = k₁·a + form, coefficients over the shared basis.
    pub fn pairing(&self, k: &ResonanceVector) -> (i64, TailForm) {
        assert_eq!(k.dim(), self.n());
        let mut form = TailForm::zero(self.basis.len());
        for (i, r) in self.rationals.iter().enumerate() {
            form.c0 += Rat::from(BigInt::from(k.0[1 + i])) * r;
        }
        for (j, &bi) in self.tail_ids.iter().enumerate() {
            let idx = 1 + self.rationals.len() + j;
            form.coeffs[bi] += Rat::from(BigInt::from(k.0[idx]));
        }
        (k.0[0], form)
    }

    /// ⟨k, ω_a⟩ with the parameter itself an exact linear form.
    pub fn pairing_at(&self, k: &ResonanceVector, a_form: &TailForm) -> TailForm {
        let (k1, form) = self.pairing(k);
        form.add(&a_form.scale(&Rat::from(BigInt::from(k1))))
    }

    /// Frequency vector at parameter a (projective representative, no λ scaling).
    pub fn at(&self, a: f64) -> Vec<f64> {
        let mut v = vec![a];
        v.extend(self.rationals.iter().map(rat_f64));
        v.extend(self.tail_values());
        v
    }

    /// The primary resonance k′ of this segment.
    pub fn primary(&self) -> Result<ResonanceVector, LatticeError> {
        super::primary_resonance(self.big_fraction(), self.small_fraction(), self.n())
    }

    pub fn m_prime(&self) -> Result<UnimodularMatrix, LatticeError> {
        build_m_prime(&self.primary()?, self.big_fraction(), self.small_fraction())
    }

    /// qQ, the denominator product entering every gap bound.
    pub fn q_big_q(&self) -> f64 {
        let q_cap = self.big_fraction().denom().to_f64().unwrap();
        let q = self.small_fraction().denom().to_f64().unwrap();
        q_cap * q
    }
}

/// The matrix M′ of the frequency segment: unit first row, k′ as second row,
/// the extended-Euclid row (0, r, s, 0…) third, identity elsewhere.
/// M′·(a, P/Q, p/q, ω̂)ᵗ = (a, 0, d/(qQ), ω̂)ᵗ exactly.
pub fn build_m_prime(
    kp: &ResonanceVector,
    big: &Rat,
    small: &Rat,
) -> Result<UnimodularMatrix, LatticeError> {
    let n = kp.dim();
    let expect = super::primary_resonance(big, small, n)?;
    if *kp != expect {
        return Err(LatticeError::WrongPrimary(format!("{kp}")));
    }
    let q_cap = big.denom().to_i64().ok_or(LatticeError::BadDenominator)?;
    let p_cap = big.numer().to_i64().ok_or(LatticeError::BadDenominator)?;
    let q = small.denom().to_i64().ok_or(LatticeError::BadDenominator)?;
    let p = small.numer().to_i64().ok_or(LatticeError::BadDenominator)?;
    let qp = q_cap * p;
    let qcap_p = q * p_cap;
    // s·Qp + r·qP = d
    let (d, s, r) = egcd(qp, qcap_p);
    debug_assert_eq!(s * qp + r * qcap_p, d);
    let mut rows = vec![vec![0i64; n]; n];
    rows[0][0] = 1;
    rows[1] = kp.0.clone();
    rows[2][1] = r;
    rows[2][2] = s;
    for (i, row) in rows.iter_mut().enumerate().skip(3) {
        row[i] = 1;
    }
    UnimodularMatrix::new(rows)
}

/// Enumerate integer vectors k ∈ Zⁿ with 0 < |k|₁ ≤ kmax and first nonzero
/// entry positive (one representative per ±pair).
pub fn enumerate_l1_ball(n: usize, kmax: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; n];
    fn rec(cur: &mut Vec<i64>, pos: usize, budget: i64, any: bool, out: &mut Vec<Vec<i64>>) {
        let n = cur.len();
        if pos == n {
            if any {
                out.push(cur.clone());
            }
            return;
        }
        let lo = if any { -budget } else { 0 };
        for v in lo..=budget {
            cur[pos] = v;
            rec(cur, pos + 1, budget - v.abs(), any || v != 0, out);
        }
        cur[pos] = 0;
    }
    rec(&mut cur, 0, kmax, false, &mut out);
    out
}

/// Does |⟨(1,v), k⟩| ≥ α/|k|₁^τ hold for all 0 < |k|₁ ≤ kmax?
pub fn dc_check(v: &[f64], alpha: f64, tau: f64, kmax: i64) -> bool {
    dc_max_alpha(v, tau, kmax) >= alpha
}

/// The largest α for which (1,v) passes the DC test up to |k|₁ ≤ kmax:
/// min over k of |⟨(1,v),k⟩|·|k|₁^τ.
pub fn dc_max_alpha(v: &[f64], tau: f64, kmax: i64) -> f64 {
    let d = v.len() + 1;
    let mut best = f64::INFINITY;
    let mut cur = vec![0i64; d];
    fn rec(
        v: &[f64],
        cur: &mut Vec<i64>,
        pos: usize,
        budget: i64,
        acc: f64,
        norm: i64,
        any: bool,
        tau: f64,
        best: &mut f64,
    ) {
        let d = cur.len();
        if pos == d {
            if any {
                let val = acc.abs() * (norm as f64).powf(tau);
                if val < *best {
                    *best = val;
                }
            }
            return;
        }
        let w = if pos == 0 { 1.0 } else { v[pos - 1] };
        let lo = if any { -budget } else { 0 };
        for kv in lo..=budget {
            cur[pos] = kv;
            rec(
                v,
                cur,
                pos + 1,
                budget - kv.abs(),
                acc + kv as f64 * w,
                norm + kv.abs(),
                any || kv != 0,
                tau,
                best,
            );
        }
        cur[pos] = 0;
    }
    rec(v, &mut cur, 0, kmax, 0.0, 0, false, tau, &mut best);
    best
}

/// One detected double resonance: the parameter value (exact linear form over
/// the segment's shared basis, plus its float value) and the primitive second
/// resonance vector.
#[derive(Debug, Clone)]
pub struct DoubleResonance {
    pub a: f64,
    pub a_form: TailForm,
    pub k: ResonanceVector,
}

/// Enumerate double-resonant points of the segment: primitive k ∉ span{k′},
/// |k|₁ ≤ K, with ⟨k, ω_a″⟩ = 0 for some a″ in the interval. Sorted by a″,
/// ties by ℓ1 norm then lexicographically.
pub fn second_resonances(
    seg: &FrequencySegment,
    kmax: i64,
) -> Result<Vec<DoubleResonance>, LatticeError> {
    let kp = seg.primary()?;
    let n = seg.n();
    let mut found: Vec<DoubleResonance> = Vec::new();
    let mut seen: std::collections::HashSet<Vec<i64>> = std::collections::HashSet::new();
    for kv in enumerate_l1_ball(n, kmax) {
        let k = ResonanceVector(kv).primitive_normal();
        if in_span_one(&k, &kp) || !seen.insert(k.0.clone()) {
            continue;
        }
        let (k1, form) = seg.pairing(&k);
        if k1 == 0 {
            // a-independent pairing; nonzero off span{k′} by the DC tail.
            continue;
        }
        let a_form = form.scale(&Rat::new(BigInt::from(-1), BigInt::from(k1)));
        let a = a_form.eval(&seg.basis);
        if a >= seg.interval.0 && a <= seg.interval.1 {
            found.push(DoubleResonance { a, a_form, k });
        }
    }
    found.sort_by(|x, y| {
        x.a.partial_cmp(&y.a)
            .unwrap()
            .then(x.k.norm_l1().cmp(&y.k.norm_l1()))
            .then(x.k.0.cmp(&y.k.0))
    });
    Ok(found)
}

/// Integer span membership for a single generator: k = m·k′ for integer m.
pub fn in_span_one(k: &ResonanceVector, kp: &ResonanceVector) -> bool {
    let i = match kp.0.iter().position(|&e| e != 0) {
        Some(i) => i,
        None => return false,
    };
    if k.0[i] % kp.0[i] != 0 {
        return false;
    }
    let m = k.0[i] / kp.0[i];
    k.0.iter().zip(&kp.0).all(|(&a, &b)| a == m * b)
}

/// Integer span membership for two generators: k = m₁k′ + m₂k″ over Z.
pub fn in_span_two(k: &ResonanceVector, k1: &ResonanceVector, k2: &ResonanceVector) -> bool {
    let n = k.dim();
    for i in 0..n {
        for j in i + 1..n {
            let det = k1.0[i] * k2.0[j] - k1.0[j] * k2.0[i];
            if det == 0 {
                continue;
            }
            let num1 = k.0[i] * k2.0[j] - k.0[j] * k2.0[i];
            let num2 = k1.0[i] * k.0[j] - k1.0[j] * k.0[i];
            if num1 % det != 0 || num2 % det != 0 {
                return false;
            }
            let (m1, m2) = (num1 / det, num2 / det);
            return k
                .0
                .iter()
                .enumerate()
                .all(|(t, &e)| e == m1 * k1.0[t] + m2 * k2.0[t]);
        }
    }
    in_span_one(k, k1) || in_span_one(k, k2)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapReport {
    pub bound: f64,
    pub verified: bool,
    /// Worst |⟨k, ω_a″⟩| observed off the module, and the k achieving it.
    pub worst_value: f64,
    pub worst_k: Option<Vec<i64>>,
}

/// The triple-resonance gap at a double-resonance point:
/// bound = α·infλ / (2^τ (qQ)^{τ+1} (‖M′‖∞ K)^{2τ+1}), exhaustively verified
/// against all k ∉ span_Z{k′,k″} with |k|₁ ≤ K. Failure sets verified=false
/// (a bad tail certificate), it does not raise.
pub fn triple_resonance_gap(
    seg: &FrequencySegment,
    kp: &ResonanceVector,
    kpp: &DoubleResonance,
    kmax: i64,
) -> Result<GapReport, LatticeError> {
    let paired = seg.pairing_at(&kpp.k, &kpp.a_form);
    assert!(
        paired.is_exact_zero(),
        "declared a'' does not annihilate k''"
    );

    let m_prime = build_m_prime(kp, seg.big_fraction(), seg.small_fraction())?;
    let bound = gap_bound(seg, &m_prime, kmax);

    let mut verified = true;
    let mut worst_value = f64::INFINITY;
    let mut worst_k = None;
    for kv in enumerate_l1_ball(seg.n(), kmax) {
        let k = ResonanceVector(kv);
        if in_span_two(&k, kp, &kpp.k) {
            continue;
        }
        let val_form = seg.pairing_at(&k, &kpp.a_form);
        let val = val_form.eval(&seg.basis).abs() * seg.inf_lambda;
        if val < worst_value {
            worst_value = val;
            worst_k = Some(k.0.clone());
        }
        if val < bound {
            verified = false;
        }
    }
    Ok(GapReport {
        bound,
        verified,
        worst_value,
        worst_k,
    })
}

fn gap_bound(seg: &FrequencySegment, m_prime: &UnimodularMatrix, kmax: i64) -> f64 {
    let tau = seg.dc.tau;
    let alpha = seg.dc.alpha;
    let qq = seg.q_big_q();
    let mnorm = m_prime.norm_inf();
    alpha * seg.inf_lambda
        / (2f64.powf(tau) * qq.powf(tau + 1.0) * (mnorm * kmax as f64).powf(2.0 * tau + 1.0))
}

/// Radius of the neighborhood of the frequency line inside which every
/// |k|₁ ≤ K off span{k′} keeps a quantitative non-resonance:
/// μ = (1/2nK) · α·infλ / (2^τ (qQ)^{τ+1} (‖M′‖∞K)^{2τ+1}).
pub fn neighborhood_radius(seg: &FrequencySegment, kmax: i64) -> Result<f64, LatticeError> {
    let m_prime = seg.m_prime()?;
    let n = seg.n() as f64;
    Ok(gap_bound(seg, &m_prime, kmax) / (2.0 * n * kmax as f64))
}

/// Same neighborhood radius but with the worst-case analytic gap replaced by
/// the exactly measured one at a given parameter value: the second-smallest
/// resonance value there (the smallest belongs to the incoming double
/// resonance class, which the lemma excludes), divided by 2nK. The analytic
/// bound always lower-bounds the measured gap, so this radius is valid
/// wherever the formula one is, while staying above float resolution at
/// desk scale.
pub fn neighborhood_radius_measured(
    seg: &FrequencySegment,
    kmax: i64,
    at: f64,
) -> Result<f64, LatticeError> {
    let kp = seg.primary()?;
    let w = seg.at(at);
    let mut smallest = f64::INFINITY;
    let mut arg_smallest: Option<ResonanceVector> = None;
    let mut vals: Vec<(f64, ResonanceVector)> = Vec::new();
    for kv in enumerate_l1_ball(seg.n(), kmax) {
        let k = ResonanceVector(kv);
        if in_span_one(&k.primitive_normal(), &kp) {
            continue;
        }
        let val: f64 =
            k.0.iter().zip(&w).map(|(&ki, wi)| ki as f64 * wi).sum::<f64>().abs()
                * seg.inf_lambda;
        if val < smallest {
            smallest = val;
            arg_smallest = Some(k.primitive_normal());
        }
        vals.push((val, k));
    }
    let witness = arg_smallest.ok_or_else(|| {
        LatticeError::PathConstruction("no resonance candidates enumerated".into())
    })?;
    let mut gap = f64::INFINITY;
    for (val, k) in vals {
        if in_span_two(&k, &kp, &witness) {
            continue;
        }
        gap = gap.min(val);
    }
    if !gap.is_finite() || gap <= 0.0 {
        return Err(LatticeError::PathConstruction(
            "measured resonance gap degenerate".into(),
        ));
    }
    Ok(gap / (2.0 * seg.n() as f64 * kmax as f64))
}

/// One step of reduction of order: the reduced line is
/// (a, d/(qQ), p̄/q̄, remaining tail) where p̄/q̄ is a rational approximation
/// of the first tail entry. Returns the reduced segment and the M′ used.
pub fn reduce_segment(
    seg: &FrequencySegment,
    approx: Rat,
    new_interval: (f64, f64),
    new_dc: DcCert,
) -> Result<(FrequencySegment, UnimodularMatrix), LatticeError> {
    assert!(!seg.tail_ids.is_empty(), "no tail entry left to rationalize");
    let m_prime = seg.m_prime()?;
    let d_over_qq = {
        let row = &m_prime.rows[2];
        Rat::from(BigInt::from(row[1])) * seg.big_fraction()
            + Rat::from(BigInt::from(row[2])) * seg.small_fraction()
    };
    let reduced = FrequencySegment {
        rationals: vec![d_over_qq, approx],
        tail_ids: seg.tail_ids[1..].to_vec(),
        basis: seg.basis.clone(),
        interval: new_interval,
        dc: new_dc,
        inf_lambda: seg.inf_lambda,
    };
    Ok((reduced, m_prime))
}

/// Descend a second resonance through one reduction step: returns the reduced
/// vector k̄″ = π₋₂(k″M′⁻¹) together with the exact shifted parameter form
/// ā″ such that ⟨k̄″, ω̄_ā″⟩ = 0 holds exactly for the reduced segment.
pub fn descend_resonance(
    seg: &FrequencySegment,
    reduced: &FrequencySegment,
    m_prime: &UnimodularMatrix,
    dres: &DoubleResonance,
) -> Result<(ResonanceVector, TailForm), LatticeError> {
    let tilde = m_prime.inverse().row_mul(&dres.k);
    if tilde.0[0] == 0 {
        return Err(LatticeError::ZeroVector);
    }
    let mut bar: Vec<i64> = Vec::with_capacity(tilde.dim() - 1);
    bar.push(tilde.0[0]);
    bar.extend_from_slice(&tilde.0[2..]);
    let bar = ResonanceVector(bar);
    // In the reduced layout the rationalized tail entry sits at position 2,
    // so k̄ pairs p̄/q̄ with coefficient bar[2] where the unreduced line had
    // the basis element t₁. The parameter shift compensating the swap is
    // ā″ = a″ + (k̄₂/k̄₁)(t₁ − p̄/q̄), exact over the shared basis.
    let t1_id = seg.tail_ids[0];
    let approx = reduced.small_fraction();
    let mut t1_minus = TailForm::basis(t1_id, seg.basis.len());
    t1_minus.c0 = -approx.clone();
    let ratio = Rat::new(BigInt::from(bar.0[2]), BigInt::from(bar.0[0]));
    let a_bar = dres.a_form.add(&t1_minus.scale(&ratio));
    Ok((bar, a_bar))
}
