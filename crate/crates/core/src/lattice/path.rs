//! Diophantine anchor pairs and admissible frequency paths.
//!
//! A path is a corner walk between two Diophantine vectors: segment m moves
//! coordinate m from its start approximant to a rational near the target
//! while all other coordinates sit at exact fractions. Every junction is a
//! complete-resonance corner, double resonant for both adjacent segments.

use super::segment::{dc_max_alpha, second_resonances, triple_resonance_gap, DcCert};
use super::{rat_f64, FrequencySegment, LatticeError, Rat, ResonanceVector};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Algebraic tail vectors of known Diophantine type: golden ratio for one
/// entry, plastic-number powers for two, powers of the root of x⁴ = x + 1
/// for three. Roots of integer polynomials keep the finite certificates
/// robust against the enumeration cutoff.
pub fn algebraic_tail(m: usize) -> Vec<f64> {
    match m {
        0 => vec![],
        1 => vec![(1.0 + 5f64.sqrt()) / 2.0],
        2 => {
            let rho = plastic_number();
            vec![rho, rho * rho]
        }
        3 => {
            let t = root_x4_x_1();
            vec![t, t * t, t * t * t]
        }
        _ => panic!("algebraic tails provided up to dimension 3"),
    }
}

fn plastic_number() -> f64 {
    let mut x = 1.3f64;
    for _ in 0..64 {
        x -= (x * x * x - x - 1.0) / (3.0 * x * x - 1.0);
    }
    x
}

fn root_x4_x_1() -> f64 {
    let mut x = 1.2f64;
    for _ in 0..64 {
        x -= (x * x * x * x - x - 1.0) / (4.0 * x * x * x - 1.0);
    }
    x
}

/// Smallest-denominator fraction inside [lo, hi], by Stern–Brocot descent.
pub fn simplest_in_interval(lo: f64, hi: f64) -> Rat {
    assert!(lo <= hi, "empty interval");
    fn rec(lo: f64, hi: f64, depth: usize) -> Rat {
        if lo <= 0.0 && hi >= 0.0 {
            return Rat::zero();
        }
        if hi < 0.0 {
            return -rec(-hi, -lo, depth);
        }
        // 0 < lo <= hi
        let c = lo.ceil();
        if c <= hi {
            return Rat::from_integer(BigInt::from(c as i128));
        }
        if depth > 512 {
            // interval finer than float resolution
            return Rat::from_float(0.5 * (lo + hi)).unwrap_or_else(Rat::zero);
        }
        let n = lo.floor();
        let sub = rec(1.0 / (hi - n), 1.0 / (lo - n), depth + 1);
        Rat::from_integer(BigInt::from(n as i128)) + sub.recip()
    }
    rec(lo, hi, 0)
}

/// Continued-fraction best approximation: the smallest-denominator fraction
/// with |p/q − x| < eps.
pub fn best_approx(x: f64, eps: f64) -> Rat {
    let mut e = eps;
    for _ in 0..8 {
        let r = simplest_in_interval(x - e, x + e);
        if (rat_f64(&r) - x).abs() < eps {
            return r;
        }
        e *= 0.5;
    }
    simplest_in_interval(x - eps * 0.25, x + eps * 0.25)
}

/// Perturb two frequency vectors within ρ so that all n+1 mixed vectors
/// (ω*f₁..ω*f_j, ω*i_{j+1}..ω*i_n) pass the finite DC test at level
/// (α, τ, K_check). Rejection sampling with a shrinking α demand.
#[allow(clippy::too_many_arguments)]
pub fn diophantine_pair<R: Rng>(
    wi: &[f64],
    wf: &[f64],
    rho: f64,
    tau: f64,
    k_check: i64,
    alpha_seed: f64,
    max_retries: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>, f64), LatticeError> {
    assert_eq!(wi.len(), wf.len());
    let n = wi.len();
    let mut alpha_target = alpha_seed;
    let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    let identical = wi == wf;
    for attempt in 0..max_retries {
        let (ci, cf): (Vec<f64>, Vec<f64>) = if attempt == 0 {
            (wi.to_vec(), wf.to_vec())
        } else if identical {
            // One vector suffices; perturb both the same way.
            let c: Vec<f64> = wi
                .iter()
                .map(|&x| x + rng.gen_range(-rho..rho) * 0.95)
                .collect();
            (c.clone(), c)
        } else {
            (
                wi.iter().map(|&x| x + rng.gen_range(-rho..rho) * 0.95).collect(),
                wf.iter().map(|&x| x + rng.gen_range(-rho..rho) * 0.95).collect(),
            )
        };
        let mut alpha_min = f64::INFINITY;
        for j in 0..=n {
            let mixed: Vec<f64> = (0..n)
                .map(|t| if t < j { cf[t] } else { ci[t] })
                .collect();
            alpha_min = alpha_min.min(dc_max_alpha(&mixed, tau, k_check));
            if alpha_min < alpha_target {
                break;
            }
        }
        if alpha_min >= alpha_target {
            return Ok((ci, cf, alpha_min.min(alpha_seed)));
        }
        if best.as_ref().map_or(true, |(_, _, b)| alpha_min > *b) {
            best = Some((ci, cf, alpha_min));
        }
        if attempt % 8 == 7 {
            alpha_target *= 0.5;
            if let Some((ci, cf, b)) = best.clone() {
                if b >= alpha_target {
                    return Ok((ci, cf, b.min(alpha_seed)));
                }
            }
        }
    }
    Err(LatticeError::DiophantineSearchFailed {
        retries: max_retries,
        alpha: alpha_target,
    })
}

/// One leg of an admissible path: coordinate `moving` varies over `interval`
/// while the other coordinates sit at the exact fractions in `fixed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathSegment {
    pub n: usize,
    pub moving: usize,
    /// Exact fraction per non-moving coordinate (indexed by coordinate).
    pub fixed: Vec<Option<Rat>>,
    /// The exact fraction the moving coordinate stops at.
    pub end_fraction: Rat,
    /// Diophantine anchor vector this leg shadows (mixed corner of the pair).
    pub anchor: Vec<f64>,
    pub interval: (f64, f64),
    pub dc: DcCert,
    /// Neighborhood radius available at each reduction level of this leg.
    pub mu_levels: Vec<f64>,
}

impl PathSegment {
    /// Canonical machinery view: coordinates reordered cyclically starting at
    /// the moving one; the first two non-moving coordinates supply P/Q and
    /// p/q; the rest enter as the (anchor-valued) tail.
    pub fn canonical(&self) -> FrequencySegment {
        let n = self.n;
        let order: Vec<usize> = (0..n).map(|t| (self.moving + t) % n).collect();
        let big = self.fixed[order[1]]
            .clone()
            .expect("non-moving coordinate must be rational");
        let small = self.fixed[order[2]]
            .clone()
            .expect("non-moving coordinate must be rational");
        let tail: Vec<f64> = order[3..].iter().map(|&c| self.anchor[c]).collect();
        FrequencySegment::canonical(big, small, tail, self.interval, self.dc)
    }

    /// Frequency at the given parameter value of the moving coordinate.
    pub fn frequency_at(&self, a: f64) -> Vec<f64> {
        (0..self.n)
            .map(|c| {
                if c == self.moving {
                    a
                } else {
                    rat_f64(self.fixed[c].as_ref().unwrap())
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Junction {
    /// The fully rational corner frequency.
    pub corner: Vec<Rat>,
    /// A second resonance of the earlier segment, annihilating the corner.
    pub k_before: ResonanceVector,
    /// A second resonance of the later segment, annihilating the corner.
    pub k_after: ResonanceVector,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissiblePath {
    pub n: usize,
    pub segments: Vec<PathSegment>,
    pub junctions: Vec<Junction>,
    /// Strictly decreasing hierarchy bounding the junction approximants.
    pub mu: Vec<f64>,
}

/// Inductive corner-walk construction of an admissible path from ω*ⁱ to ω*ᶠ.
///
/// `delta` assigns each candidate primary resonance its maximal allowable
/// perturbation threshold Δ(k′); the radii derived from it with K = δ^{-1/2}
/// bound how precisely each junction must approximate the Diophantine corner.
/// Coordinates already within `rho` of their target are not moved. Aborts
/// with the failing inequality when a required radius underflows float
/// resolution.
pub fn admissible_path(
    wi: &[f64],
    wf: &[f64],
    delta: &dyn Fn(&ResonanceVector) -> f64,
    rho: f64,
    tau: f64,
    k_check: i64,
) -> Result<AdmissiblePath, LatticeError> {
    let n = wi.len();
    if n < 3 {
        return Err(LatticeError::DimensionTooSmall(n));
    }
    let moving: Vec<usize> = (0..n).filter(|&c| (wi[c] - wf[c]).abs() >= rho).collect();
    if moving.is_empty() {
        return Ok(AdmissiblePath {
            n,
            segments: vec![],
            junctions: vec![],
            mu: vec![],
        });
    }

    // Start approximants for every coordinate (quality ρ/2, smallest q).
    let mut fixed: Vec<Option<Rat>> = wi
        .iter()
        .map(|&x| Some(best_approx(x, rho / 2.0)))
        .collect();

    let mut segments: Vec<PathSegment> = Vec::new();
    let mut junctions: Vec<Junction> = Vec::new();
    let mut mu_list: Vec<f64> = Vec::new();
    let mut mu_prev = f64::INFINITY;

    for (step, &m) in moving.iter().enumerate() {
        let anchor: Vec<f64> = (0..n)
            .map(|c| if moving[..step].contains(&c) { wf[c] } else { wi[c] })
            .collect();
        let a_start = if step == 0 {
            wi[m]
        } else {
            rat_f64(fixed[m].as_ref().unwrap())
        };

        let mut fixed_seg = fixed.clone();
        fixed_seg[m] = None;
        let mut seg = PathSegment {
            n,
            moving: m,
            fixed: fixed_seg,
            end_fraction: Rat::zero(),
            anchor: anchor.clone(),
            interval: (a_start.min(wf[m]), a_start.max(wf[m])),
            dc: DcCert { alpha: 0.0, tau, k_check },
            mu_levels: vec![],
        };
        seg.dc.alpha = dc_max_alpha(&seg.canonical().tail_values(), tau, k_check);

        let canon = seg.canonical();
        let kp = canon.primary()?;
        let dl = 0.9 * delta(&kp).min(0.25);
        if dl <= 0.0 {
            return Err(LatticeError::PathConstruction(format!(
                "Delta threshold for k'={kp} is not positive"
            )));
        }
        // K = δ^{-1/2}, capped at the caller's enumeration budget. The radius
        // uses the exactly measured finite-K gap; the analytic formula is a
        // strict lower bound for it but underflows floats at these sizes.
        let kmax = (dl.powf(-0.5).ceil() as i64).clamp(1, k_check);
        let mu0 = super::segment::neighborhood_radius_measured(&canon, kmax, wf[m])?;
        seg.mu_levels.push(mu0);

        let mu_here = mu0.min(0.5 * mu_prev).min(rho);
        if mu_here < 1e-13 {
            return Err(LatticeError::PathConstruction(format!(
                "required junction radius {mu_here:.3e} for coordinate {m} underflows float \
                 resolution; |p/q - {:.6}| < mu cannot be realized",
                wf[m]
            )));
        }
        let end = best_approx(wf[m], mu_here);
        mu_list.push(mu_here);
        mu_prev = mu_here;
        seg.interval = (a_start.min(rat_f64(&end)), a_start.max(rat_f64(&end)));
        seg.end_fraction = end.clone();
        segments.push(seg);
        fixed[m] = Some(end);

        if step + 1 < moving.len() {
            let corner: Vec<Rat> = (0..n)
                .map(|c| fixed[c].clone().expect("corner must be fully rational"))
                .collect();
            let (kb, ka) = corner_resonances(&corner, m, moving[step + 1])?;
            junctions.push(Junction { corner, k_before: kb, k_after: ka });
        }
    }

    let path = AdmissiblePath { n, segments, junctions, mu: mu_list };
    verify_path(&path, wf)?;
    Ok(path)
}

/// Exact second-resonance witnesses at a rational corner: integer vectors
/// annihilating the corner, supported on the moved (resp. next) coordinate
/// and one other coordinate.
fn corner_resonances(
    corner: &[Rat],
    moved: usize,
    next: usize,
) -> Result<(ResonanceVector, ResonanceVector), LatticeError> {
    let n = corner.len();
    let pick_other = |avoid: usize| (0..n).find(|&c| c != avoid).unwrap();
    let make = |c1: usize, c2: usize| -> Result<ResonanceVector, LatticeError> {
        let r1 = &corner[c1];
        let r2 = &corner[c2];
        let mut k = vec![0i64; n];
        if r1.is_zero() {
            k[c1] = 1;
        } else if r2.is_zero() {
            k[c2] = 1;
        } else {
            // k₁·r₁ + k₂·r₂ = 0 with k₁ = n₂d₁/g, k₂ = −n₁d₂/g.
            let n1d2 = r1.numer() * r2.denom();
            let n2d1 = r2.numer() * r1.denom();
            let g = super::big_gcd(&n1d2, &n2d1);
            k[c1] = (&n2d1 / &g).to_i64().ok_or(LatticeError::BadDenominator)?;
            k[c2] = -(&n1d2 / &g).to_i64().ok_or(LatticeError::BadDenominator)?;
        }
        let k = ResonanceVector::new(k)?.primitive_normal();
        debug_assert!(k.dot_rat(corner).is_zero());
        Ok(k)
    };
    Ok((make(moved, pick_other(moved))?, make(next, pick_other(next))?))
}

/// Re-check the DefAdm inequalities and junction annihilation exactly.
fn verify_path(path: &AdmissiblePath, wf: &[f64]) -> Result<(), LatticeError> {
    for w in path.mu.windows(2) {
        if w[1] >= w[0] {
            return Err(LatticeError::PathConstruction(format!(
                "mu hierarchy not strictly decreasing: {} then {}",
                w[0], w[1]
            )));
        }
    }
    for (i, seg) in path.segments.iter().enumerate() {
        if (rat_f64(&seg.end_fraction) - wf[seg.moving]).abs() >= path.mu[i] {
            return Err(LatticeError::PathConstruction(format!(
                "segment {i}: |end - omega*f_{}| >= mu_{i}",
                seg.moving
            )));
        }
    }
    for j in &path.junctions {
        if !j.k_before.dot_rat(&j.corner).is_zero() || !j.k_after.dot_rat(&j.corner).is_zero() {
            return Err(LatticeError::PathConstruction(
                "junction witness fails exact annihilation".into(),
            ));
        }
    }
    Ok(())
}

/// Gap verification over every leg of the path: enumerate double resonances
/// of the canonical view and check the triple-resonance bound exhaustively.
pub fn verify_path_gaps(path: &AdmissiblePath, kmax: i64) -> Result<bool, LatticeError> {
    for seg in &path.segments {
        let canon = seg.canonical();
        let kp = canon.primary()?;
        for dres in second_resonances(&canon, kmax)? {
            let rep = triple_resonance_gap(&canon, &kp, &dres, kmax)?;
            if !rep.verified {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
