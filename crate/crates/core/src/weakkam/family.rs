//! Volume parametrization of weak KAM families on one alpha level, with the
//! 1/3-Hölder cone diagnostics, and the slice-to-global extension check.

use super::grid::GridField;
use super::lax::WeakKamSolution;
use super::WkError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeParametrization {
    /// σ per member, strictly monotone along the family order.
    pub sigma: Vec<f64>,
    /// sup-norm distances ‖U_i − U_j‖ for consecutive pairs.
    pub consecutive_du: Vec<f64>,
    /// Common Lipschitz constant of the lifted solutions.
    pub lipschitz_d: f64,
    /// Fitted Hölder exponent from log‖ΔU‖ against log|Δσ|.
    pub exponent: f64,
    /// min over pairs of |σ−σ′| − (π/6d²)‖ΔU‖³ (≥ 0 means the cone
    /// inequality holds pairwise).
    pub cone_margin: f64,
    pub base_point: usize,
}

/// Lift u to U = u + ⟨c,x⟩ over the fundamental box, normalized at the base
/// node.
fn lift(u: &GridField, c: &[f64], base: usize) -> Vec<f64> {
    let grid = &u.grid;
    let mut out = Vec::with_capacity(u.data.len());
    for i in 0..u.data.len() {
        let x = grid.node_coord(&grid.unflatten(i));
        let lin: f64 = c.iter().zip(&x).map(|(&ci, &xi)| ci * xi).sum();
        out.push(u.data[i] + lin);
    }
    let b = out[base];
    for v in &mut out {
        *v -= b;
    }
    out
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Order solutions along the family, normalize at a common base point, and
/// parametrize by volume σ_i = ∫(U_i − U_0). The base point is chosen among
/// a few candidates to make the family totally ordered; an ordering
/// violation is reported with the offending pair.
pub fn volume_parametrize(family: &[WeakKamSolution]) -> Result<VolumeParametrization, WkError> {
    assert!(family.len() >= 2);
    let grid = &family[0].u.grid;
    let cell: f64 = (0..grid.m()).map(|d| grid.spacing(d)).product();
    // candidate base points: spread nodes
    let n = grid.len();
    let candidates: Vec<usize> = (0..8).map(|t| (t * n) / 8).collect();
    let mut best: Option<(usize, Vec<f64>, Vec<Vec<f64>>)> = None;
    let mut violation = (0usize, 1usize);
    'bases: for &base in &candidates {
        let lifted: Vec<Vec<f64>> = family
            .iter()
            .map(|s| lift(&s.u, &s.c, base))
            .collect();
        let sigma: Vec<f64> = lifted
            .iter()
            .map(|u| u.iter().zip(&lifted[0]).map(|(&a, &b)| (a - b)).sum::<f64>() * cell)
            .collect();
        for i in 1..sigma.len() {
            if sigma[i] <= sigma[i - 1] {
                violation = (i - 1, i);
                continue 'bases;
            }
        }
        best = Some((base, sigma, lifted));
        break;
    }
    let Some((base, sigma, lifted)) = best else {
        return Err(WkError::OrderingViolation(violation.0, violation.1));
    };

    let lipschitz_d = family
        .iter()
        .map(|s| {
            let mut u = s.u.clone();
            // Lipschitz constant of the LIFTED solution
            let g = s.c.iter().map(|&x| x.abs()).fold(0.0, f64::max);
            u.data = lift(&s.u, &s.c, base);
            u.lipschitz().max(g)
        })
        .fold(0.0f64, f64::max);

    let mut consecutive_du = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut cone_margin = f64::INFINITY;
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let du = sup_dist(&lifted[i], &lifted[j]);
            let ds = (sigma[j] - sigma[i]).abs();
            if j == i + 1 {
                consecutive_du.push(du);
                if du > 0.0 && ds > 0.0 {
                    xs.push(ds.ln());
                    ys.push(du.ln());
                }
            }
            let cone = std::f64::consts::PI / (6.0 * lipschitz_d * lipschitz_d) * du.powi(3);
            cone_margin = cone_margin.min(ds - cone);
        }
    }
    // slope of log‖ΔU‖ against log|Δσ|
    let exponent = regression_slope(&xs, &ys);
    Ok(VolumeParametrization {
        sigma,
        consecutive_du,
        lipschitz_d,
        exponent,
        cone_margin,
        base_point: base,
    })
}

pub fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtendReport {
    pub slice_exponent: f64,
    pub global_exponent: f64,
    pub degenerate: bool,
    /// global ≥ slice/2 − 0.05, the numerical rendering of the extension
    /// theorem (2κ on the invariant slice implies κ globally).
    pub extension_holds: bool,
}

/// Measure the Hölder exponents of a family restricted to an invariant slice
/// and of the full family, and compare them per the extension principle.
pub fn holder_extend_check(
    base: &VolumeParametrization,
    full: &VolumeParametrization,
) -> ExtendReport {
    let degenerate = base.consecutive_du.iter().all(|&d| d == 0.0)
        || full.consecutive_du.iter().all(|&d| d == 0.0)
        || base.exponent.is_nan()
        || full.exponent.is_nan();
    let extension_holds =
        !degenerate && full.exponent >= 0.5 * base.exponent - 0.05;
    ExtendReport {
        slice_exponent: base.exponent,
        global_exponent: full.exponent,
        degenerate,
        extension_holds,
    }
}
