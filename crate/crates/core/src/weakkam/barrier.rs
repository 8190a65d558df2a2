//! Barrier fields B = u⁻ − u⁺, their argmin components, and Mañé-set
//! sections with occupancy measurement.

use super::grid::{Grid, GridField};
use super::lax::{lax_oleinik, lax_oleinik_forward, SolverParams, Tonelli, WeakKamSolution};
use super::WkError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BarrierField {
    pub b: GridField,
    pub min_b: f64,
    pub theta: f64,
    /// Connected components of {B ≤ min B + θ}, as node-index lists.
    pub components: Vec<Vec<usize>>,
    /// Per-slice occupancy fractions of the θ-sublevel along the section
    /// dimension: the Mañé-set trace on each transversal circle.
    pub slice_occupancy: Vec<f64>,
    /// The least occupied section slice: the paper's circle Σ.
    pub min_occupancy: f64,
    pub covers_section: bool,
    pub alpha: f64,
}

/// Assemble a barrier from two solved weak KAM fields for the same class.
pub fn barrier_from_solutions(
    minus: &WeakKamSolution,
    plus: &WeakKamSolution,
    theta: f64,
    section_dim: usize,
) -> BarrierField {
    let grid = minus.u.grid.clone();
    let data: Vec<f64> = minus
        .u
        .data
        .iter()
        .zip(&plus.u.data)
        .map(|(&a, &b)| a - b)
        .collect();
    let mut b = GridField { grid, data };
    // match the free constants: the barrier vanishes on the Aubry set
    let min_b_raw = b.min();
    for v in &mut b.data {
        *v -= min_b_raw;
    }
    let components = sublevel_components(&b, theta);
    let (slice_occupancy, min_occupancy) = occupancy(&b, theta, section_dim);
    BarrierField {
        min_b: min_b_raw,
        theta,
        components,
        covers_section: min_occupancy >= 1.0,
        slice_occupancy,
        min_occupancy,
        b,
        alpha: 0.5 * (minus.alpha + plus.alpha),
    }
}

/// Solve both directions and assemble the barrier. The optional cover
/// doubles one grid dimension first (the index-arithmetic realization of
/// the finite covering trick).
pub fn barrier(
    l: &Tonelli,
    c: &[f64],
    grid: &Grid,
    p: &SolverParams,
    theta_mult: f64,
    section_dim: usize,
    cover: Option<usize>,
) -> Result<BarrierField, WkError> {
    let grid = match cover {
        Some(d) => grid.doubled(d),
        None => grid.clone(),
    };
    let minus = lax_oleinik(l, c, &grid, p)?;
    let plus = lax_oleinik_forward(l, c, &grid, p)?;
    let theta = theta_mult * p.tol.max(1e-12);
    Ok(barrier_from_solutions(&minus, &plus, theta, section_dim))
}

/// Connected components (periodic adjacency) of {B ≤ min B + θ};
/// B is already normalized to min 0.
pub fn sublevel_components(b: &GridField, theta: f64) -> Vec<Vec<usize>> {
    let grid = &b.grid;
    let n = b.data.len();
    let inset: Vec<bool> = b.data.iter().map(|&v| v <= theta).collect();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for start in 0..n {
        if !inset[start] || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut comp = Vec::new();
        seen[start] = true;
        while let Some(i) = stack.pop() {
            comp.push(i);
            let idx = grid.unflatten(i);
            for d in 0..grid.m() {
                for step in [-1i64, 1] {
                    let mut j = idx.clone();
                    j[d] = super::grid::wrap(idx[d] as i64 + step, grid.dims[d]);
                    let f = grid.flatten(&j);
                    if inset[f] && !seen[f] {
                        seen[f] = true;
                        stack.push(f);
                    }
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps.sort_by_key(|c| c[0]);
    comps
}

/// Occupancy of the θ-sublevel per slice along `section_dim`, and the
/// minimum over slices.
fn occupancy(b: &GridField, theta: f64, section_dim: usize) -> (Vec<f64>, f64) {
    let grid = &b.grid;
    let n_slices = grid.dims[section_dim];
    let mut hit = vec![0usize; n_slices];
    let mut tot = vec![0usize; n_slices];
    for i in 0..b.data.len() {
        let idx = grid.unflatten(i);
        let s = idx[section_dim];
        tot[s] += 1;
        if b.data[i] <= theta {
            hit[s] += 1;
        }
    }
    let frac: Vec<f64> = hit
        .iter()
        .zip(&tot)
        .map(|(&h, &t)| h as f64 / t as f64)
        .collect();
    let min = frac.iter().copied().fold(f64::INFINITY, f64::min);
    (frac, min)
}

/// Diameter of a component (bounding-box extents with periodic wrap).
pub fn component_diameter(grid: &Grid, comp: &[usize]) -> f64 {
    let m = grid.m();
    let mut d2 = 0.0;
    for d in 0..m {
        let n_d = grid.dims[d];
        let mut present = vec![false; n_d];
        for &i in comp {
            present[grid.unflatten(i)[d]] = true;
        }
        let mut best_gap = 0usize;
        let mut cur = 0usize;
        for t in 0..2 * n_d {
            if !present[t % n_d] {
                cur += 1;
                best_gap = best_gap.max(cur.min(n_d));
            } else {
                cur = 0;
            }
        }
        let extent = (n_d - best_gap) as f64 * grid.spacing(d);
        d2 += extent * extent;
    }
    d2.sqrt()
}
