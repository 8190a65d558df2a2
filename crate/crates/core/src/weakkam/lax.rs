//! Discrete Lax–Oleinik value iteration: the weak KAM solver.
//!
//! One backward step of size Δt costs
//!   (Tu)(x) = min_Δ [ u(x−Δ) + ⟨A⁻¹Δ,Δ⟩/(2Δt) − ⟨c,Δ⟩ − Δt·(V(x)+V(x−Δ))/2 ]
//! with the displacement window |Δ_d| ≤ v_max·Δt. The kinetic and 1-form
//! parts are exact on straight segments; the trapezoid rule on V keeps the
//! one-step cost separable per axis for diagonal kinetic forms, which turns
//! the m-dimensional minimization into m sequential line sweeps.
//! α(c) is the Cesàro decrement of the normalized iteration.

use super::grid::{wrap, Grid, GridField};
use super::WkError;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::sync::Arc;

/// Mechanical Tonelli Lagrangian L(x,v,t) = ½⟨A⁻¹v,v⟩ − V(x,t) on T^m,
/// optionally time-periodic (time is then the last grid dimension).
#[derive(Clone)]
pub struct Tonelli {
    pub m: usize,
    /// Kinetic matrix A of the Hamiltonian ½⟨Ay,y⟩ + V.
    pub a: DMatrix<f64>,
    pub a_inv: DMatrix<f64>,
    /// Set when A is diagonal; enables the separable fast path.
    pub a_diag: Option<Vec<f64>>,
    pub potential: Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>,
    pub time_periodic: bool,
}

impl Tonelli {
    pub fn mechanical(a: DMatrix<f64>, potential: Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>) -> Result<Self, WkError> {
        let m = a.nrows();
        let a_inv = a.clone().try_inverse().ok_or(WkError::NotTonelli)?;
        if nalgebra::Cholesky::new(a.clone()).is_none() {
            return Err(WkError::NotTonelli);
        }
        let mut diag = Some(Vec::with_capacity(m));
        'outer: for i in 0..m {
            for j in 0..m {
                if i != j && a[(i, j)] != 0.0 {
                    diag = None;
                    break 'outer;
                }
            }
        }
        if let Some(d) = &mut diag {
            for i in 0..m {
                d.push(a[(i, i)]);
            }
        }
        Ok(Tonelli { m, a_inv, a_diag: diag, a, potential, time_periodic: false })
    }

    pub fn time_periodic(mut self) -> Self {
        self.time_periodic = true;
        self
    }

    /// The reversed Lagrangian L̂(x,v,t) = L(x,−v,−t); backward solutions of
    /// L̂ at class −c are −(forward solutions of L at c).
    pub fn reversed(&self) -> Tonelli {
        let pot = self.potential.clone();
        Tonelli {
            m: self.m,
            a: self.a.clone(),
            a_inv: self.a_inv.clone(),
            a_diag: self.a_diag.clone(),
            potential: Arc::new(move |x: &[f64], t: f64| pot(x, -t)),
            time_periodic: self.time_periodic,
        }
    }

    pub fn lagrangian(&self, x: &[f64], v: &[f64], t: f64) -> f64 {
        let mut kin = 0.0;
        for i in 0..self.m {
            for j in 0..self.m {
                kin += 0.5 * self.a_inv[(i, j)] * v[i] * v[j];
            }
        }
        kin - (self.potential)(x, t)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverParams {
    pub dt: f64,
    pub v_max: f64,
    pub tol: f64,
    pub max_iters: usize,
    /// Extra continuous refinement evaluations per line node.
    pub refine: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { dt: 0.12, v_max: 3.0, tol: 1e-7, max_iters: 6000, refine: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Backward,
    Forward,
}
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct WeakKamSolution {
    pub u: GridField,
    pub c: Vec<f64>,
    pub alpha: f64,
    /// Sup-norm defect of the discrete fixed-point equation, per unit time.
    pub residual: f64,
    pub iterations: usize,
    pub direction: Direction,
    pub converged: bool,
}

struct Sweeper<'a> {
    l: &'a Tonelli,
    grid: &'a Grid,
    p: SolverParams,
    c: Vec<f64>,
    /// V on grid nodes (per time slice for time-periodic systems).
    v_grid: Vec<f64>,
    config_dims: usize,
    nt: usize,
}

impl<'a> Sweeper<'a> {
    fn new(l: &'a Tonelli, c: &[f64], grid: &'a Grid, p: SolverParams) -> Self {
        let config_dims = l.m;
        let nt = if l.time_periodic { *grid.dims.last().unwrap() } else { 1 };
        assert_eq!(
            grid.m(),
            config_dims + if l.time_periodic { 1 } else { 0 },
            "grid dimension must match the Lagrangian"
        );
        let mut v_grid = vec![0.0; grid.len()];
        for (i, v) in v_grid.iter_mut().enumerate() {
            let idx = grid.unflatten(i);
            let xy = grid.node_coord(&idx);
            let (x, t) = if l.time_periodic {
                (&xy[..config_dims], xy[config_dims])
            } else {
                (&xy[..], 0.0)
            };
            *v = (l.potential)(x, t);
        }
        Sweeper { l, grid, p, c: c.to_vec(), v_grid, config_dims, nt }
    }

    /// One full application of the discrete operator. Returns (mean, min,
    /// max) of the pointwise decrement u − Tu.
    fn step(&self, u: &mut Vec<f64>) -> (f64, f64, f64) {
        let dt = if self.l.time_periodic {
            self.grid.spacing(self.grid.m() - 1)
        } else {
            self.p.dt
        };
        let new = if self.l.time_periodic {
            self.step_time_periodic(u, dt)
        } else if self.l.a_diag.is_some() {
            self.step_separable(u, dt, None)
        } else {
            self.step_window(u, dt)
        };
        let mut sum = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in u.iter().zip(&new) {
            let d = a - b;
            sum += d;
            lo = lo.min(d);
            hi = hi.max(d);
        }
        let mean = sum / u.len() as f64;
        *u = new;
        (mean / dt, lo / dt, hi / dt)
    }

    /// Separable sweep for diagonal kinetic forms: sequential line
    /// minimizations per axis, continuous in the displacement.
    fn step_separable(&self, u: &[f64], dt: f64, time_slice: Option<(usize, &[f64])>) -> Vec<f64> {
        let diag = self.l.a_diag.as_ref().unwrap();
        let m = self.config_dims;
        // departure-weighted buffer w = u − (Δt/2)V(departure slice)
        let (v_dep, v_arr, len) = match time_slice {
            None => (&self.v_grid[..], &self.v_grid[..], self.grid.len()),
            Some((slice_len, _)) => {
                let _ = slice_len;
                unreachable!("time slices use step_time_slice")
            }
        };
        let mut w: Vec<f64> = u
            .iter()
            .zip(v_dep)
            .map(|(&uu, &vv)| uu - 0.5 * dt * vv)
            .collect();
        for d in 0..m {
            w = self.axis_pass(&w, d, diag[d], dt, self.grid, 0);
        }
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            out.push(w[i] - 0.5 * dt * v_arr[i]);
        }
        out
    }

    /// Minimize along axis d:
    /// w'(x) = min_δ w(x − δ e_d) + δ²/(2 a_d Δt) − c_d δ.
    fn axis_pass(&self, w: &[f64], d: usize, a_d: f64, dt: f64, grid: &Grid) -> Vec<f64> {
        let h = grid.spacing(d);
        let n_d = grid.dims[d];
        let radius = (((self.p.v_max * dt) / h).ceil() as i64)
            .max(1)
            .min(n_d as i64 / 2);
        let kin: Vec<f64> = (-radius..=radius)
            .map(|r| {
                let delta = r as f64 * h;
                delta * delta / (2.0 * a_d * dt) - self.c[d] * delta
            })
            .collect();
        let stride = line_stride(grid, d);
        let starts = collect_line_starts(grid, d);
        let cd = self.c[d];
        let refine = self.p.refine;
        let processed: Vec<(usize, Vec<f64>)> = starts
            .par_iter()
            .map(|&start| {
                let mut line = vec![0.0; n_d];
                for (t, lv) in line.iter_mut().enumerate() {
                    *lv = w[start + t * stride];
                }
                let mut res = vec![0.0; n_d];
                for (i, out_v) in res.iter_mut().enumerate() {
                    let mut best = f64::INFINITY;
                    let mut best_r = 0i64;
                    for (ri, r) in (-radius..=radius).enumerate() {
                        let src = wrap(i as i64 - r, n_d);
                        let cand = line[src] + kin[ri];
                        if cand < best {
                            best = cand;
                            best_r = r;
                        }
                    }
                    if refine {
                        let mut delta = best_r as f64 * h;
                        let lim = radius as f64 * h;
                        let cost = |del: f64| {
                            line_interp(&line, i as f64 - del / h)
                                + del * del / (2.0 * a_d * dt)
                                - cd * del
                        };
                        let mut step = 0.5 * h;
                        for _ in 0..3 {
                            let cm = cost((delta - step).clamp(-lim, lim));
                            let cp = cost((delta + step).clamp(-lim, lim));
                            let denom = cm - 2.0 * best + cp;
                            let cand_d = if denom > 1e-300 {
                                delta + 0.5 * step * (cm - cp) / denom
                            } else if cm < cp {
                                delta - step
                            } else {
                                delta + step
                            }
                            .clamp(-lim, lim);
                            let cc = cost(cand_d);
                            if cc < best {
                                best = cc;
                                delta = cand_d;
                            }
                            step *= 0.4;
                        }
                    }
                    *out_v = best;
                }
                (start, res)
            })
            .collect();
        let mut out = vec![0.0; w.len()];
        for (start, res) in processed {
            for (t, v) in res.into_iter().enumerate() {
                out[start + t * stride] = v;
            }
        }
        out
    }

    /// Full window search for non-diagonal kinetic forms (2-D only).
    fn step_window(&self, u: &[f64], dt: f64) -> Vec<f64> {
        assert_eq!(self.config_dims, 2, "window search implemented for 2-D");
        let grid = self.grid;
        let (n0, n1) = (grid.dims[0], grid.dims[1]);
        let (h0, h1) = (grid.spacing(0), grid.spacing(1));
        let r0 = (((self.p.v_max * dt) / h0).ceil() as i64).max(1).min(n0 as i64 / 2);
        let r1 = (((self.p.v_max * dt) / h1).ceil() as i64).max(1).min(n1 as i64 / 2);
        let ainv = &self.l.a_inv;
        let mut kin = vec![0.0; ((2 * r0 + 1) * (2 * r1 + 1)) as usize];
        for (t, kv) in kin.iter_mut().enumerate() {
            let q0 = t as i64 / (2 * r1 + 1) - r0;
            let q1 = t as i64 % (2 * r1 + 1) - r1;
            let d0 = q0 as f64 * h0;
            let d1 = q1 as f64 * h1;
            *kv = (0.5 * (ainv[(0, 0)] * d0 * d0 + 2.0 * ainv[(0, 1)] * d0 * d1 + ainv[(1, 1)] * d1 * d1))
                / dt
                - self.c[0] * d0
                - self.c[1] * d1;
        }
        let w: Vec<f64> = u
            .iter()
            .zip(&self.v_grid)
            .map(|(&uu, &vv)| uu - 0.5 * dt * vv)
            .collect();
        let out: Vec<f64> = (0..u.len())
            .into_par_iter()
            .map(|i| {
                let i0 = (i / n1) as i64;
                let i1 = (i % n1) as i64;
                let mut best = f64::INFINITY;
                for q0 in -r0..=r0 {
                    let s0 = wrap(i0 - q0, n0);
                    for q1 in -r1..=r1 {
                        let s1 = wrap(i1 - q1, n1);
                        let cand = w[s0 * n1 + s1]
                            + kin[((q0 + r0) * (2 * r1 + 1) + (q1 + r1)) as usize];
                        if cand < best {
                            best = cand;
                        }
                    }
                }
                best - 0.5 * dt * self.v_grid[i]
            })
            .collect();
        out
    }

    /// Time-periodic sweep: slice j is updated from slice j−1 (cyclically),
    /// one full period per call. Gauss–Seidel in time.
    fn step_time_periodic(&self, u: &[f64], dt: f64) -> Vec<f64> {
        let grid = self.grid;
        let m = self.config_dims;
        let nt = self.nt;
        let slice_len: usize = grid.dims[..m].iter().product();
        let space_grid = Grid::with_periods(grid.dims[..m].to_vec(), grid.periods[..m].to_vec());
        let diag = self
            .l
            .a_diag
            .clone()
            .expect("time-periodic solves need a diagonal kinetic form");
        let mut out = u.to_vec();
        for j in 0..nt {
            let prev = (j + nt - 1) % nt;
            // w = u(·, t_{prev}) − (Δt/2)V(·, t_{prev})
            let mut w: Vec<f64> = (0..slice_len)
                .map(|s| out[prev * slice_len + s] - 0.5 * dt * self.v_grid[prev * slice_len + s])
                .collect();
            for d in 0..m {
                w = self.axis_pass(&w, d, diag[d], dt, &space_grid);
            }
            for s in 0..slice_len {
                out[j * slice_len + s] = w[s] - 0.5 * dt * self.v_grid[j * slice_len + s];
            }
        }
        out
    }
}

fn line_stride(grid: &Grid, d: usize) -> usize {
    grid.dims[d + 1..].iter().product()
}

/// Flat start offsets of all lines along axis d.
fn collect_line_starts(grid: &Grid, d: usize) -> Vec<usize> {
    let mut starts = Vec::new();
    let m = grid.m();
    let mut idx = vec![0usize; m];
    loop {
        starts.push(grid.flatten(&idx));
        // increment over all dims except d
        let mut carry = true;
        for t in (0..m).rev() {
            if t == d {
                continue;
            }
            if carry {
                idx[t] += 1;
                if idx[t] == grid.dims[t] {
                    idx[t] = 0;
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            break;
        }
    }
    starts
}

/// Periodic cubic interpolation of a raw line at fractional index g.
fn line_interp(line: &[f64], g: f64) -> f64 {
    let n = line.len();
    let i = g.floor() as i64;
    let f = g - g.floor();
    let v = [
        line[wrap(i - 1, n)],
        line[wrap(i, n)],
        line[wrap(i + 1, n)],
        line[wrap(i + 2, n)],
    ];
    let a = -0.5 * v[0] + 1.5 * v[1] - 1.5 * v[2] + 0.5 * v[3];
    let b = v[0] - 2.5 * v[1] + 2.0 * v[2] - 0.5 * v[3];
    let c = -0.5 * v[0] + 0.5 * v[2];
    ((a * f + b) * f + c) * f + v[1]
}

/// Backward weak KAM solution u⁻ and the effective value α(c).
pub fn lax_oleinik(
    l: &Tonelli,
    c: &[f64],
    grid: &Grid,
    p: &SolverParams,
) -> Result<WeakKamSolution, WkError> {
    lax_oleinik_init(l, c, grid, p, None)
}

pub fn lax_oleinik_init(
    l: &Tonelli,
    c: &[f64],
    grid: &Grid,
    p: &SolverParams,
    init: Option<&GridField>,
) -> Result<WeakKamSolution, WkError> {
    let sw = Sweeper::new(l, c, grid, *p);
    let mut u = match init {
        Some(f) => f.data.clone(),
        None => vec![0.0; grid.len()],
    };
    let mut alpha_hist: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iters = 0;
    let mut spread = f64::INFINITY;
    while iters < p.max_iters {
        let (mean, lo, hi) = sw.step(&mut u);
        // normalize min to zero
        let m = u.iter().copied().fold(f64::INFINITY, f64::min);
        for v in &mut u {
            *v -= m;
        }
        alpha_hist.push(mean);
        spread = hi - lo;
        iters += 1;
        if alpha_hist.len() >= 50 {
            let w = &alpha_hist[alpha_hist.len() - 50..];
            let (wmin, wmax) = w
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            if wmax - wmin < p.tol && spread < 60.0 * p.tol {
                converged = true;
                break;
            }
        }
    }
    let alpha = *alpha_hist.last().unwrap();
    if !converged && spread > 1e-2 {
        return Err(WkError::NonConvergence { residual: spread });
    }
    Ok(WeakKamSolution {
        u: GridField { grid: grid.clone(), data: u },
        c: c.to_vec(),
        alpha,
        residual: spread,
        iterations: iters,
        direction: Direction::Backward,
        converged,
    })
}

/// Forward weak KAM solution u⁺ = −(backward solution of the reversed
/// Lagrangian at class −c), with the same α.
pub fn lax_oleinik_forward(
    l: &Tonelli,
    c: &[f64],
    grid: &Grid,
    p: &SolverParams,
) -> Result<WeakKamSolution, WkError> {
    let rev = l.reversed();
    let neg_c: Vec<f64> = c.iter().map(|&x| -x).collect();
    let mut sol = lax_oleinik(&rev, &neg_c, grid, p)?;
    if l.time_periodic {
        // map the time slices back: t ↦ −t
        let nt = *grid.dims.last().unwrap();
        let slice_len = grid.len() / nt;
        let mut data = vec![0.0; grid.len()];
        for j in 0..nt {
            let src = (nt - j) % nt;
            for s in 0..slice_len {
                data[j * slice_len + s] = -sol.u.data[src * slice_len + s];
            }
        }
        sol.u.data = data;
    } else {
        for v in &mut sol.u.data {
            *v = -*v;
        }
    }
    let m = sol.u.min();
    for v in &mut sol.u.data {
        *v -= m;
    }
    sol.c = c.to_vec();
    sol.direction = Direction::Forward;
    Ok(sol)
}

/// The effective Hamiltonian value α(c) alone.
pub fn alpha(l: &Tonelli, c: &[f64], grid: &Grid, p: &SolverParams) -> Result<f64, WkError> {
    Ok(lax_oleinik(l, c, grid, p)?.alpha)
}

/// Elementary solution pinned at a class: value iteration from 0 on the pin
/// set and +∞ (large) elsewhere, calibrated by the known α. Converges to
/// h^∞(pin, ·), the elementary backward solution vanishing on the class.
pub fn elementary_backward(
    l: &Tonelli,
    c: &[f64],
    alpha: f64,
    pin: &[usize],
    grid: &Grid,
    p: &SolverParams,
) -> Result<GridField, WkError> {
    let sw = Sweeper::new(l, c, grid, *p);
    let big = 1e6;
    let mut u = vec![big; grid.len()];
    for &i in pin {
        u[i] = 0.0;
    }
    let dt = if l.time_periodic {
        grid.spacing(grid.m() - 1)
    } else {
        p.dt
    };
    let mut last_change = f64::INFINITY;
    for _ in 0..p.max_iters {
        let prev = u.clone();
        let _ = sw.step(&mut u);
        for v in &mut u {
            *v += alpha * dt;
            if *v > big {
                *v = big;
            }
        }
        last_change = u
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if last_change < p.tol * dt * 10.0 {
            break;
        }
    }
    if last_change > 1e-2 {
        return Err(WkError::NonConvergence { residual: last_change });
    }
    Ok(GridField { grid: grid.clone(), data: u })
}

pub fn elementary_forward(
    l: &Tonelli,
    c: &[f64],
    alpha: f64,
    pin: &[usize],
    grid: &Grid,
    p: &SolverParams,
) -> Result<GridField, WkError> {
    let rev = l.reversed();
    let neg_c: Vec<f64> = c.iter().map(|&x| -x).collect();
    let pin_rev: Vec<usize> = if l.time_periodic {
        let nt = *grid.dims.last().unwrap();
        let slice_len = grid.len() / nt;
        pin.iter()
            .map(|&i| {
                let j = i / slice_len;
                let s = i % slice_len;
                ((nt - j) % nt) * slice_len + s
            })
            .collect()
    } else {
        pin.to_vec()
    };
    let f = elementary_backward(&rev, &neg_c, alpha, &pin_rev, grid, p)?;
    let mut data = vec![0.0; grid.len()];
    if l.time_periodic {
        let nt = *grid.dims.last().unwrap();
        let slice_len = grid.len() / nt;
        for j in 0..nt {
            let src = (nt - j) % nt;
            for s in 0..slice_len {
                data[j * slice_len + s] = -f.data[src * slice_len + s];
            }
        }
    } else {
        for (o, v) in data.iter_mut().zip(&f.data) {
            *o = -v;
        }
    }
    Ok(GridField { grid: grid.clone(), data })
}
