//! Uniform periodic grids on T^m (m ≤ 3) and scalar fields on them with
//! periodic cubic interpolation.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub dims: Vec<usize>,
    /// Physical period per dimension (2π for angles; covers multiply it).
    pub periods: Vec<f64>,
}

impl Grid {
    pub fn new(dims: Vec<usize>) -> Self {
        let periods = vec![crate::TAU; dims.len()];
        Grid { dims, periods }
    }

    pub fn with_periods(dims: Vec<usize>, periods: Vec<f64>) -> Self {
        assert_eq!(dims.len(), periods.len());
        Grid { dims, periods }
    }

    /// Double dimension `d`: the index-arithmetic realization of a finite
    /// cover.
    pub fn doubled(&self, d: usize) -> Grid {
        let mut dims = self.dims.clone();
        let mut periods = self.periods.clone();
        dims[d] *= 2;
        periods[d] *= 2.0;
        Grid { dims, periods }
    }

    pub fn m(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, d: usize) -> f64 {
        self.periods[d] / self.dims[d] as f64
    }

    pub fn node_coord(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(d, &i)| i as f64 * self.spacing(d))
            .collect()
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for (d, &i) in idx.iter().enumerate() {
            f = f * self.dims[d] + i;
        }
        f
    }

    pub fn unflatten(&self, mut f: usize) -> Vec<usize> {
        let m = self.m();
        let mut idx = vec![0; m];
        for d in (0..m).rev() {
            idx[d] = f % self.dims[d];
            f /= self.dims[d];
        }
        idx
    }
}

/// Real scalar field on a periodic grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridField {
    pub grid: Grid,
    pub data: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        GridField { grid, data: vec![0.0; n] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let n = grid.len();
        let mut data = vec![0.0; n];
        for (i, v) in data.iter_mut().enumerate() {
            let idx = grid.unflatten(i);
            *v = f(&grid.node_coord(&idx));
        }
        GridField { grid, data }
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for i in 1..self.data.len() {
            if self.data[i] < self.data[best] {
                best = i;
            }
        }
        best
    }

    /// Subtract the minimum in place (weak KAM normalization).
    pub fn normalize_min(&mut self) -> f64 {
        let m = self.min();
        for v in &mut self.data {
            *v -= m;
        }
        m
    }

    /// Periodic cubic (Catmull-Rom) interpolation. Semiconcavity of weak KAM
    /// solutions makes the overshoot at kinks point upward, which a min-based
    /// sweep never selects.
    pub fn interp(&self, x: &[f64]) -> f64 {
        let m = self.grid.m();
        debug_assert_eq!(x.len(), m);
        match m {
            1 => self.interp1(x[0]),
            2 => {
                let d1 = self.grid.dims[1];
                let h0 = self.grid.spacing(0);
                let g0 = x[0] / h0;
                let i0 = g0.floor() as i64;
                let f0 = g0 - g0.floor();
                let mut vals = [0.0; 4];
                for (t, v) in vals.iter_mut().enumerate() {
                    let row = wrap(i0 - 1 + t as i64, self.grid.dims[0]);
                    *v = self.interp_axis1(row * d1, x[1]);
                }
                catmull(vals, f0)
            }
            3 => {
                let h0 = self.grid.spacing(0);
                let g0 = x[0] / h0;
                let i0 = g0.floor() as i64;
                let f0 = g0 - g0.floor();
                let mut vals = [0.0; 4];
                for (t, v) in vals.iter_mut().enumerate() {
                    let row = wrap(i0 - 1 + t as i64, self.grid.dims[0]);
                    *v = self.interp_plane12(row, &x[1..]);
                }
                catmull(vals, f0)
            }
            _ => panic!("grids supported up to dimension 3"),
        }
    }

    fn interp1(&self, x: f64) -> f64 {
        let n = self.grid.dims[0];
        let h = self.grid.spacing(0);
        let g = x / h;
        let i = g.floor() as i64;
        let f = g - g.floor();
        let v = [
            self.data[wrap(i - 1, n)],
            self.data[wrap(i, n)],
            self.data[wrap(i + 1, n)],
            self.data[wrap(i + 2, n)],
        ];
        catmull(v, f)
    }

    /// 1-D interpolation along the last axis of a row starting at `base`.
    fn interp_axis1(&self, base: usize, x1: f64) -> f64 {
        let n = *self.grid.dims.last().unwrap();
        let h = self.grid.spacing(self.grid.m() - 1);
        let g = x1 / h;
        let i = g.floor() as i64;
        let f = g - g.floor();
        let v = [
            self.data[base + wrap(i - 1, n)],
            self.data[base + wrap(i, n)],
            self.data[base + wrap(i + 1, n)],
            self.data[base + wrap(i + 2, n)],
        ];
        catmull(v, f)
    }

    fn interp_plane12(&self, row0: usize, x: &[f64]) -> f64 {
        let d1 = self.grid.dims[1];
        let d2 = self.grid.dims[2];
        let h1 = self.grid.spacing(1);
        let g1 = x[0] / h1;
        let i1 = g1.floor() as i64;
        let f1 = g1 - g1.floor();
        let mut vals = [0.0; 4];
        for (t, v) in vals.iter_mut().enumerate() {
            let r1 = wrap(i1 - 1 + t as i64, d1);
            *v = self.interp_axis1((row0 * d1 + r1) * d2, x[1]);
        }
        catmull(vals, f1)
    }

    /// Discrete sup-norm of the gradient (one-sided differences).
    pub fn lipschitz(&self) -> f64 {
        let m = self.grid.m();
        let mut best = 0.0f64;
        for i in 0..self.data.len() {
            let idx = self.grid.unflatten(i);
            for d in 0..m {
                let mut j = idx.clone();
                j[d] = (idx[d] + 1) % self.grid.dims[d];
                let diff = (self.data[self.grid.flatten(&j)] - self.data[i]).abs()
                    / self.grid.spacing(d);
                best = best.max(diff);
            }
        }
        best
    }
}

#[inline]
pub fn wrap(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

#[inline]
fn catmull(v: [f64; 4], t: f64) -> f64 {
    let a = -0.5 * v[0] + 1.5 * v[1] - 1.5 * v[2] + 0.5 * v[3];
    let b = v[0] - 2.5 * v[1] + 2.0 * v[2] - 0.5 * v[3];
    let c = -0.5 * v[0] + 0.5 * v[2];
    ((a * t + b) * t + c) * t + v[1]
}
