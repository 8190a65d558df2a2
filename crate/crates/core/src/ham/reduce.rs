//! Energetic reduction: on the level H = E*, solve for the momentum
//! conjugate to the chosen angle and use that angle as the new time. The
//! reduced Hamiltonian is K = −Y_n(solved branch); trajectories of the
//! original flow on the level match the reduced ones under the time
//! reparametrization dx_n/dt = ∂H/∂y_n.

use super::HamError;
use std::sync::Arc;

type HFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// The n−½ degree-of-freedom system produced by the reduction.
pub struct ReducedSystem {
    /// Reduced phase-space dimension (n−1 angles and actions).
    pub n_red: usize,
    /// Index of the angle that became the new time.
    pub time_index: usize,
    pub e_star: f64,
    original: HFn,
    branch_sign: f64,
    y_seed: f64,
}

impl ReducedSystem {
    /// The solved conjugate momentum Y_n(x̂, ŷ, x_n) on the energy level.
    pub fn solved_momentum(&self, x_red: &[f64], y_red: &[f64], time_angle: f64) -> f64 {
        let mut y_n = self.y_seed * self.branch_sign;
        // Newton on H(..., y_n) = E*
        for _ in 0..100 {
            let h = self.eval_full(x_red, y_red, time_angle, y_n);
            let e = 1e-6 * (1.0 + y_n.abs());
            let hp = self.eval_full(x_red, y_red, time_angle, y_n + e);
            let hm = self.eval_full(x_red, y_red, time_angle, y_n - e);
            let d = (hp - hm) / (2.0 * e);
            let step = (h - self.e_star) / d;
            y_n -= step;
            if step.abs() < 1e-13 * (1.0 + y_n.abs()) {
                break;
            }
        }
        y_n
    }

    /// The reduced Hamiltonian K = −Y_n, a function of (x̂, ŷ) and the new
    /// time x_n.
    pub fn hamiltonian(&self, x_red: &[f64], y_red: &[f64], time_angle: f64) -> f64 {
        -self.solved_momentum(x_red, y_red, time_angle)
    }

    fn eval_full(&self, x_red: &[f64], y_red: &[f64], time_angle: f64, y_n: f64) -> f64 {
        let n = self.n_red + 1;
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut r = 0;
        for i in 0..n {
            if i == self.time_index {
                x[i] = time_angle;
                y[i] = y_n;
            } else {
                x[i] = x_red[r];
                y[i] = y_red[r];
                r += 1;
            }
        }
        (self.original)(&x, &y)
    }
}

/// Perform the reduction. `h` is the full n-DOF Hamiltonian H(x,y); the
/// momentum conjugate to `conjugate_index` must stay bounded away from zero
/// on the sampled working region (positive branch by convention; pass
/// negative `y_seed` for the other branch).
pub fn energetic_reduction(
    h: HFn,
    n: usize,
    e_star: f64,
    conjugate_index: usize,
    sample_x: &[Vec<f64>],
    sample_y: &[Vec<f64>],
    y_seed: f64,
) -> Result<ReducedSystem, HamError> {
    assert!(conjugate_index < n);
    let red = ReducedSystem {
        n_red: n - 1,
        time_index: conjugate_index,
        e_star,
        original: h,
        branch_sign: 1.0,
        y_seed: if y_seed == 0.0 { 1.0 } else { y_seed },
    };
    // Monotonicity check: dH/dy_n at the solved branch keeps one sign and
    // stays away from zero on the sampled region.
    let mut sign = 0.0f64;
    for xr in sample_x {
        for yr in sample_y {
            let t = xr.last().copied().unwrap_or(0.0);
            let y_n = red.solved_momentum(xr, yr, t);
            let resid = red.eval_full(xr, yr, t, y_n) - e_star;
            if resid.abs() > 1e-8 * (1.0 + e_star.abs()) {
                return Err(HamError::NonMonotoneMomentum);
            }
            let e = 1e-6;
            let d = (red.eval_full(xr, yr, t, y_n + e) - red.eval_full(xr, yr, t, y_n - e))
                / (2.0 * e);
            if d.abs() < 1e-6 {
                return Err(HamError::NonMonotoneMomentum);
            }
            if sign == 0.0 {
                sign = d.signum();
            } else if sign != d.signum() {
                return Err(HamError::NonMonotoneMomentum);
            }
        }
    }
    Ok(red)
}
