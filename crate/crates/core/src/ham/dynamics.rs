//! Small integrators for Hamiltonian vector fields: implicit midpoint (the
//! symplectic workhorse for normal-form checks) and RK4 for generic flows.

/// A time-dependent Hamiltonian vector field on R^{2n}: z = (x, y).
pub trait VectorField {
    fn dim(&self) -> usize;
    /// dz/dt at (t, z).
    fn field(&self, t: f64, z: &[f64], out: &mut [f64]);
}

pub struct ClosureField<F: Fn(f64, &[f64], &mut [f64])> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(f64, &[f64], &mut [f64])> VectorField for ClosureField<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn field(&self, t: f64, z: &[f64], out: &mut [f64]) {
        (self.f)(t, z, out)
    }
}

/// One implicit-midpoint step: z' = z + h·f(t+h/2, (z+z')/2), solved by
/// fixed-point iteration. Symplectic for Hamiltonian fields.
pub fn implicit_midpoint_step<V: VectorField + ?Sized>(v: &V, t: f64, z: &mut [f64], h: f64) {
    let d = v.dim();
    let mut mid = vec![0.0; d];
    let mut f = vec![0.0; d];
    let mut znew = z.to_vec();
    for _ in 0..50 {
        for i in 0..d {
            mid[i] = 0.5 * (z[i] + znew[i]);
        }
        v.field(t + 0.5 * h, &mid, &mut f);
        let mut delta = 0.0;
        for i in 0..d {
            let cand = z[i] + h * f[i];
            delta += (cand - znew[i]).abs();
            znew[i] = cand;
        }
        if delta < 1e-14 * d as f64 {
            break;
        }
    }
    z.copy_from_slice(&znew);
}

pub fn integrate_midpoint<V: VectorField + ?Sized>(
    v: &V,
    t0: f64,
    z0: &[f64],
    t1: f64,
    steps: usize,
) -> Vec<f64> {
    let mut z = z0.to_vec();
    let h = (t1 - t0) / steps as f64;
    let mut t = t0;
    for _ in 0..steps {
        implicit_midpoint_step(v, t, &mut z, h);
        t += h;
    }
    z
}

/// Classic RK4, for reference trajectories.
pub fn integrate_rk4<V: VectorField + ?Sized>(
    v: &V,
    t0: f64,
    z0: &[f64],
    t1: f64,
    steps: usize,
) -> Vec<f64> {
    let d = v.dim();
    let mut z = z0.to_vec();
    let h = (t1 - t0) / steps as f64;
    let mut t = t0;
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut tmp = vec![0.0; d];
    for _ in 0..steps {
        v.field(t, &z, &mut k1);
        for i in 0..d {
            tmp[i] = z[i] + 0.5 * h * k1[i];
        }
        v.field(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..d {
            tmp[i] = z[i] + 0.5 * h * k2[i];
        }
        v.field(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..d {
            tmp[i] = z[i] + h * k3[i];
        }
        v.field(t + h, &tmp, &mut k4);
        for i in 0..d {
            z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;
    }
    z
}

/// Hamiltonian field from value callbacks by central differences; good
/// enough for the desk-scale flow comparisons.
pub struct NumericHamiltonianField<H: Fn(f64, &[f64], &[f64]) -> f64> {
    pub n: usize,
    pub h_xy: H,
    pub fd_step: f64,
}

impl<H: Fn(f64, &[f64], &[f64]) -> f64> VectorField for NumericHamiltonianField<H> {
    fn dim(&self) -> usize {
        2 * self.n
    }
    fn field(&self, t: f64, z: &[f64], out: &mut [f64]) {
        let n = self.n;
        let (x, y) = z.split_at(n);
        let e = self.fd_step;
        let mut xp = x.to_vec();
        let mut yp = y.to_vec();
        for i in 0..n {
            yp[i] = y[i] + e;
            let hp = (self.h_xy)(t, x, &yp);
            yp[i] = y[i] - e;
            let hm = (self.h_xy)(t, x, &yp);
            yp[i] = y[i];
            out[i] = (hp - hm) / (2.0 * e); // dx/dt = dH/dy
            xp[i] = x[i] + e;
            let hp = (self.h_xy)(t, &xp, y);
            xp[i] = x[i] - e;
            let hm = (self.h_xy)(t, &xp, y);
            xp[i] = x[i];
            out[n + i] = -(hp - hm) / (2.0 * e); // dy/dt = -dH/dx
        }
    }
}
