//! Grid-based weak KAM machinery: the Lax–Oleinik solver, alpha function,
//! barrier fields with Mañé-set sections, volume-parametrized solution
//! families with Hölder diagnostics, and local type-h connecting orbits.

mod grid;
mod lax;
mod barrier;
mod family;
mod typeh;

pub use barrier::{barrier, barrier_from_solutions, BarrierField};
pub use family::{holder_extend_check, volume_parametrize, ExtendReport, VolumeParametrization};
pub use grid::{wrap, Grid, GridField};
pub use lax::{
    alpha, elementary_backward, elementary_forward, lax_oleinik, lax_oleinik_forward,
    lax_oleinik_init, Direction, SolverParams, Tonelli, WeakKamSolution,
};
pub use typeh::{connecting_orbit_type_h, TypeHParams, TypeHReport};

#[derive(thiserror::Error, Debug, Clone)]
pub enum WkError {
    #[error("Lagrangian is not Tonelli on the chart (kinetic form not positive definite)")]
    NotTonelli,
    #[error("value iteration did not converge: residual {residual:.3e}")]
    NonConvergence { residual: f64 },
    #[error("Aubry set has a single class; lift to the double cover first")]
    SingleClass,
    #[error("volume ordering violated between family members {0} and {1} (solver noise or a genuine flat crossing)")]
    OrderingViolation(usize, usize),
    #[error("no local connecting orbit at this resolution: gap {0:.3e} <= 0")]
    NoConnectingOrbit(f64),
}

#[cfg(test)]
mod tests;
