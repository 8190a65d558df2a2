//! Truncated Fourier representation of nearly integrable Hamiltonians,
//! weighted C^r norms, homogenization around a base action point, resonant
//! splitting with one-step KAM averaging, shear transforms, and energetic
//! reduction.

mod fourier;
mod homog;
mod kam;
mod shear;
mod reduce;
pub mod dynamics;

pub use fourier::{FourierField, FourierHamiltonian, IntegrablePart, Mode, YPoly};
pub use homog::{homogenize, HomogenizedHamiltonian};
pub use kam::{cr_norm, one_step_kam, solve_cohomological, split_resonant, NormalForm};
pub use reduce::{energetic_reduction, ReducedSystem};
pub use shear::{shear_frame, shear_scalars_exact, undo_shear, undo_shear_action, ShearFrame};

#[derive(thiserror::Error, Debug, Clone)]
pub enum HamError {
    #[error("small divisor at k = {k:?}: |<k,omega*>| = {value:.3e} <= floor {floor:.3e}; the resonance module was chosen too small")]
    SmallDivisor { k: Vec<i64>, value: f64, floor: f64 },
    #[error("Hessian not positive definite at the requested base point")]
    NotPositiveDefinite,
    #[error("coefficients break realness: c_{{-k}} != conj(c_k) at k = {0:?}")]
    NotReal(Vec<i64>),
    #[error("non-monotone conjugate momentum: dH/dy_n changes sign or vanishes on the working region")]
    NonMonotoneMomentum,
    #[error("module vectors must be linearly independent")]
    DependentModule,
}

#[cfg(test)]
mod tests;
