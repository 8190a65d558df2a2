//! Numerical and exact-arithmetic machinery for variational instability
//! analysis of nearly integrable Hamiltonian systems: resonance-lattice
//! algebra, frequency-path construction, one-step KAM normal forms, shear
//! and action-angle reductions, weak KAM / Aubry–Mather computation, and
//! the flat/channel/ladder geometry of the alpha function near strong
//! resonances.
//!
//! Everything is sized for desk-scale experiments on 2–4 degree-of-freedom
//! model systems. Exact integer and rational arithmetic is used wherever a
//! claim is algebraic (unimodularity, annihilation, resonance membership);
//! grid solvers and quadrature carry explicit tolerances otherwise.

pub mod lattice;
pub mod ham;
pub mod mech2dof;
pub mod weakkam;
pub mod geometry;
pub mod experiment;
pub mod builtin;

/// Angles live on the 2π-periodic torus throughout.
pub const TAU: f64 = 2.0 * std::f64::consts::PI;
