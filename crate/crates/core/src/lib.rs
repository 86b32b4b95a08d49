//! Numerical laboratory for the porous medium equation with a drift potential.
//!
//! The crate provides monotone explicit finite-volume solvers for the density form
//! `rho_t = lap(rho^m) + div(rho grad Phi)` and for the signed equation with a sink
//! `w_t = lap(w|w|^(m-1)) - s chi_R`, exact pressure/density and scaling transforms,
//! Barenblatt barriers with residual certification, and scenario experiments that
//! measure mass-to-pointwise lower bounds, small-mass decay and exponential
//! free-boundary convergence.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod measure;
pub mod potential;
pub mod solver;
pub mod transforms;

pub use error::{Error, Result};
pub use field::{FieldKind, ScalarField};
pub use grid::{Grid, Point, RegionBall};
pub use measure::CellMask;
pub use potential::{PotentialForm, PotentialSpec};
pub use solver::{SolverConfig, SourceTerm, Trajectory};
