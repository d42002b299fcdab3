//! Dynamic perfect plasticity in anti-plane shear, written as a constrained
//! Friedrichs system for `U = (v, sigma)`.
//!
//! The crate provides the small-matrix algebra of the boundary conditions,
//! the convex kernels of the constitutive law, a staggered-grid explicit
//! solver for the visco-plastic (`eps > 0`) and perfectly plastic (`eps = 0`)
//! models, and checks that audit computed trajectories against the energy
//! balance, the Kato comparison, the propagation cone and the dissipative
//! inequality.

pub mod algebra;
pub mod config;
pub mod constitutive;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod io;
pub mod plastic;
pub mod scenario;
pub mod solver;
pub mod viscoplastic;

pub use error::{Error, Result};
pub use grid::{Axis, FaceField, Grid, State};
pub use scenario::{BcMode, InitialData, Scenario, Source};
pub use solver::{RunOptions, Snapshot, StepStats, Trajectory};
