//! Ising and Q-state Potts models on finite cubic lattices.
//!
//! The crate pairs an exact enumeration engine with Metropolis and Wolff
//! samplers, and adds the cluster/interface geometry, cumulant machinery and
//! closed-form d = 2 results needed to cross-check them.

pub mod analytic;
pub mod clusters;
pub mod error;
pub mod exact;
pub mod lattice;
pub mod mcmc;
pub mod series;
pub mod spin;

pub use error::{Error, Result};
pub use exact::{enumerate, EnumerationTable};
pub use lattice::{BoundaryCondition, Lattice};
pub use mcmc::{ChainState, Estimate, Observable, Sampler, Schedule};
pub use spin::{Model, ModelParams, SpinConfig};
