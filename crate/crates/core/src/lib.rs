//! Driven-dissipative arrays of nonlinearly coupled cavities.
//!
//! The crate simulates a lattice of photonic modes with on-site Kerr `U`,
//! nearest-neighbor cross-Kerr `V` and hopping `J`, all under a coherent
//! drive `Ω` and single-photon loss `κ`:
//!
//! * [`dynamics`] integrates the two-sublattice mean-field master equations
//!   and classifies the asymptotic regime (uniform, photon crystal or
//!   oscillating);
//! * [`oracle`] solves the full master equation of small chains exactly and
//!   measures density-density correlations;
//! * [`sweep`] maps phase diagrams over parameter planes;
//! * [`circuit`] turns lumped-element circuit parameters into model
//!   couplings.

pub mod circuit;
pub mod cli;
pub mod density;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod sweep;

pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use fock::{FockSpace, Operator, StateVector};
pub use model::ModelParams;
