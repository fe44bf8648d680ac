//! Simulation and verification toolkit for the 1+1 dimensional Maxwell-Dirac and
//! Dirac-Klein-Gordon family of systems in the charge class.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod cone;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod illposed;
pub mod lattice;
pub mod norms;
pub mod oracle;
pub mod picard;
pub mod profile;
pub mod quadrature;
pub mod state;
pub mod system;

pub use error::{Error, Result};
pub use grid::{make_grid, Grid1D};
pub use norms::{charge, norms, NormReport};
pub use state::{CauchyData, PotentialState, SpinorSlice};
pub use system::{system_preset, Preset, SystemSpec};
