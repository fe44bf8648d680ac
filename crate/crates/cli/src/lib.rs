//! Configuration, orchestration and artifact emission for the `charge-class` binary.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fields;
pub mod runner;

pub use config::{Command, DataFamily, Overrides, RunConfig};
pub use error::CliError;
pub use fields::{emit_fields, read_fields, FieldsTable};
pub use runner::{run, Summary};
