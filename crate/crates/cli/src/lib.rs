//! Command-line front end for the `lorentz-core` library.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod io;

pub use commands::{report_error, run};
pub use error::{CliError, Result};
