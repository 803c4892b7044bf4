//! Differential geometry of Lorentz surfaces in the pseudo-Euclidean space
//! E^4_2: invariants, geometric moving frames, surface reconstruction from
//! geometric functions, and canonical-parameter tools.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bonnet;
pub mod catalog;
pub mod error;
pub mod geoframe;
pub mod grid;
pub mod invariants;
pub mod jets;
pub mod pe4;
pub mod pnmcv;

pub use error::{Error, ErrorClass, Result};
