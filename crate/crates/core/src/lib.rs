//! Confidence regions for density level sets and isosurfaces.

// `!(x > 0.0)` is used on purpose so NaN is rejected; index loops mirror the math.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::type_complexity
)]

pub mod bootstrap;
pub mod cli;
pub mod density;
pub mod error;
pub mod evt;
pub mod field;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod io;
pub mod kernel;
pub mod models;
pub mod quadrature;
pub mod regions;

pub use error::{Error, Result};
