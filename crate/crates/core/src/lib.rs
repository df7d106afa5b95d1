//! Numerical workbench for parabolic problems on planar corner domains.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod domain;
pub mod error;
pub mod experiment;
pub mod field;
pub mod mesh;
pub mod pde;
pub mod pencil;
pub mod quadrature;
pub mod smoothness;
pub mod sparse;

pub use error::{Error, Result};
pub use field::FieldSnapshot;
