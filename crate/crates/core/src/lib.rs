//! Faddeev–Green functions of the Laplacian in free space and of the
//! Helmholtz operator in a slab, with the exponential-integral closed forms,
//! their large-parameter expansions and the quadrature oracles that check them.
//!
//! Numerical code is generic over [`scalar::Real`] (`f32`, `f64`); the aliases
//! below fix double precision, which the harness and the CLI use throughout.

// `!(x < y)` is used on purpose so that NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod complex_ei;
pub mod error;
pub mod fullspace;
pub mod geometry;
pub mod harness;
pub mod oracle;
pub mod quadrature;
pub mod scalar;
pub mod slab;

pub use error::{Error, Result};
pub use scalar::{Estimate, Real};

pub type C64 = num_complex::Complex<f64>;
pub type Estimate64 = scalar::Estimate<f64>;
pub type Direction64 = geometry::DirectionSpec<f64>;
pub type FieldPoint64 = geometry::FieldPoint<f64>;
pub type QuadratureSpec64 = oracle::QuadratureSpec<f64>;
pub type SlabConfig64 = slab::SlabConfig<f64>;
pub type SlabFieldPoint64 = slab::SlabFieldPoint<f64>;
