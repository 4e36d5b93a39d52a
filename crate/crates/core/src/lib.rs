//! Dirichlet-to-Neumann operators on periodic strips and truncated
//! half-spaces, coercivity certificates for their quadratic and convex
//! pairings, and one-phase Muskat flow.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the common choices.

// negated comparisons deliberately reject NaN; index loops mirror the
// stencil notation
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod coercivity;
pub mod dno;
pub mod domain;
pub mod elliptic;
pub mod error;
pub mod muskat;
pub mod random;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Grid = spectral::PeriodicGrid<f64>;
pub type Field = spectral::SpectralField<f64>;
pub type Boundary = domain::BoundaryFn<f64>;
pub type DnOp = dno::DnOperator<f64>;

pub type GridF32 = spectral::PeriodicGrid<f32>;
pub type FieldF32 = spectral::SpectralField<f32>;
pub type BoundaryF32 = domain::BoundaryFn<f32>;
pub type DnOpF32 = dno::DnOperator<f32>;
