//! Invertible quantum measurement maps.
//!
//! A bijection `φ` of the state space maps every segment `[ρ1, ρ2]` into
//! `[φ(ρ1), φ(ρ2)]` exactly when it is `ρ ↦ MρM*/tr(MρM*)` or
//! `ρ ↦ Mρ^T M*/tr(Mρ^T M*)` for an invertible `M`. This crate works with both
//! sides of that statement numerically:
//!
//! - [`state`]: density operators, Hermitian coordinates, the Bloch ball and
//!   a Jacobi eigensolver.
//! - [`maps`]: measurement maps, fractional-linear maps, superoperators,
//!   Choi matrices and the [`StateMapOracle`] trait.
//! - [`geometry`]: sampled certificates for segment containment, segment
//!   equality, pure-state and frame preservation.
//! - [`reconstruct`]: recovery of `(M, transpose)` from oracle access, the
//!   fractional-linear fit and a nested-subspace consistency check.
//! - [`json`]: the interchange formats.

pub mod error;
pub mod geometry;
pub mod json;
pub mod maps;
pub mod reconstruct;
pub mod state;

pub use error::{Error, Result};
pub use maps::{FractionalLinearMap, MeasurementMap, StateMapOracle, Superoperator};
pub use state::{BlochVector, ComplexMatrix, DensityOperator, HermitianMatrix, ProjectionFrame, PureState, C64};
