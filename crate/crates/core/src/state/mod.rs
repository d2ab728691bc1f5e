//! States, Hermitian matrices, and the qubit Bloch ball.

pub mod bloch;
pub mod coords;
pub mod density;
pub mod eigen;
pub mod matrix;
pub mod random;

pub use bloch::{bloch_to_state, state_to_bloch, BlochVector};
pub use coords::{coords_to_hermitian, hermitian_basis, hermitian_to_coords};
pub use density::{
    hermitian_trace_distance, segment_point, trace_distance, transpose_in_standard_basis, validate_density,
    validate_frame, DensityOperator, HermitianMatrix, ProjectionFrame, PureState,
};
pub use eigen::{spectral_decompose, SpectralDecomposition};
pub use matrix::{ComplexMatrix, C64};
pub use random::{random_density, random_invertible, random_pure, random_unitary};
