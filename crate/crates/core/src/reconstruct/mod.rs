//! Recovery of `(M, transpose)` from oracle access to a bijective
//! segment-preserving map.
//!
//! The pipeline whitens the oracle at `I/n`, reads the images of the standard
//! basis projections, aligns their phases with superposition probes and
//! decides the branch from one more family of probes. Every stage validates
//! what it relies on and fails with a typed error otherwise.

mod kadison;
mod nested;
mod normalize;
mod pales;

pub use kadison::{
    branch_cross_check, recover_frame_images, recover_unitary_and_branch, unitarity_deviation, BranchCrossCheck,
    KadisonForm, BRANCH_MARGIN, CHOI_TOL, FRAME_TOL, PHASE_TOL, PURITY_TOL,
};
pub use nested::{nested_subspace_consistency, nested_subspace_report, NestedReport, NESTED_TOL};
pub use normalize::{normalize_at_maximally_mixed, NormalizedOracle, IMAGE_SINGULAR, NORMALIZATION_TOL};
pub use pales::{fit_pales, min_pales_samples, sample_oracle, PalesFit, SamplePairJson, RANK_TOL, SCALE_CONVENTION};

use crate::error::{Error, Result};
use crate::geometry::{evaluate_checked, for_each_index};
use crate::maps::{apply_measurement, CountingOracle, MeasurementMap, StateMapOracle};
use crate::state::random::{density_from_rng, stream_rng};
use crate::state::trace_distance;

/// Largest verification residual accepted by [`reconstruct_measurement_map`].
pub const VERIFICATION_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    /// Canonical representative.
    pub map: MeasurementMap,
    /// Largest trace distance between oracle and reconstruction on the
    /// verification states.
    pub residual: f64,
    /// Signed branch reading, positive on the linear branch.
    pub branch_margin: f64,
    /// Oracle evaluations, verification included.
    pub queries: usize,
}

/// Number of oracle calls the pipeline makes before verification.
pub fn pipeline_queries(n: usize) -> usize {
    1 + n + 2 * (n - 1)
}

/// Runs the pipeline and reports the verification residual without judging it.
pub fn reconstruct_candidate(oracle: &dyn StateMapOracle, verify_samples: usize, seed: u64) -> Result<ReconstructionResult> {
    let counted = CountingOracle::new(oracle);
    let norm = normalize_at_maximally_mixed(&counted)?;
    let form = recover_unitary_and_branch(&norm)?;
    // φ(ρ) ∝ R φ̃(ρ) R*, so M = R U.
    let map = MeasurementMap::new(norm.root() * &form.unitary, form.transposed)?;
    let n = oracle.dim();
    let distances = for_each_index(&counted, verify_samples, |k| {
        let rho = density_from_rng(&mut stream_rng(seed, k as u64), n);
        trace_distance(&evaluate_checked(&counted, &rho)?, &apply_measurement(&map, &rho)?)
    })?;
    let residual = distances.into_iter().fold(0.0, f64::max);
    Ok(ReconstructionResult { map, residual, branch_margin: form.branch_margin, queries: counted.calls() })
}

/// Reconstructs the measurement map behind `oracle` and verifies it on
/// `verify_samples` random states.
pub fn reconstruct_measurement_map(oracle: &dyn StateMapOracle, verify_samples: usize, seed: u64) -> Result<ReconstructionResult> {
    let result = reconstruct_candidate(oracle, verify_samples, seed)?;
    if !(result.residual <= VERIFICATION_TOL) {
        return Err(Error::VerificationFailed(result.residual));
    }
    Ok(result)
}
