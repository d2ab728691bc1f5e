use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::reconstruct_measurement_map;
use crate::error::{Error, Result};
use crate::geometry::evaluate_checked;
use crate::maps::{FnOracle, StateMapOracle};
use crate::state::matrix::C64;
use crate::state::random::{stream_rng, unitary_from_rng};
use crate::state::{ComplexMatrix, DensityOperator};

/// Tolerance for both the invariance of the image subspace and the agreement
/// of the nested reconstructions.
pub const NESTED_TOL: f64 = 1e-7;
const VERIFY_SAMPLES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedReport {
    pub consistent: bool,
    /// Largest phase-free relative deviation between the two restrictions.
    pub worst_deviation: f64,
    pub flags_agree: bool,
    pub k1: usize,
    pub k2: usize,
    pub trials: usize,
    pub tolerance: f64,
    pub seed: u64,
}

/// `min_λ ‖a − λ b‖_F / ‖a‖_F` for rectangular matrices.
fn rect_scale_deviation(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let ab: C64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    let lambda = ab / b.norm_squared();
    (a - b * lambda).norm() / a.norm()
}

/// The map on a `k`-dimensional subspace `Λ = span(V)` seen through the
/// isometry `Q` onto its image: `ρ ↦ Q* φ(V ρ V*) Q`, together with `Q`.
fn restrict<'a>(oracle: &'a dyn StateMapOracle, v: DMatrix<C64>) -> Result<(DMatrix<C64>, impl StateMapOracle + 'a)> {
    let n = oracle.dim();
    let k = v.ncols();
    let embed = move |rho: &DensityOperator| -> DensityOperator {
        let m = &v * rho.matrix().as_dmatrix() * v.adjoint();
        DensityOperator::normalized_psd(&ComplexMatrix::new(m).expect("square")).expect("unit trace")
    };
    let mixed = embed(&DensityOperator::maximally_mixed(k));
    let image = evaluate_checked(oracle, &mixed)?;
    let d = image.hermitian().decompose()?;
    // The image of a state supported on Λ must be supported on a k-dimensional subspace.
    if k < n && d.eigenvalues[k] > NESTED_TOL {
        return Err(Error::RestrictionNotInvariant(d.eigenvalues[k]));
    }
    let q = d.eigenvectors.as_dmatrix().columns(0, k).into_owned();
    let q_inner = q.clone();
    let restricted = FnOracle::new(k, move |rho: &DensityOperator| {
        let out = evaluate_checked(oracle, &embed(rho))?;
        let full = out.matrix().as_dmatrix();
        let compressed = q_inner.adjoint() * full * &q_inner;
        let back = &q_inner * &compressed * q_inner.adjoint();
        let leak = (full - back).norm();
        if leak > NESTED_TOL {
            return Err(Error::RestrictionNotInvariant(leak));
        }
        DensityOperator::normalized_psd(&ComplexMatrix::new(compressed).expect("square"))
    });
    Ok((q, restricted))
}

/// Reconstructs the map on random nested subspaces `Λ1 ⊂ Λ2` of dimensions
/// `k1 < k2` and compares `M_Λ2` restricted to `Λ1` with `M_Λ1` up to scale.
pub fn nested_subspace_report(
    oracle: &dyn StateMapOracle,
    k1: usize,
    k2: usize,
    trials: usize,
    seed: u64,
) -> Result<NestedReport> {
    let n = oracle.dim();
    if !(2 <= k1 && k1 < k2 && k2 <= n) {
        return Err(Error::InvalidInput(format!("need 2 ≤ k1 < k2 ≤ n, got k1 = {k1}, k2 = {k2}, n = {n}")));
    }
    let mut worst_deviation = 0.0f64;
    let mut flags_agree = true;
    for trial in 0..trials {
        let w = unitary_from_rng(&mut stream_rng(seed, trial as u64), n);
        let v2 = w.as_dmatrix().columns(0, k2).into_owned();
        let v1 = w.as_dmatrix().columns(0, k1).into_owned();
        let (q2, r2) = restrict(oracle, v2)?;
        let (q1, r1) = restrict(oracle, v1)?;
        let m2 = reconstruct_measurement_map(&r2, VERIFY_SAMPLES, seed)?;
        let m1 = reconstruct_measurement_map(&r1, VERIFY_SAMPLES, seed)?;
        // Λ1 is spanned by the first k1 basis vectors of Λ2.
        let a2 = &q2 * m2.map.matrix().as_dmatrix().columns(0, k1);
        let a1 = &q1 * m1.map.matrix().as_dmatrix();
        worst_deviation = worst_deviation.max(rect_scale_deviation(&a2, &a1));
        flags_agree &= m1.map.transposed() == m2.map.transposed();
    }
    Ok(NestedReport {
        consistent: flags_agree && worst_deviation <= NESTED_TOL,
        worst_deviation,
        flags_agree,
        k1,
        k2,
        trials,
        tolerance: NESTED_TOL,
        seed,
    })
}

pub fn nested_subspace_consistency(oracle: &dyn StateMapOracle, k1: usize, k2: usize, trials: usize, seed: u64) -> Result<bool> {
    Ok(nested_subspace_report(oracle, k1, k2, trials, seed)?.consistent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{builtin, MeasurementMap};
    use crate::state::random::random_invertible;

    #[test]
    fn measurement_map_consistent() {
        for transposed in [false, true] {
            let map = MeasurementMap::new(random_invertible(6, 4, 100.0).unwrap(), transposed).unwrap();
            let report = nested_subspace_report(&map, 2, 4, 3, 1).unwrap();
            assert!(report.consistent, "{report:?}");
        }
    }

    #[test]
    fn identity_consistent() {
        assert!(nested_subspace_consistency(&*builtin::identity(4), 2, 3, 2, 0).unwrap());
    }

    #[test]
    fn block_map_rejected() {
        let pinch = builtin::block_pinching(6, 3, 5);
        assert!(matches!(nested_subspace_consistency(&*pinch, 2, 4, 1, 0), Err(Error::RestrictionNotInvariant(_))));
    }

    #[test]
    fn dimension_checks() {
        let id = builtin::identity(4);
        assert!(nested_subspace_consistency(&*id, 3, 3, 1, 0).is_err());
        assert!(nested_subspace_consistency(&*id, 1, 3, 1, 0).is_err());
        assert!(nested_subspace_consistency(&*id, 2, 5, 1, 0).is_err());
    }
}
