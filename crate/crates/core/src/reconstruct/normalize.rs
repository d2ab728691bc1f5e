use crate::error::{Error, Result};
use crate::geometry::evaluate_checked;
use crate::maps::StateMapOracle;
use crate::state::eigen::SpectralDecomposition;
use crate::state::{ComplexMatrix, DensityOperator};

/// Smallest admissible eigenvalue of `φ(I/n)`.
pub const IMAGE_SINGULAR: f64 = 1e-10;
/// Allowed entrywise deviation of `φ̃(I/n)` from `I/n`.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// `φ̃(ρ) = S φ(ρ) S* / tr(S φ(ρ) S*)`, whitened so that `φ̃(I/n) = I/n`.
pub struct NormalizedOracle<'a> {
    inner: &'a dyn StateMapOracle,
    whitening: ComplexMatrix,
    root: ComplexMatrix,
    image_of_mixed: DensityOperator,
    deviation: f64,
}

impl NormalizedOracle<'_> {
    /// `S = R⁻¹`.
    pub fn whitening(&self) -> &ComplexMatrix {
        &self.whitening
    }

    /// `R` with `R R* = φ(I/n)`, the spectral square root.
    pub fn root(&self) -> &ComplexMatrix {
        &self.root
    }

    /// `φ(I/n)`.
    pub fn image_of_mixed(&self) -> &DensityOperator {
        &self.image_of_mixed
    }

    /// Entrywise distance of `φ̃(I/n)` from `I/n`.
    pub fn deviation(&self) -> f64 {
        self.deviation
    }

    pub fn inner(&self) -> &dyn StateMapOracle {
        self.inner
    }

    fn whiten(&self, image: &DensityOperator) -> Result<DensityOperator> {
        DensityOperator::normalized_psd(&self.whitening.congruence(image.matrix()))
    }
}

impl StateMapOracle for NormalizedOracle<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn evaluate(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.whiten(&evaluate_checked(self.inner, rho)?)
    }

    fn is_reentrant(&self) -> bool {
        self.inner.is_reentrant()
    }
}

/// Queries `φ(I/n)` once and whitens the oracle by its inverse square root.
pub fn normalize_at_maximally_mixed(oracle: &dyn StateMapOracle) -> Result<NormalizedOracle<'_>> {
    let n = oracle.dim();
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let mixed = DensityOperator::maximally_mixed(n);
    let t0 = evaluate_checked(oracle, &mixed)?;
    let d: SpectralDecomposition = t0.hermitian().decompose()?;
    let min = d.min_eigenvalue();
    if !(min > IMAGE_SINGULAR) {
        return Err(Error::ImageSingular(min));
    }
    let root = d.apply_function(f64::sqrt);
    let whitening = d.apply_function(|x| 1.0 / x.sqrt());
    let mut norm = NormalizedOracle { inner: oracle, whitening, root, image_of_mixed: t0, deviation: 0.0 };
    let fixed = norm.whiten(&norm.image_of_mixed)?;
    norm.deviation = fixed.matrix().max_abs_diff(mixed.matrix());
    if !(norm.deviation <= NORMALIZATION_TOL) {
        return Err(Error::NormalizationFailed(norm.deviation));
    }
    Ok(norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{builtin, CountingOracle, FnOracle, MeasurementMap};
    use crate::state::C64;

    #[test]
    fn identity_is_already_normalized() {
        let id = builtin::identity(3);
        let norm = normalize_at_maximally_mixed(&*id).unwrap();
        let expected = ComplexMatrix::identity(3).scale_real(3f64.sqrt());
        assert!(norm.whitening().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn diagonal_example() {
        let map = MeasurementMap::new(ComplexMatrix::from_real_diagonal(&[2.0, 1.0]), false).unwrap();
        let norm = normalize_at_maximally_mixed(&map).unwrap();
        let t0 = ComplexMatrix::from_real_diagonal(&[0.8, 0.2]);
        assert!(norm.image_of_mixed().matrix().max_abs_diff(&t0) < 1e-15);
        let s = ComplexMatrix::from_diagonal(&[C64::new(5f64.sqrt() / 2.0, 0.0), C64::new(5f64.sqrt(), 0.0)]);
        assert!(norm.whitening().max_abs_diff(&s) < 1e-12);
        assert!((&(norm.root() * norm.root()) - &t0).frobenius_norm() < 1e-14);
        let out = norm.evaluate(&DensityOperator::maximally_mixed(2)).unwrap();
        assert!(out.matrix().max_abs_diff(DensityOperator::maximally_mixed(2).matrix()) < 1e-12);
    }

    #[test]
    fn singular_image_rejected() {
        let proj = builtin::constant(DensityOperator::basis_projection(3, 0));
        assert!(matches!(normalize_at_maximally_mixed(&*proj), Err(Error::ImageSingular(_))));
    }

    #[test]
    fn single_query() {
        let map = MeasurementMap::new(ComplexMatrix::from_real_diagonal(&[3.0, 1.0, 2.0]), true).unwrap();
        let counted = CountingOracle::new(map);
        normalize_at_maximally_mixed(&counted).unwrap();
        assert_eq!(counted.calls(), 1);
    }

    #[test]
    fn one_dimensional_rejected() {
        let o = FnOracle::new(1, |r: &DensityOperator| Ok(r.clone()));
        assert!(matches!(normalize_at_maximally_mixed(&o), Err(Error::InvalidDimension(1))));
    }
}
