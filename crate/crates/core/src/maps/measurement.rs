use crate::error::{Error, Result};
use crate::state::matrix::{ComplexMatrix, C64};
use crate::state::random::{density_from_rng, stream_rng};
use crate::state::{trace_distance, transpose_in_standard_basis, DensityOperator};

/// Ratio `σ_min/σ_max` below which `M` counts as singular.
pub const SINGULARITY_RATIO: f64 = 1e-12;

/// Seed for the sample states of [`maps_equal_up_to_scale`].
const EQUALITY_SEED: u64 = 0x5eed_0f_5ca1e;

/// `ρ ↦ MρM*/tr(MρM*)`, or the same applied to `ρ^T` when `transposed` is set.
///
/// `M` is only defined up to a nonzero complex factor. The stored
/// representative has unit Frobenius norm and its first nonzero entry
/// (row-major) real and positive.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementMap {
    m: ComplexMatrix,
    transposed: bool,
}

impl MeasurementMap {
    pub fn new(m: ComplexMatrix, transposed: bool) -> Result<Self> {
        let sv = m.singular_values();
        let ratio = sv[sv.len() - 1] / sv[0];
        if !(ratio > SINGULARITY_RATIO) {
            return Err(Error::NumericallySingular(ratio));
        }
        Ok(Self { m: canonicalize(&m), transposed })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(ComplexMatrix::identity(n), false).expect("identity is invertible")
    }

    /// The transpose map `ρ ↦ ρ^T`.
    pub fn transpose(n: usize) -> Self {
        Self::new(ComplexMatrix::identity(n), true).expect("identity is invertible")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn transposed(&self) -> bool {
        self.transposed
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// `tr(M ρ' M*)`, the weight of `ρ` under this map.
    pub fn weight(&self, rho: &DensityOperator) -> Result<f64> {
        Ok(self.numerator(rho)?.trace().re)
    }

    fn numerator(&self, rho: &DensityOperator) -> Result<ComplexMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.dim() });
        }
        Ok(if self.transposed {
            self.m.congruence(transpose_in_standard_basis(rho).matrix())
        } else {
            self.m.congruence(rho.matrix())
        })
    }
}

fn canonicalize(m: &ComplexMatrix) -> ComplexMatrix {
    let norm = m.frobenius_norm();
    let n = m.dim();
    let threshold = 1e-12 * norm;
    let k = (0..n * n).find(|&k| m.get(k / n, k % n).norm() > threshold).expect("nonzero matrix");
    let pivot = m.get(k / n, k % n);
    // Already canonical input is returned untouched so that serialization round-trips exactly.
    if pivot.im == 0.0 && pivot.re > 0.0 && (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
        return m.clone();
    }
    let phase = pivot.conj() / pivot.norm();
    let scaled = m.scale(phase / norm);
    ComplexMatrix::from_fn(n, |i, j| {
        if i * n + j == k {
            C64::new(pivot.norm() / norm, 0.0)
        } else {
            scaled.get(i, j)
        }
    })
}

pub fn apply_measurement(map: &MeasurementMap, rho: &DensityOperator) -> Result<DensityOperator> {
    let num = map.numerator(rho)?;
    let tr = num.trace().re;
    if !(tr > 1e-14) {
        return Err(Error::NumericallySingular(tr));
    }
    DensityOperator::normalized_psd(&num)
}

/// Map with `invert_map(φ)(φ(ρ)) = ρ` for every state.
pub fn invert_map(map: &MeasurementMap) -> Result<MeasurementMap> {
    let inv = map.m.try_inverse().ok_or(Error::NumericallySingular(0.0))?;
    // (M ρ^T M*)^T = conj(M) ρ conj(M)*, so the transposed branch inverts through conj(M)^{-1}.
    let inv = if map.transposed { inv.conj() } else { inv };
    MeasurementMap::new(inv, map.transposed)
}

/// The single map acting as `outer ∘ inner`.
pub fn compose(outer: &MeasurementMap, inner: &MeasurementMap) -> Result<MeasurementMap> {
    if outer.dim() != inner.dim() {
        return Err(Error::DimensionMismatch { expected: outer.dim(), found: inner.dim() });
    }
    // A (B X B*)^T A* = (A conj(B)) X^T (A conj(B))*.
    let b = if outer.transposed { inner.m.conj() } else { inner.m.clone() };
    MeasurementMap::new(&outer.m * &b, outer.transposed ^ inner.transposed)
}

/// True when the flags agree and both maps send `samples` random states to
/// within trace distance `tol` of each other.
pub fn maps_equal_up_to_scale(a: &MeasurementMap, b: &MeasurementMap, samples: usize, tol: f64) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    if a.transposed != b.transposed {
        return Ok(false);
    }
    for k in 0..samples {
        let rho = density_from_rng(&mut stream_rng(EQUALITY_SEED, k as u64), a.dim());
        if trace_distance(&apply_measurement(a, &rho)?, &apply_measurement(b, &rho)?)? > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Segment parameter `s = t w1 / (t w1 + (1 − t) w2)` with `w_i = tr(M ρ_i' M*)`.
pub fn segment_reparametrization(map: &MeasurementMap, rho1: &DensityOperator, rho2: &DensityOperator, t: f64) -> Result<f64> {
    let w1 = map.weight(rho1)?;
    let w2 = map.weight(rho2)?;
    Ok(t * w1 / (t * w1 + (1.0 - t) * w2))
}

/// Phase-free comparison of two matrices: `min_λ ‖a − λ b‖_F / ‖a‖_F`.
pub fn scale_deviation(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let ab: C64 = a.as_dmatrix().iter().zip(b.as_dmatrix().iter()).map(|(x, y)| y.conj() * x).sum();
    let bb = b.frobenius_norm().powi(2);
    let lambda = ab / bb;
    (a - &b.scale(lambda)).frobenius_norm() / a.frobenius_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::random::{random_density, random_invertible, random_pure, random_unitary};
    use crate::state::validate_density;
    use crate::state::density::TOL_PSD;
    use proptest::prelude::*;

    fn random_map(n: usize, seed: u64, transposed: bool) -> MeasurementMap {
        MeasurementMap::new(random_invertible(n, seed, 100.0).unwrap(), transposed).unwrap()
    }

    #[test]
    fn identity_map_fixes_states() {
        let rho = random_density(3, 5);
        let out = apply_measurement(&MeasurementMap::identity(3), &rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn diagonal_hand_value() {
        // M(I/2)M* = diag(2, 1/2), trace 5/2.
        let map = MeasurementMap::new(ComplexMatrix::from_real_diagonal(&[2.0, 1.0]), false).unwrap();
        let out = apply_measurement(&map, &DensityOperator::maximally_mixed(2)).unwrap();
        let expected = DensityOperator::diagonal(&[0.8, 0.2]).unwrap();
        assert!(out.matrix().max_abs_diff(expected.matrix()) < 1e-15);
    }

    #[test]
    fn unitary_congruence_matches_direct_form() {
        let u = random_unitary(4, 3);
        let map = MeasurementMap::new(u.clone(), false).unwrap();
        for seed in 0..20 {
            let rho = random_density(4, seed);
            let direct = u.congruence(rho.matrix());
            let out = apply_measurement(&map, &rho).unwrap();
            assert!(out.matrix().max_abs_diff(&direct) < 1e-13);
        }
    }

    #[test]
    fn singular_rejected() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(MeasurementMap::new(m, false), Err(Error::NumericallySingular(_))));
    }

    #[test]
    fn canonical_representative() {
        let m = random_invertible(3, 8, 100.0).unwrap();
        let a = MeasurementMap::new(m.clone(), false).unwrap();
        let b = MeasurementMap::new(m.scale(C64::from_polar(3.7, 1.1)), false).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-14);
        assert!((a.matrix().frobenius_norm() - 1.0).abs() < 1e-14);
        let first = a.matrix().get(0, 0);
        assert!(first.im.abs() < 1e-15 && first.re > 0.0);
    }

    #[test]
    fn invert_examples() {
        let id = MeasurementMap::identity(3);
        assert_eq!(invert_map(&id).unwrap(), id);
        for seed in 0..100 {
            let transposed = seed % 2 == 1;
            let map = random_map(3, seed, transposed);
            let inv = invert_map(&map).unwrap();
            assert_eq!(inv.transposed(), transposed);
            let rho = random_density(3, 1000 + seed);
            let back = apply_measurement(&inv, &apply_measurement(&map, &rho).unwrap()).unwrap();
            assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-10, "seed {seed}");
        }
    }

    #[test]
    fn compose_examples() {
        for (ta, tb) in [(false, false), (false, true), (true, false), (true, true)] {
            let a = random_map(3, 1, ta);
            let b = random_map(3, 2, tb);
            let ab = compose(&a, &b).unwrap();
            assert_eq!(ab.transposed(), ta ^ tb);
            for seed in 0..50 {
                let rho = random_density(3, seed);
                let direct = apply_measurement(&a, &apply_measurement(&b, &rho).unwrap()).unwrap();
                let composed = apply_measurement(&ab, &rho).unwrap();
                assert!(direct.matrix().max_abs_diff(composed.matrix()) < 1e-10);
            }
            let id = compose(&a, &invert_map(&a).unwrap()).unwrap();
            for seed in 0..50 {
                let rho = random_density(3, seed);
                let out = apply_measurement(&id, &rho).unwrap();
                assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-10);
            }
        }
        let u = random_unitary(3, 4);
        let v = random_unitary(3, 5);
        let uv = compose(&MeasurementMap::new(u.clone(), false).unwrap(), &MeasurementMap::new(v.clone(), false).unwrap()).unwrap();
        assert!(maps_equal_up_to_scale(&uv, &MeasurementMap::new(&u * &v, false).unwrap(), 20, 1e-12).unwrap());
        let t = MeasurementMap::transpose(3);
        assert!(!compose(&t, &t).unwrap().transposed());
    }

    #[test]
    fn equality_up_to_scale_examples() {
        let m = random_invertible(3, 12, 100.0).unwrap();
        // Skip canonicalization to compare genuinely different representatives.
        let a = MeasurementMap { m: m.clone(), transposed: false };
        let b = MeasurementMap { m: m.scale(C64::new(3.7, 0.0)), transposed: false };
        let c = MeasurementMap { m: m.scale(C64::from_polar(1.0, 0.7)), transposed: false };
        assert!(maps_equal_up_to_scale(&a, &b, 50, 1e-12).unwrap());
        assert!(maps_equal_up_to_scale(&a, &c, 50, 1e-12).unwrap());
        let d1 = MeasurementMap::new(ComplexMatrix::from_real_diagonal(&[2.0, 1.0]), false).unwrap();
        let d2 = MeasurementMap::new(ComplexMatrix::from_real_diagonal(&[1.0, 2.0]), false).unwrap();
        // At diag(1,0) both give diag(1,0); the maps still differ elsewhere.
        let e0 = DensityOperator::diagonal(&[1.0, 0.0]).unwrap();
        assert_eq!(apply_measurement(&d1, &e0).unwrap(), apply_measurement(&d2, &e0).unwrap());
        assert!(!maps_equal_up_to_scale(&d1, &d2, 10, 1e-8).unwrap());
        let t = MeasurementMap::new(m, true).unwrap();
        assert!(!maps_equal_up_to_scale(&a, &t, 10, 1e-8).unwrap());
    }

    #[test]
    fn pure_states_stay_pure() {
        for seed in 0..200 {
            let map = random_map(4, seed, seed % 2 == 0);
            let p = random_pure(4, seed + 7).to_density();
            let out = apply_measurement(&map, &p).unwrap();
            assert!(out.purity() >= 1.0 - 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn output_is_a_state(n in 2usize..6, seed in any::<u64>(), transposed in any::<bool>()) {
            let map = random_map(n, seed, transposed);
            let rho = random_density(n, seed ^ 0xabc);
            let out = apply_measurement(&map, &rho).unwrap();
            let min = out.eigenvalues().unwrap().last().copied().unwrap();
            prop_assert!(min >= -TOL_PSD);
            prop_assert!(validate_density(out.hermitian().clone()).is_ok());
        }

        #[test]
        fn segment_law(n in 2usize..6, seed in any::<u64>(), transposed in any::<bool>(), t in 0.0f64..=1.0) {
            let map = random_map(n, seed, transposed);
            let r1 = random_density(n, seed.wrapping_add(1));
            let r2 = random_density(n, seed.wrapping_add(2));
            let lhs = apply_measurement(&map, &crate::state::segment_point(&r1, &r2, t).unwrap()).unwrap();
            let s = segment_reparametrization(&map, &r1, &r2, t).unwrap();
            let rhs = crate::state::segment_point(
                &apply_measurement(&map, &r1).unwrap(),
                &apply_measurement(&map, &r2).unwrap(),
                s,
            ).unwrap();
            prop_assert!(lhs.matrix().max_abs_diff(rhs.matrix()) <= 1e-10);
        }
    }
}
