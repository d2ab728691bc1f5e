use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{evaluate_checked, for_each_index};
use crate::json::MatrixJson;
use crate::maps::{FractionalLinearMap, StateMapOracle};
use crate::state::coords::{hermitian_to_coords, identity_coords};
use crate::state::random::{density_from_rng, stream_rng};
use crate::state::{DensityOperator, HermitianMatrix};

/// A second-smallest singular value ratio below this means the null space is
/// not one-dimensional.
pub const RANK_TOL: f64 = 1e-9;

pub const SCALE_CONVENTION: &str = "B = 0, f(I) = 0, f(I/n) + c = 1";

#[derive(Clone, Debug)]
pub struct PalesFit {
    pub map: FractionalLinearMap,
    /// Smallest over largest singular value of the homogeneous system.
    pub residual: f64,
    /// Second-smallest over largest singular value.
    pub rank_gap: f64,
    pub scale_convention: &'static str,
    pub samples: usize,
}

/// One observed `(ρ, φ(ρ))` pair in the on-disk sample format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePairJson {
    pub input: MatrixJson,
    pub output: MatrixJson,
}

impl SamplePairJson {
    pub fn new(input: &DensityOperator, output: &DensityOperator) -> Self {
        Self { input: MatrixJson::from_density(input), output: MatrixJson::from_density(output) }
    }

    pub fn to_pair(&self) -> Result<(DensityOperator, DensityOperator)> {
        Ok((self.input.to_density()?, self.output.to_density()?))
    }
}

/// `count` random states and their images.
pub fn sample_oracle<O: StateMapOracle + ?Sized>(
    oracle: &O,
    count: usize,
    seed: u64,
) -> Result<Vec<(DensityOperator, DensityOperator)>> {
    let n = oracle.dim();
    for_each_index(oracle, count, |k| {
        let rho = density_from_rng(&mut stream_rng(seed, k as u64), n);
        let image = evaluate_checked(oracle, &rho)?;
        Ok((rho, image))
    })
}

/// Smallest sample count accepted by [`fit_pales`].
pub fn min_pales_samples(n: usize) -> usize {
    n * n + 2
}

/// Orthonormal basis of the complement of `coords(I)`, as columns.
fn traceless_basis(n: usize) -> DMatrix<f64> {
    let nn = n * n;
    let e = DVector::from_vec(identity_coords(n)) / (n as f64).sqrt();
    // Householder reflection sending e to the first unit vector.
    let mut w = e.clone();
    w[0] -= 1.0;
    let ww = w.dot(&w);
    let h = if ww < 1e-300 { DMatrix::identity(nn, nn) } else { DMatrix::identity(nn, nn) - (&w * w.transpose()) * (2.0 / ww) };
    h.columns(1, nn - 1).into_owned()
}

/// Fits `φ(ρ) = (ψ(ρ) + B)/(f(ρ) + c)` to observed pairs.
///
/// On states `B` can be absorbed into `ψ` and the trace part of `f` into
/// `c`, so the fit fixes `B = 0` and `f(I) = 0`, leaving a homogeneous system
/// in `n⁴ + n²` unknowns whose null vector is scaled to `c = 1`.
pub fn fit_pales(samples: &[(DensityOperator, DensityOperator)]) -> Result<PalesFit> {
    let Some(first) = samples.first() else {
        return Err(Error::InsufficientSamples { needed: min_pales_samples(1), got: 0 });
    };
    let n = first.0.dim();
    let needed = min_pales_samples(n);
    if samples.len() < needed {
        return Err(Error::InsufficientSamples { needed, got: samples.len() });
    }
    let nn = n * n;
    let q = traceless_basis(n);
    let unknowns = nn * nn + nn;
    let mut a = DMatrix::<f64>::zeros(samples.len() * nn, unknowns);
    for (k, (rho, image)) in samples.iter().enumerate() {
        for d in [rho.dim(), image.dim()] {
            if d != n {
                return Err(Error::DimensionMismatch { expected: n, found: d });
            }
        }
        let x = DVector::from_vec(hermitian_to_coords(rho.hermitian()));
        let y = hermitian_to_coords(image.hermitian());
        let qx = q.transpose() * &x;
        for (ai, &ya) in y.iter().enumerate() {
            let row = k * nn + ai;
            // y_a (f(x) + c) − Σ_b ψ_ab x_b = 0, with ψ stored column-major.
            for b in 0..nn {
                a[(row, ai + b * nn)] = -x[b];
            }
            for m in 0..nn - 1 {
                a[(row, nn * nn + m)] = ya * qx[m];
            }
            a[(row, unknowns - 1)] = ya;
        }
    }
    let r = a.qr().r();
    let svd = r.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let max = svd.singular_values[order[order.len() - 1]];
    if !(max > 0.0) {
        return Err(Error::RankDeficient(0.0));
    }
    let residual = svd.singular_values[order[0]] / max;
    let rank_gap = svd.singular_values[order[1]] / max;
    if rank_gap < RANK_TOL {
        return Err(Error::RankDeficient(rank_gap));
    }
    let z = v_t.row(order[0]).transpose();
    let c = z[unknowns - 1];
    if c.abs() < 1e-300 {
        return Err(Error::DenominatorNonpositive(c));
    }
    let z = z / c;
    let psi = DMatrix::from_fn(nn, nn, |i, j| z[i + j * nn]);
    let f = &q * z.rows(nn * nn, nn - 1);
    let zero = HermitianMatrix::from_real_diagonal(&vec![0.0; n]);
    let map = FractionalLinearMap::new(n, psi, zero, f.as_slice().to_vec(), 1.0)?;
    Ok(PalesFit { map, residual, rank_gap, scale_convention: SCALE_CONVENTION, samples: samples.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{apply_fractional_linear, builtin, MeasurementMap};
    use crate::state::hermitian_trace_distance;
    use crate::state::random::{random_invertible, random_unitary};

    #[test]
    fn identity_fit() {
        let samples = sample_oracle(&*builtin::identity(2), 12, 0).unwrap();
        let fit = fit_pales(&samples).unwrap();
        assert!(fit.residual < 1e-12);
        let psi = fit.map.psi();
        assert!((psi - DMatrix::identity(4, 4)).abs().max() < 1e-10);
        assert!(fit.map.functional().iter().all(|x| x.abs() < 1e-10));
        assert_eq!(fit.map.constant(), 1.0);
    }

    #[test]
    fn measurement_fit_matches_denominator() {
        for transposed in [false, true] {
            let map = MeasurementMap::new(random_invertible(3, 1, 100.0).unwrap(), transposed).unwrap();
            let fit = fit_pales(&sample_oracle(&map, 30, 0).unwrap()).unwrap();
            assert!(fit.residual <= 1e-8, "{}", fit.residual);
            for (rho, image) in sample_oracle(&map, 20, 99).unwrap() {
                let out = apply_fractional_linear(&fit.map, &rho).unwrap();
                assert!(hermitian_trace_distance(&out, image.hermitian()).unwrap() < 1e-7);
                // Denominator proportional to tr(M ρ' M*), with f(I/n) + c = 1.
                let ratio = fit.map.denominator(&rho).unwrap() / map.weight(&rho).unwrap();
                let at_mixed = map.weight(&DensityOperator::maximally_mixed(3)).unwrap();
                assert!((ratio * at_mixed - 1.0).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn unitary_fit_is_affine() {
        let map = MeasurementMap::new(random_unitary(2, 3), false).unwrap();
        let fit = fit_pales(&sample_oracle(&map, 10, 0).unwrap()).unwrap();
        assert!(fit.map.relative_functional_norm() <= 1e-8);
    }

    #[test]
    fn too_few_or_degenerate_samples() {
        let samples = sample_oracle(&*builtin::identity(2), 5, 0).unwrap();
        assert!(matches!(fit_pales(&samples), Err(Error::InsufficientSamples { needed: 6, got: 5 })));
        let rho = DensityOperator::maximally_mixed(2);
        let repeated = vec![(rho.clone(), rho); 10];
        assert!(matches!(fit_pales(&repeated), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn sample_json_round_trip() {
        let (rho, image) = sample_oracle(&*builtin::transpose(2), 1, 0).unwrap().remove(0);
        let json = crate::json::to_json_string(&SamplePairJson::new(&rho, &image)).unwrap();
        let back: SamplePairJson = crate::json::from_json_str(&json).unwrap();
        assert_eq!(back.to_pair().unwrap(), (rho, image));
    }
}
