
use super::eigen::{eigenvalues, spectral_decompose, SpectralDecomposition};
use super::matrix::{vector_norm, ComplexMatrix, C64};
use crate::error::{Error, Result};

pub const TOL_HERM: f64 = 1e-12;
pub const TOL_PSD: f64 = 1e-10;
pub const TOL_TRACE: f64 = 1e-12;
pub const TOL_UNIT: f64 = 1e-12;
pub const TOL_FRAME: f64 = 1e-10;

/// Square matrix equal to its conjugate transpose (entrywise within [`TOL_HERM`]).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    base: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn new(base: ComplexMatrix) -> Result<Self> {
        let dev = base.hermitian_deviation();
        if dev > TOL_HERM || !dev.is_finite() {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self::hermitize(&base))
    }

    /// Hermitian part `(A + A*)/2` of an arbitrary matrix.
    pub fn hermitize(base: &ComplexMatrix) -> Self {
        Self { base: ComplexMatrix::wrap(base.hermitian_part()) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self { base: ComplexMatrix::from_real_diagonal(diag) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.base
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn trace(&self) -> f64 {
        self.base.trace().re
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigenvalues(self)
    }

    pub fn decompose(&self) -> Result<SpectralDecomposition> {
        spectral_decompose(self)
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|x| x.abs()).sum())
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        Self { base: &self.base + &other.base }
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        Self { base: &self.base - &other.base }
    }

    pub fn scale(&self, factor: f64) -> HermitianMatrix {
        Self { base: self.base.scale_real(factor) }
    }
}

/// A quantum state: positive semidefinite with unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    base: HermitianMatrix,
}

/// Wraps a Hermitian matrix as a state after checking positivity and trace.
pub fn validate_density(candidate: HermitianMatrix) -> Result<DensityOperator> {
    let tr = candidate.matrix().trace();
    if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
        return Err(Error::TraceNotOne { re: tr.re, im: tr.im });
    }
    let min = candidate
        .eigenvalues()?
        .last()
        .copied()
        .expect("non-empty spectrum");
    if min < -TOL_PSD {
        return Err(Error::NotPositive(min));
    }
    Ok(DensityOperator { base: candidate })
}

impl DensityOperator {
    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        validate_density(HermitianMatrix::new(m)?)
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        validate_density(HermitianMatrix::from_real_diagonal(probs))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self { base: HermitianMatrix::from_real_diagonal(&vec![1.0 / n as f64; n]) }
    }

    /// The projection onto basis vector `e_k`.
    pub fn basis_projection(n: usize, k: usize) -> Self {
        let mut d = vec![0.0; n];
        d[k] = 1.0;
        Self { base: HermitianMatrix::from_real_diagonal(&d) }
    }

    /// Hermitian part of `m` rescaled to unit trace, without a spectral check.
    ///
    /// Only for matrices that are positive semidefinite by construction (a
    /// congruence of a state, a convex combination of states).
    pub(crate) fn normalized_psd(m: &ComplexMatrix) -> Result<Self> {
        let h = HermitianMatrix::hermitize(m);
        let tr = h.trace();
        if !(tr > 1e-14) {
            return Err(Error::NumericallySingular(tr));
        }
        Ok(Self { base: h.scale(1.0 / tr) })
    }

    /// Clips eigenvalues below zero and renormalizes the trace.
    ///
    /// Accepts any Hermitian input whose negative part is round-off
    /// (min eigenvalue ≥ −[`TOL_PSD`] relative to the trace).
    pub fn from_hermitian_clipped(h: &HermitianMatrix) -> Result<Self> {
        let d = h.decompose()?;
        let tr: f64 = d.eigenvalues.iter().sum();
        if !(tr > 1e-14) {
            return Err(Error::TraceNotOne { re: tr, im: 0.0 });
        }
        let min = d.min_eigenvalue() / tr;
        if min < -TOL_PSD {
            return Err(Error::NotPositive(min));
        }
        let clipped: f64 = d.eigenvalues.iter().map(|&x| x.max(0.0)).sum();
        let m = d.apply_function(|x| x.max(0.0) / clipped);
        Ok(Self { base: HermitianMatrix::hermitize(&m) })
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.base.matrix()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        let m = self.matrix();
        m.inner_re(m)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.base.eigenvalues()
    }
}

/// Unit vector in `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    vector: Vec<C64>,
}

impl PureState {
    pub fn new(vector: Vec<C64>) -> Result<Self> {
        if vector.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        let norm = vector_norm(&vector);
        if (norm - 1.0).abs() > TOL_UNIT {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { vector })
    }

    /// Normalizes a nonzero vector.
    pub fn normalize(mut vector: Vec<C64>) -> Result<Self> {
        let norm = vector_norm(&vector);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        vector.iter_mut().for_each(|z| *z /= norm);
        Ok(Self { vector })
    }

    pub fn vector(&self) -> &[C64] {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    /// The projection `x x*`.
    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            base: HermitianMatrix::hermitize(&ComplexMatrix::outer(&self.vector)),
        }
    }
}

/// `n` mutually orthogonal rank-one projections.
#[derive(Clone, Debug)]
pub struct ProjectionFrame {
    pub projections: Vec<DensityOperator>,
}

impl ProjectionFrame {
    /// Frame of the columns of a unitary.
    pub fn from_unitary(u: &ComplexMatrix) -> Self {
        let projections = (0..u.dim())
            .map(|j| DensityOperator {
                base: HermitianMatrix::hermitize(&ComplexMatrix::outer(&u.column(j))),
            })
            .collect();
        Self { projections }
    }

    pub fn standard(n: usize) -> Self {
        Self::from_unitary(&ComplexMatrix::identity(n))
    }

    /// Largest entrywise deviation from `P_i P_j = δ_ij P_i` and `Σ P_i = I`.
    /// Infinite when the frame does not have exactly `n` members of dimension `n`.
    pub fn deviation(&self) -> f64 {
        let (gram, sum) = self.deviations();
        gram.max(sum)
    }

    /// `(gram deviation, sum deviation)`, both entrywise maxima.
    pub fn deviations(&self) -> (f64, f64) {
        let k = self.projections.len();
        let Some(first) = self.projections.first() else {
            return (f64::INFINITY, f64::INFINITY);
        };
        let n = first.dim();
        if k != n || self.projections.iter().any(|p| p.dim() != n) {
            return (f64::INFINITY, f64::INFINITY);
        }
        let mut gram = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let pi = self.projections[i].matrix();
                let prod = pi * self.projections[j].matrix();
                let target = if i == j { pi.clone() } else { ComplexMatrix::zeros(n) };
                gram = gram.max(prod.max_abs_diff(&target));
            }
        }
        let mut total = ComplexMatrix::zeros(n);
        for p in &self.projections {
            total = &total + p.matrix();
        }
        (gram, total.max_abs_diff(&ComplexMatrix::identity(n)))
    }
}

pub fn validate_frame(frame: &ProjectionFrame) -> bool {
    frame.deviation() <= TOL_FRAME
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}

/// `t ρ1 + (1 − t) ρ2`.
pub fn segment_point(rho1: &DensityOperator, rho2: &DensityOperator, t: f64) -> Result<DensityOperator> {
    check_dims(rho1.dim(), rho2.dim())?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::ParameterOutOfRange(t));
    }
    let m = &rho1.matrix().scale_real(t) + &rho2.matrix().scale_real(1.0 - t);
    Ok(DensityOperator { base: HermitianMatrix::hermitize(&m) })
}

/// Half the trace norm of `ρ1 − ρ2`.
pub fn trace_distance(rho1: &DensityOperator, rho2: &DensityOperator) -> Result<f64> {
    check_dims(rho1.dim(), rho2.dim())?;
    hermitian_trace_distance(rho1.hermitian(), rho2.hermitian())
}

/// Half the trace norm of a difference of Hermitian matrices.
pub fn hermitian_trace_distance(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    Ok(0.5 * a.sub(b).trace_norm()?)
}

/// Entrywise transpose in the computational basis.
pub fn transpose_in_standard_basis(rho: &DensityOperator) -> DensityOperator {
    DensityOperator {
        base: HermitianMatrix { base: rho.matrix().transpose() },
    }
}
