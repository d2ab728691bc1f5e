use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense square complex matrix.
///
/// Holds the operators of the toolkit (`M`, unitaries, whitening factors).
/// The dimension is at least one and the storage is always square.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn new(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if inner.nrows() != inner.ncols() {
            return Err(Error::DimensionMismatch {
                expected: inner.nrows(),
                found: inner.ncols(),
            });
        }
        Ok(Self(inner))
    }

    /// Caller guarantees `inner` is square and non-empty.
    pub(crate) fn wrap(inner: DMatrix<C64>) -> Self {
        debug_assert!(inner.nrows() == inner.ncols() && inner.nrows() > 0);
        Self(inner)
    }

    pub fn zeros(n: usize) -> Self {
        Self::wrap(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self::wrap(DMatrix::identity(n, n))
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::wrap(DMatrix::from_fn(n, n, f))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO })
    }

    /// Builds a matrix from row-major real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if im.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: im.len() });
        }
        for row in re.iter().chain(im) {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
        }
        Ok(Self::from_fn(n, |i, j| C64::new(re[i][j], im[i][j])))
    }

    /// Rank-one outer product `x x*`.
    pub fn outer(x: &[C64]) -> Self {
        Self::from_fn(x.len(), |i, j| x[i] * x[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    /// `self · x · self*`.
    pub fn congruence(&self, x: &ComplexMatrix) -> ComplexMatrix {
        Self(&self.0 * &x.0 * self.0.adjoint())
    }

    pub fn try_inverse(&self) -> Option<Self> {
        self.0.clone().try_inverse().map(Self)
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.0.clone().svd(false, false).singular_values.iter().copied().collect();
        values.sort_by(|a, b| b.total_cmp(a));
        values
    }

    /// Ratio `σ_max / σ_min`; infinite for an exactly singular matrix.
    pub fn condition_number(&self) -> f64 {
        let sv = self.singular_values();
        let smax = sv[0];
        let smin = sv[sv.len() - 1];
        if smin == 0.0 {
            f64::INFINITY
        } else {
            smax / smin
        }
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(A + A*) / 2`, exactly Hermitian in floating point.
    pub(crate) fn hermitian_part(&self) -> DMatrix<C64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self.0[(i, i)].re, 0.0)
            } else {
                (self.0[(i, j)] + self.0[(j, i)].conj()) * 0.5
            }
        })
    }

    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        Self(self.0.kronecker(&other.0))
    }

    /// Real part of `tr(A* B)`, the Frobenius inner product.
    pub fn inner_re(&self, other: &ComplexMatrix) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<C64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let n = columns.len();
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if let Some(bad) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
        }
        Ok(Self::from_fn(n, |i, j| columns[j][i]))
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

/// Euclidean norm of a complex vector.
pub fn vector_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `x* y`.
pub fn vector_dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}
