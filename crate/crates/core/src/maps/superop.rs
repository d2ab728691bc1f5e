use nalgebra::DMatrix;

use super::measurement::MeasurementMap;
use crate::error::{Error, Result};
use crate::state::coords::hermitian_basis;
use crate::state::eigen::eigenvalues;
use crate::state::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::state::HermitianMatrix;

/// Linear map on `n × n` matrices acting on column-stacked vectors:
/// `vec(X)[i + j n] = X[i, j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    n: usize,
    action: DMatrix<C64>,
}

impl Superoperator {
    /// Checks the shape and that Hermitian inputs map to Hermitian outputs.
    pub fn new(n: usize, action: DMatrix<C64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if action.nrows() != n * n || action.ncols() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: action.nrows().max(action.ncols()) });
        }
        let s = Self { n, action };
        for h in hermitian_basis(n) {
            let dev = s.apply(h.matrix()).hermitian_deviation();
            if dev > 1e-10 {
                return Err(Error::NotHermitian(dev));
            }
        }
        Ok(s)
    }

    pub fn identity(n: usize) -> Self {
        Self { n, action: DMatrix::identity(n * n, n * n) }
    }

    /// `X ↦ X^T`.
    pub fn transpose(n: usize) -> Self {
        Self { n, action: swap(n) }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn action(&self) -> &DMatrix<C64> {
        &self.action
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = self.n;
        let v = vectorize(x);
        let out = &self.action * v;
        ComplexMatrix::from_fn(n, |i, j| out[i + j * n])
    }

    /// `self ∘ inner`.
    pub fn then_after(&self, inner: &Superoperator) -> Superoperator {
        Superoperator { n: self.n, action: &self.action * &inner.action }
    }
}

fn vectorize(x: &ComplexMatrix) -> nalgebra::DVector<C64> {
    let n = x.dim();
    nalgebra::DVector::from_fn(n * n, |k, _| x.get(k % n, k / n))
}

/// Permutation `vec(X) ↦ vec(X^T)`.
fn swap(n: usize) -> DMatrix<C64> {
    let mut p = DMatrix::from_element(n * n, n * n, ZERO);
    for i in 0..n {
        for j in 0..n {
            p[(j + i * n, i + j * n)] = ONE;
        }
    }
    p
}

/// `X ↦ M X M*`, or `X ↦ M X^T M*` on the transposed branch.
pub fn linearize(map: &MeasurementMap) -> Superoperator {
    let m = map.matrix();
    let n = map.dim();
    let congruence = m.conj().kron(m).into_dmatrix();
    let action = if map.transposed() { congruence * swap(n) } else { congruence };
    Superoperator { n, action }
}

/// Choi matrix `Σ_ij E_ij ⊗ Φ(E_ij)`.
#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    base: HermitianMatrix,
}

impl ChoiMatrix {
    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigenvalues(&self.base)
    }

    /// Smallest eigenvalue divided by the spectral norm.
    pub fn normalized_min_eigenvalue(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        let norm = ev.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if norm == 0.0 {
            return Ok(0.0);
        }
        Ok(ev[ev.len() - 1] / norm)
    }

    /// Rescaled to unit spectral norm.
    pub fn normalized(&self) -> Result<ChoiMatrix> {
        let ev = self.eigenvalues()?;
        let norm = ev.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if norm == 0.0 {
            return Ok(self.clone());
        }
        Ok(ChoiMatrix { base: self.base.scale(1.0 / norm) })
    }
}

pub fn choi_matrix(s: &Superoperator) -> ChoiMatrix {
    let n = s.n;
    // C[(i, k), (j, l)] = Φ(E_ij)[k, l] = action[k + l n, i + j n].
    let c = ComplexMatrix::from_fn(n * n, |row, col| {
        let (i, k) = (row / n, row % n);
        let (j, l) = (col / n, col % n);
        s.action[(k + l * n, i + j * n)]
    });
    ChoiMatrix { base: HermitianMatrix::hermitize(&c) }
}

/// Minimum eigenvalue of the Choi matrix is at least `−tol`.
pub fn is_completely_positive(c: &ChoiMatrix, tol: f64) -> Result<bool> {
    let ev = c.eigenvalues()?;
    Ok(ev[ev.len() - 1] >= -tol)
}
