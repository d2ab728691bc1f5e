//! Cyclic Jacobi eigensolver for dense Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies the classical real Jacobi rotation, so the
//! iteration is the textbook symmetric algorithm lifted to `C^n`. Convergence
//! is unconditional; the sweep budget only guards against non-finite input.

use nalgebra::DMatrix;

use super::matrix::{ComplexMatrix, C64, ZERO};
use super::HermitianMatrix;
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    /// `V diag(g(λ)) V*`.
    pub fn apply_function(&self, g: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = self.eigenvectors.as_dmatrix();
        let n = v.nrows();
        let mut scaled = v.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = g(lambda);
            for i in 0..n {
                scaled[(i, k)] *= w;
            }
        }
        ComplexMatrix::wrap(scaled * v.adjoint())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

pub fn spectral_decompose(a: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let (values, vectors) = jacobi_eigh(a.matrix().as_dmatrix())?;
    Ok(SpectralDecomposition {
        eigenvalues: values,
        eigenvectors: ComplexMatrix::wrap(vectors),
    })
}

/// Eigenvalues only; skips the accumulation of the rotation matrix.
pub fn eigenvalues(a: &HermitianMatrix) -> Result<Vec<f64>> {
    Ok(jacobi(a.matrix().as_dmatrix(), false)?.0)
}

pub(crate) fn jacobi_eigh(a: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let (values, vectors) = jacobi(a, true)?;
    Ok((values, vectors.expect("vectors requested")))
}

fn off_diagonal_norm(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += a[(i, j)].norm_sqr();
        }
    }
    (2.0 * sum).sqrt()
}

fn jacobi(input: &DMatrix<C64>, want_vectors: bool) -> Result<(Vec<f64>, Option<DMatrix<C64>>)> {
    let n = input.nrows();
    let mut a = input.clone();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let mut v = want_vectors.then(|| DMatrix::<C64>::identity(n, n));

    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !scale.is_finite() {
        return Err(Error::ConvergenceFailure { sweeps: 0, off: scale });
    }
    let threshold = f64::EPSILON * scale * 1e-2;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= threshold || off == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::ConvergenceFailure { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, v.as_mut(), p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = v.map(|v| DMatrix::from_fn(n, n, |i, k| v[(i, order[k])]));
    Ok((values, vectors))
}

fn rotate(a: &mut DMatrix<C64>, v: Option<&mut DMatrix<C64>>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip rotations whose effect is below round-off of the diagonal.
    if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = apq / r;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // Block of the unitary: diag(1, conj(phase)) · [[c, s], [-s, c]].
    let vpp = C64::new(c, 0.0);
    let vpq = C64::new(s, 0.0);
    let vqp = phase.conj() * (-s);
    let vqq = phase.conj() * c;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * vpp + akq * vqp;
        a[(k, q)] = akp * vpq + akq * vqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = vpp.conj() * apk + vqp.conj() * aqk;
        a[(q, k)] = vpq.conj() * apk + vqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    if let Some(v) = v {
        for k in 0..n {
            let vkp = v[(k, p)];
            let vkq = v[(k, q)];
            v[(k, p)] = vkp * vpp + vkq * vqp;
            v[(k, q)] = vkp * vpq + vkq * vqq;
        }
    }
}
