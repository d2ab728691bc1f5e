//! Real coordinates for Hermitian matrices.
//!
//! Basis order: `E_ii` for each `i`, then `(E_ij + E_ji)/√2` for `i < j`
//! (row-major), then `(iE_ij − iE_ji)/√2` for `i < j`. The basis is
//! orthonormal under `⟨A, B⟩ = tr(AB)`, so `tr(AB) = a · b`.

use std::f64::consts::SQRT_2;

use super::density::HermitianMatrix;
use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
}

pub fn hermitian_to_coords(h: &HermitianMatrix) -> Vec<f64> {
    matrix_to_coords(h.matrix())
}

/// Coordinates of the Hermitian part of `m`.
pub(crate) fn matrix_to_coords(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut out = Vec::with_capacity(n * n);
    out.extend((0..n).map(|i| m.get(i, i).re));
    for (i, j) in pairs(n) {
        out.push(SQRT_2 * 0.5 * (m.get(i, j).re + m.get(j, i).re));
    }
    for (i, j) in pairs(n) {
        out.push(SQRT_2 * 0.5 * (m.get(i, j).im - m.get(j, i).im));
    }
    out
}

pub fn coords_to_hermitian(n: usize, coords: &[f64]) -> Result<HermitianMatrix> {
    if coords.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, found: coords.len() });
    }
    let mut m = ComplexMatrix::zeros(n).into_dmatrix();
    for i in 0..n {
        m[(i, i)] = C64::new(coords[i], 0.0);
    }
    let offset = n * (n - 1) / 2;
    for (k, (i, j)) in pairs(n).enumerate() {
        let z = C64::new(coords[n + k], coords[n + offset + k]) / SQRT_2;
        m[(i, j)] = z;
        m[(j, i)] = z.conj();
    }
    Ok(HermitianMatrix::hermitize(&ComplexMatrix::new(m)?))
}

/// The orthonormal Hermitian basis in coordinate order.
pub fn hermitian_basis(n: usize) -> Vec<HermitianMatrix> {
    (0..n * n)
        .map(|k| {
            let mut e = vec![0.0; n * n];
            e[k] = 1.0;
            coords_to_hermitian(n, &e).expect("length n²")
        })
        .collect()
}

/// Coordinates of the identity matrix.
pub fn identity_coords(n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    c[..n].iter_mut().for_each(|x| *x = 1.0);
    c
}
