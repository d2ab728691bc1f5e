//! Seeded generators: Ginibre states, Haar unitaries, conditioned invertibles.
//!
//! Every generator is a pure function of `(seed, stream)`. Streams use the
//! ChaCha block counter split, so sample `k` of a batch never depends on how
//! many samples were drawn before it.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::density::{DensityOperator, HermitianMatrix, PureState};
use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

pub const RESAMPLE_BUDGET: usize = 10_000;

/// Independent generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian: real and imaginary parts `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| complex_gaussian(rng))
}

/// `G G* / tr(G G*)` for a Ginibre matrix `G`.
pub fn density_from_rng<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityOperator {
    let g = ginibre(rng, n);
    let gg = &g * &g.adjoint();
    DensityOperator::normalized_psd(&gg).expect("Ginibre product has positive trace")
}

pub fn pure_from_rng<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PureState {
    loop {
        let v: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        if let Ok(p) = PureState::normalize(v) {
            return p;
        }
    }
}

/// Haar-distributed unitary from the QR factorization of a Ginibre matrix.
pub fn unitary_from_rng<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = ginibre(rng, n).into_dmatrix();
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::wrap(q)
}

pub fn random_density(n: usize, seed: u64) -> DensityOperator {
    density_from_rng(&mut stream_rng(seed, 0), n)
}

pub fn random_pure(n: usize, seed: u64) -> PureState {
    pure_from_rng(&mut stream_rng(seed, 0), n)
}

pub fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
    unitary_from_rng(&mut stream_rng(seed, 0), n)
}

/// GUE-like Hermitian matrix `(G + G*)/2`.
pub fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
    HermitianMatrix::hermitize(&ginibre(&mut stream_rng(seed, 0), n))
}

/// Ginibre matrix resampled until its condition number is at most `max_condition`.
pub fn random_invertible(n: usize, seed: u64, max_condition: f64) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if !(max_condition > 1.0) {
        return Err(Error::InvalidInput(format!("max_condition must exceed 1, got {max_condition}")));
    }
    let mut rng = stream_rng(seed, 0);
    for _ in 0..RESAMPLE_BUDGET {
        let g = ginibre(&mut rng, n);
        if g.condition_number() <= max_condition {
            return Ok(g);
        }
    }
    Err(Error::ResampleBudgetExceeded { attempts: RESAMPLE_BUDGET })
}

/// Unit vector on the sphere `S^2`.
pub fn sphere_point<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > 1e-8 {
            return [v[0] / norm, v[1] / norm, v[2] / norm];
        }
    }
}

/// Uniform point of the closed unit ball.
pub fn ball_point<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let dir = sphere_point(rng);
    let radius: f64 = rng.random::<f64>().cbrt();
    [dir[0] * radius, dir[1] * radius, dir[2] * radius]
}

/// `n × k` isometry: the first `k` columns of a Haar unitary.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> DMatrix<C64> {
    let u = unitary_from_rng(rng, n);
    u.as_dmatrix().columns(0, k).into_owned()
}
