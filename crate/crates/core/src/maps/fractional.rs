use nalgebra::{DMatrix, DVector};

use super::measurement::MeasurementMap;
use super::superop::Superoperator;
use crate::error::{Error, Result};
use crate::state::coords::{coords_to_hermitian, hermitian_basis, hermitian_to_coords, identity_coords};
use crate::state::eigen::eigenvalues;
use crate::state::matrix::{ComplexMatrix, C64};
use crate::state::{DensityOperator, HermitianMatrix};

/// `ρ ↦ (ψ(ρ) + B) / (f(ρ) + c)` on Hermitian matrices.
///
/// `ψ` is stored as an `n² × n²` real matrix and `f` as a length-`n²` real
/// vector, both in the coordinates of [`crate::state::coords`].
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalLinearMap {
    n: usize,
    psi: DMatrix<f64>,
    b: HermitianMatrix,
    f: Vec<f64>,
    c: f64,
}

impl FractionalLinearMap {
    /// Certifies `f(ρ) + c > 0` on every state: the minimum over pure states
    /// `x x*` is `λ_min(F) + c` where `F` represents `f`.
    pub fn new(n: usize, psi: DMatrix<f64>, b: HermitianMatrix, f: Vec<f64>, c: f64) -> Result<Self> {
        let nn = n * n;
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if psi.nrows() != nn || psi.ncols() != nn {
            return Err(Error::DimensionMismatch { expected: nn, found: psi.nrows().max(psi.ncols()) });
        }
        if b.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.dim() });
        }
        if f.len() != nn {
            return Err(Error::DimensionMismatch { expected: nn, found: f.len() });
        }
        let g = Self { n, psi, b, f, c };
        let min = g.min_denominator()?;
        if !(min > 0.0) {
            return Err(Error::DenominatorNonpositive(min));
        }
        Ok(g)
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, DMatrix::identity(n * n, n * n), HermitianMatrix::from_real_diagonal(&vec![0.0; n]), vec![0.0; n * n], 1.0)
            .expect("unit denominator")
    }

    /// Representation with `ψ(X) = M X' M*`, `B = 0`, `c = tr(M*M)/n` and
    /// `f(X) = tr(M X' M*) − c tr(X)`, so that `f(I) = 0`.
    pub fn from_measurement(map: &MeasurementMap) -> Self {
        let n = map.dim();
        let nn = n * n;
        let m = map.matrix();
        let basis = hermitian_basis(n);
        let c = m.frobenius_norm().powi(2) / n as f64;
        let mut psi = DMatrix::zeros(nn, nn);
        let mut f = vec![0.0; nn];
        for (k, h) in basis.iter().enumerate() {
            let x = if map.transposed() { h.matrix().transpose() } else { h.matrix().clone() };
            let image = HermitianMatrix::hermitize(&m.congruence(&x));
            psi.set_column(k, &DVector::from_vec(hermitian_to_coords(&image)));
            f[k] = image.trace() - c * h.trace();
        }
        let zero = HermitianMatrix::from_real_diagonal(&vec![0.0; n]);
        Self::new(n, psi, zero, f, c).expect("measurement denominators are positive")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn psi(&self) -> &DMatrix<f64> {
        &self.psi
    }

    pub fn offset(&self) -> &HermitianMatrix {
        &self.b
    }

    pub fn functional(&self) -> &[f64] {
        &self.f
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    /// Hermitian matrix `F` with `f(X) = tr(F X)`.
    pub fn functional_matrix(&self) -> HermitianMatrix {
        coords_to_hermitian(self.n, &self.f).expect("length n²")
    }

    /// `min_ρ f(ρ) + c` over all states.
    pub fn min_denominator(&self) -> Result<f64> {
        let ev = eigenvalues(&self.functional_matrix())?;
        Ok(ev[ev.len() - 1] + self.c)
    }

    /// `‖f‖ / |c|` after removing the trace component of `f`, which is
    /// constant on states.
    pub fn relative_functional_norm(&self) -> f64 {
        let id = identity_coords(self.n);
        let tr_part: f64 = self.f.iter().zip(&id).map(|(a, b)| a * b).sum::<f64>() / self.n as f64;
        let norm = self
            .f
            .iter()
            .zip(&id)
            .map(|(a, b)| (a - tr_part * b).powi(2))
            .sum::<f64>()
            .sqrt();
        norm / (self.c + tr_part).abs()
    }

    pub fn denominator(&self, rho: &DensityOperator) -> Result<f64> {
        self.check_dim(rho)?;
        let r = hermitian_to_coords(rho.hermitian());
        Ok(self.f.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() + self.c)
    }

    pub fn numerator(&self, rho: &DensityOperator) -> Result<HermitianMatrix> {
        self.check_dim(rho)?;
        let r = DVector::from_vec(hermitian_to_coords(rho.hermitian()));
        let image = &self.psi * r;
        Ok(coords_to_hermitian(self.n, image.as_slice())?.add(&self.b))
    }

    /// Complex-linear extension of `ψ` to all matrices.
    pub fn numerator_superoperator(&self) -> Superoperator {
        let n = self.n;
        let apply = |h: &ComplexMatrix| -> ComplexMatrix {
            let r = DVector::from_vec(crate::state::coords::matrix_to_coords(h));
            coords_to_hermitian(n, (&self.psi * r).as_slice()).expect("length n²").into_matrix()
        };
        let mut action = DMatrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                // E_ij = H1 + i H2 with H1 = (E_ij + E_ji)/2 and H2 = (E_ij − E_ji)/(2i).
                let h1 = ComplexMatrix::from_fn(n, |a, b| {
                    let v = ((a, b) == (i, j)) as u8 as f64 + ((a, b) == (j, i)) as u8 as f64;
                    C64::new(0.5 * v, 0.0)
                });
                let h2 = ComplexMatrix::from_fn(n, |a, b| {
                    let v = ((a, b) == (i, j)) as u8 as f64 - ((a, b) == (j, i)) as u8 as f64;
                    C64::new(0.0, -0.5 * v)
                });
                let out = &apply(&h1) + &apply(&h2).scale(C64::new(0.0, 1.0));
                for a in 0..n {
                    for b in 0..n {
                        action[(a + b * n, i + j * n)] = out.get(a, b);
                    }
                }
            }
        }
        Superoperator::new(n, action).expect("complexification of a real-linear map preserves Hermiticity")
    }

    fn check_dim(&self, rho: &DensityOperator) -> Result<()> {
        if rho.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: rho.dim() });
        }
        Ok(())
    }
}

pub fn apply_fractional_linear(g: &FractionalLinearMap, rho: &DensityOperator) -> Result<HermitianMatrix> {
    let den = g.denominator(rho)?;
    if !(den > 1e-14) {
        return Err(Error::DenominatorNonpositive(den));
    }
    Ok(g.numerator(rho)?.scale(1.0 / den))
}
