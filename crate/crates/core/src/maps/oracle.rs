//! Black-box access to a map on states.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use super::measurement::{apply_measurement, MeasurementMap};
use crate::error::{Error, Result};
use crate::state::matrix::ComplexMatrix;
use crate::state::random::{stream_rng, unitary_from_rng};
use crate::state::{transpose_in_standard_basis, DensityOperator};

/// A map from states on `C^n` to states on `C^n`, available only through
/// evaluation.
///
/// Implementations must be pure: equal inputs give equal outputs. When
/// [`is_reentrant`](Self::is_reentrant) is true, `evaluate` may be called from
/// several threads at once.
pub trait StateMapOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn evaluate(&self, rho: &DensityOperator) -> Result<DensityOperator>;

    fn is_reentrant(&self) -> bool {
        true
    }
}

impl StateMapOracle for MeasurementMap {
    fn dim(&self) -> usize {
        MeasurementMap::dim(self)
    }

    fn evaluate(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        apply_measurement(self, rho)
    }
}

impl<T: StateMapOracle + ?Sized> StateMapOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn evaluate(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        (**self).evaluate(rho)
    }
    fn is_reentrant(&self) -> bool {
        (**self).is_reentrant()
    }
}

impl<T: StateMapOracle + ?Sized> StateMapOracle for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn evaluate(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        (**self).evaluate(rho)
    }
    fn is_reentrant(&self) -> bool {
        (**self).is_reentrant()
    }
}

impl<T: StateMapOracle + ?Sized> StateMapOracle for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn evaluate(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        (**self).evaluate(rho)
    }
    fn is_reentrant(&self) -> bool {
        (**self).is_reentrant()
    }
}

/// Oracle backed by a closure.
pub struct FnOracle<F> {
    n: usize,
    f: F,
    reentrant: bool,
}

impl<F> FnOracle<F>
where
    F: Fn(&DensityOperator) -> Result<DensityOperator> + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f, reentrant: true }
    }

    /// Oracle that must not be evaluated concurrently.
    pub fn serial(n: usize, f: F) -> Self {
        Self { n, f, reentrant: false }
    }
}

impl<F> StateMapOracle for FnOracle<F>
where
    F: Fn(&DensityOperator) -> Result<DensityOperator> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn evaluate(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: rho.dim() });
        }
        (self.f)(rho)
    }

    fn is_reentrant(&self) -> bool {
        self.reentrant
    }
}

/// Counts calls to `evaluate`.
pub struct CountingOracle<O> {
    inner: O,
    calls: AtomicUsize,
}

impl<O: StateMapOracle> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, calls: AtomicUsize::new(0) }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: StateMapOracle> StateMapOracle for CountingOracle<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn evaluate(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.evaluate(rho)
    }

    fn is_reentrant(&self) -> bool {
        self.inner.is_reentrant()
    }
}

pub type BoxedOracle = Box<dyn StateMapOracle>;

/// Reference oracles, including ones that break the segment property.
pub mod builtin {
    use super::*;

    pub fn identity(n: usize) -> BoxedOracle {
        Box::new(FnOracle::new(n, |rho: &DensityOperator| Ok(rho.clone())))
    }

    pub fn transpose(n: usize) -> BoxedOracle {
        Box::new(FnOracle::new(n, |rho: &DensityOperator| Ok(transpose_in_standard_basis(rho))))
    }

    /// `ρ ↦ ρ/2 + I/(2n)`: affine, but sends pure states to mixed ones.
    pub fn mixer(n: usize) -> BoxedOracle {
        Box::new(FnOracle::new(n, move |rho: &DensityOperator| {
            let m = &rho.matrix().scale_real(0.5) + &ComplexMatrix::identity(n).scale_real(0.5 / n as f64);
            DensityOperator::normalized_psd(&m)
        }))
    }

    /// `ρ ↦ ρ²/tr(ρ²)`: bijective on neither segments nor states.
    pub fn normalized_square(n: usize) -> BoxedOracle {
        Box::new(FnOracle::new(n, |rho: &DensityOperator| {
            DensityOperator::normalized_psd(&(rho.matrix() * rho.matrix()))
        }))
    }

    /// `ρ ↦ (ρ + ρ^T)/2`: not injective.
    pub fn symmetrize(n: usize) -> BoxedOracle {
        Box::new(FnOracle::new(n, |rho: &DensityOperator| {
            let m = rho.matrix() + transpose_in_standard_basis(rho).matrix();
            DensityOperator::normalized_psd(&m)
        }))
    }

    /// Constant map onto `tau`.
    pub fn constant(tau: DensityOperator) -> BoxedOracle {
        let n = tau.dim();
        Box::new(FnOracle::new(n, move |_: &DensityOperator| Ok(tau.clone())))
    }

    /// Block pinching with independent unitaries on the sectors
    /// `C^split ⊕ C^(n − split)`: `ρ ↦ U_A ρ_AA U_A* ⊕ U_B ρ_BB U_B*`.
    ///
    /// Each sector on its own is a unitary congruence, but the map is not a
    /// measurement map on the whole space.
    pub fn block_pinching(n: usize, split: usize, seed: u64) -> BoxedOracle {
        assert!(split > 0 && split < n, "split must separate two nonempty sectors");
        let ua = unitary_from_rng(&mut stream_rng(seed, 0), split);
        let ub = unitary_from_rng(&mut stream_rng(seed, 1), n - split);
        let w = ComplexMatrix::from_fn(n, |i, j| {
            if i < split && j < split {
                ua.get(i, j)
            } else if i >= split && j >= split {
                ub.get(i - split, j - split)
            } else {
                crate::state::matrix::ZERO
            }
        });
        Box::new(FnOracle::new(n, move |rho: &DensityOperator| {
            let pinched = ComplexMatrix::from_fn(n, |i, j| {
                if (i < split) == (j < split) {
                    rho.matrix().get(i, j)
                } else {
                    crate::state::matrix::ZERO
                }
            });
            DensityOperator::normalized_psd(&w.congruence(&pinched))
        }))
    }

    /// Resolves a builtin by name.
    pub fn by_name(name: &str, n: usize) -> Option<BoxedOracle> {
        Some(match name {
            "identity" => identity(n),
            "transpose" => transpose(n),
            "mixer" => mixer(n),
            "square" => normalized_square(n),
            "symmetrize" => symmetrize(n),
            "pinch" if n >= 2 => block_pinching(n, n / 2, 0),
            _ => return None,
        })
    }

    pub const NAMES: &[&str] = &["identity", "transpose", "mixer", "square", "symmetrize", "pinch"];
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::random::random_density;
    use crate::state::validate_density;

    #[test]
    fn counting() {
        let o = CountingOracle::new(builtin::identity(2));
        let rho = random_density(2, 0);
        for _ in 0..5 {
            o.evaluate(&rho).unwrap();
        }
        assert_eq!(o.calls(), 5);
    }

    #[test]
    fn builtins_produce_states() {
        for name in builtin::NAMES {
            let o = builtin::by_name(name, 4).unwrap();
            for seed in 0..10 {
                let out = o.evaluate(&random_density(4, seed)).unwrap();
                validate_density(out.hermitian().clone()).unwrap();
            }
        }
        assert!(builtin::by_name("nope", 2).is_none());
    }

    #[test]
    fn input_dimension_checked() {
        let o = builtin::identity(3);
        assert!(o.evaluate(&random_density(2, 0)).is_err());
    }
}
