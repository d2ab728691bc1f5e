use serde::{Deserialize, Serialize};

use super::density::DensityOperator;
use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Point of the closed unit ball in `R^3`, identified with a qubit state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Self { x, y, z };
        let norm = v.norm();
        if !(norm <= 1.0 + 1e-12) {
            return Err(Error::OutsideBall(norm));
        }
        Ok(v)
    }

    pub fn from_array(a: [f64; 3]) -> Result<Self> {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// `½ I + ½ [[z, x − iy], [x + iy, −z]]`.
pub fn bloch_to_state(v: &BlochVector) -> Result<DensityOperator> {
    let v = BlochVector::new(v.x, v.y, v.z)?;
    let m = ComplexMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 0) => C64::new(0.5 * (1.0 + v.z), 0.0),
        (1, 1) => C64::new(0.5 * (1.0 - v.z), 0.0),
        (0, 1) => C64::new(0.5 * v.x, -0.5 * v.y),
        _ => C64::new(0.5 * v.x, 0.5 * v.y),
    });
    Ok(DensityOperator::normalized_psd(&m).expect("unit trace"))
}

pub fn state_to_bloch(rho: &DensityOperator) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: rho.dim() });
    }
    let m = rho.matrix();
    let r21 = m.get(1, 0);
    Ok(BlochVector {
        x: 2.0 * r21.re,
        y: 2.0 * r21.im,
        z: m.get(0, 0).re - m.get(1, 1).re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::random::random_density;

    #[test]
    fn examples() {
        let origin = bloch_to_state(&BlochVector::new(0.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(origin, DensityOperator::maximally_mixed(2));
        let north = bloch_to_state(&BlochVector::new(0.0, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!(north, DensityOperator::diagonal(&[1.0, 0.0]).unwrap());
        // Hand evaluation: ½I + ½[[0, 1], [1, 0]].
        let x = bloch_to_state(&BlochVector::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        let expected = ComplexMatrix::from_fn(2, |_, _| C64::new(0.5, 0.0));
        assert_eq!(x.matrix(), &expected);
        assert!(BlochVector::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        let v = state_to_bloch(&DensityOperator::maximally_mixed(2)).unwrap();
        assert_eq!(v.to_array(), [0.0, 0.0, 0.0]);
        let v = state_to_bloch(&DensityOperator::diagonal(&[1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(v.to_array(), [0.0, 0.0, 1.0]);
        assert!(state_to_bloch(&DensityOperator::maximally_mixed(3)).is_err());
    }

    #[test]
    fn round_trip() {
        for seed in 0..100 {
            let rho = random_density(2, seed);
            let back = bloch_to_state(&state_to_bloch(&rho).unwrap()).unwrap();
            assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);
        }
    }
}
