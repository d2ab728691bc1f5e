//! Benchmark fixtures.

use measmap::state::random::{random_density, random_invertible};
use measmap::{DensityOperator, MeasurementMap};

/// Generated map with condition number at most 100.
pub fn map(n: usize, seed: u64) -> MeasurementMap {
    MeasurementMap::new(random_invertible(n, seed, 100.0).expect("well conditioned"), seed % 2 == 1).expect("invertible")
}

pub fn states(n: usize, count: usize, seed: u64) -> Vec<DensityOperator> {
    (0..count as u64).map(|k| random_density(n, seed.wrapping_add(k))).collect()
}
