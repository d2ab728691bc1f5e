//! Measurement maps, fractional-linear maps, superoperators and oracles.

pub mod fractional;
pub mod measurement;
pub mod oracle;
pub mod superop;

use serde::{Deserialize, Serialize};

pub use fractional::{apply_fractional_linear, FractionalLinearMap};
pub use measurement::{
    apply_measurement, compose, invert_map, maps_equal_up_to_scale, scale_deviation, segment_reparametrization,
    MeasurementMap,
};
pub use oracle::{builtin, BoxedOracle, CountingOracle, FnOracle, StateMapOracle};
pub use superop::{choi_matrix, is_completely_positive, linearize, ChoiMatrix, Superoperator};

use crate::error::{Error, Result};
use crate::json::{MatrixJson, MatrixKind};
use nalgebra::DMatrix;

/// On-disk form of a map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapJson {
    Measurement {
        transpose: bool,
        #[serde(rename = "M")]
        m: MatrixJson,
    },
    FractionalLinear {
        psi: Vec<Vec<f64>>,
        #[serde(rename = "B")]
        b: MatrixJson,
        f: Vec<f64>,
        c: f64,
    },
}

impl MapJson {
    pub fn from_measurement(map: &MeasurementMap) -> Self {
        MapJson::Measurement {
            transpose: map.transposed(),
            m: MatrixJson::from_matrix(map.matrix(), MatrixKind::Matrix),
        }
    }

    pub fn from_fractional(g: &FractionalLinearMap) -> Self {
        let psi = g.psi();
        MapJson::FractionalLinear {
            psi: (0..psi.nrows()).map(|i| psi.row(i).iter().copied().collect()).collect(),
            b: MatrixJson::from_hermitian(g.offset()),
            f: g.functional().to_vec(),
            c: g.constant(),
        }
    }

    pub fn to_measurement(&self) -> Result<MeasurementMap> {
        match self {
            MapJson::Measurement { transpose, m } => MeasurementMap::new(m.to_matrix()?, *transpose),
            MapJson::FractionalLinear { .. } => Err(Error::InvalidInput("expected a measurement map".into())),
        }
    }

    pub fn to_fractional(&self) -> Result<FractionalLinearMap> {
        match self {
            MapJson::FractionalLinear { psi, b, f, c } => {
                let b = b.to_hermitian()?;
                let n = b.dim();
                let nn = n * n;
                if psi.len() != nn || psi.iter().any(|r| r.len() != nn) {
                    return Err(Error::DimensionMismatch { expected: nn, found: psi.len() });
                }
                let psi = DMatrix::from_fn(nn, nn, |i, j| psi[i][j]);
                FractionalLinearMap::new(n, psi, b, f.clone(), *c)
            }
            MapJson::Measurement { .. } => Err(Error::InvalidInput("expected a fractional-linear map".into())),
        }
    }
}
