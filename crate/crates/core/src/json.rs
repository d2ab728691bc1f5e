//! JSON interchange.
//!
//! Matrices travel as `{"kind", "n", "re", "im"}` with row-major real and
//! imaginary parts. Floats are written with 17 significant digits so every
//! `f64` survives a round trip bit-exactly.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::state::{validate_density, ComplexMatrix, DensityOperator, HermitianMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Density,
    Hermitian,
    Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub kind: MatrixKind,
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix, kind: MatrixKind) -> Self {
        let n = m.dim();
        let rows = |f: fn(crate::state::C64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| f(m.get(i, j))).collect()).collect()
        };
        Self { kind, n, re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn from_density(rho: &DensityOperator) -> Self {
        Self::from_matrix(rho.matrix(), MatrixKind::Density)
    }

    pub fn from_hermitian(h: &HermitianMatrix) -> Self {
        Self::from_matrix(h.matrix(), MatrixKind::Hermitian)
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let m = ComplexMatrix::from_parts(&self.re, &self.im)?;
        if m.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: m.dim() });
        }
        Ok(m)
    }

    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.to_matrix()?)
    }

    pub fn to_density(&self) -> Result<DensityOperator> {
        validate_density(self.to_hermitian()?)
    }
}

/// Compact JSON with every float printed as `d.dddddddddddddddde±x`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes with [`SeventeenDigits`]; non-finite floats become `null`.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn from_json_str<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    Ok(serde_json::from_str(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::random::random_density;
    use proptest::prelude::*;

    #[test]
    fn seventeen_digits() {
        let s = to_json_string(&vec![0.5, -1.0 / 3.0, 1e-300]).unwrap();
        assert_eq!(s, "[5.0000000000000000e-1,-3.3333333333333331e-1,1.0000000000000000e-300]");
    }

    #[test]
    fn density_round_trip_is_exact() {
        let rho = random_density(3, 11);
        let s = to_json_string(&MatrixJson::from_density(&rho)).unwrap();
        let back: MatrixJson = from_json_str(&s).unwrap();
        assert_eq!(back.kind, MatrixKind::Density);
        assert_eq!(back.to_density().unwrap(), rho);
    }

    #[test]
    fn rejects_bad_shapes() {
        let bad = r#"{"kind":"matrix","n":2,"re":[[1,0],[0,1]],"im":[[0,0]]}"#;
        let m: MatrixJson = from_json_str(bad).unwrap();
        assert!(m.to_matrix().is_err());
        let wrong_n = r#"{"kind":"matrix","n":3,"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]}"#;
        let m: MatrixJson = from_json_str(wrong_n).unwrap();
        assert!(m.to_matrix().is_err());
    }

    proptest! {
        #[test]
        fn floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = to_json_string(&x).unwrap();
            let y: f64 = from_json_str(&s).unwrap();
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
