use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use measmap::maps::{apply_fractional_linear, builtin, FnOracle, FractionalLinearMap, MapJson, MeasurementMap, StateMapOracle};
use measmap::DensityOperator;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::CliError;

pub fn read_text(path: Option<&Path>) -> Result<String, CliError> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Input(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: Option<&Path>) -> Result<T, CliError> {
    let text = read_text(path)?;
    let origin = path.map_or_else(|| "stdin".to_string(), |p| p.display().to_string());
    measmap::json::from_json_str(&text).map_err(|e| CliError::Input(format!("{origin}: {e}")))
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, out: Option<&PathBuf>) -> Result<(), CliError> {
    let mut text = measmap::json::to_json_string(value).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}

/// A map named on the command line.
pub enum MapSource {
    Builtin(String, Box<dyn StateMapOracle>),
    Measurement(MeasurementMap),
    Fractional(FractionalLinearMap),
}

impl MapSource {
    pub fn dim(&self) -> usize {
        match self {
            MapSource::Builtin(_, o) => o.dim(),
            MapSource::Measurement(m) => m.dim(),
            MapSource::Fractional(g) => g.dim(),
        }
    }

    pub fn oracle(&self) -> Box<dyn StateMapOracle + '_> {
        match self {
            MapSource::Builtin(_, o) => Box::new(&**o),
            MapSource::Measurement(m) => Box::new(m),
            MapSource::Fractional(g) => Box::new(FnOracle::new(g.dim(), move |rho: &DensityOperator| {
                DensityOperator::from_hermitian_clipped(&apply_fractional_linear(g, rho)?)
            })),
        }
    }
}

/// Resolves `spec` as a builtin name, then as a map file. `flag` names the
/// option in error messages.
pub fn resolve_map(spec: &str, n: Option<usize>, flag: &str) -> Result<MapSource, CliError> {
    if builtin::NAMES.contains(&spec) {
        let n = n.ok_or_else(|| CliError::Usage(format!("{flag} {spec}: builtin oracles need --n")))?;
        if n == 0 || (spec == "pinch" && n < 2) {
            return Err(CliError::Usage(format!("--n {n} is not valid for {flag} {spec}")));
        }
        let oracle = builtin::by_name(spec, n).expect("known name");
        return Ok(MapSource::Builtin(spec.to_string(), oracle));
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "{flag} {spec}: not a file and not a builtin ({})",
            builtin::NAMES.join(", ")
        )));
    }
    let doc: MapJson = read_json(Some(path))?;
    let source = match &doc {
        MapJson::Measurement { .. } => MapSource::Measurement(doc.to_measurement().map_err(|e| CliError::Input(format!("{spec}: {e}")))?),
        MapJson::FractionalLinear { .. } => MapSource::Fractional(doc.to_fractional().map_err(|e| CliError::Input(format!("{spec}: {e}")))?),
    };
    if let Some(n) = n {
        if n != source.dim() {
            return Err(CliError::Usage(format!("--n {n} does not match the dimension {} of {spec}", source.dim())));
        }
    }
    Ok(source)
}
