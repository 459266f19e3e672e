//! Loading and parsing of the files and option strings a run depends on.

use std::fs;
use std::path::Path;

use fermicorr_core::{
    build_kernel, DetectorConfig, GridSpec, HermitianMatrix, KernelBundle, SpacetimePoint, SpectralModel,
};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Parses a JSON file into `T`, also returning the parsed value in canonical
/// form for hashing.
pub fn load_json<T: DeserializeOwned + Serialize>(path: &Path) -> CliResult<(T, Value)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let parsed: T = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let canonical = serde_json::to_value(&parsed).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((parsed, canonical))
}

/// The kernel a command operates on, either built from a model and a points
/// file or read directly as a cross-correlation matrix.
pub struct LoadedKernel {
    pub bundle: KernelBundle,
    /// Canonical form of every input that determined the kernel.
    pub inputs: Value,
}

pub fn load_kernel(model: Option<&Path>, points: Option<&Path>, matrix: Option<&Path>) -> CliResult<LoadedKernel> {
    match (model, points, matrix) {
        (_, None, Some(matrix)) => {
            let (gamma, canonical) = load_json::<HermitianMatrix>(matrix)?;
            Ok(LoadedKernel {
                bundle: KernelBundle::from_cross_correlations(gamma)?,
                inputs: serde_json::json!({ "matrix": canonical }),
            })
        }
        (Some(model), Some(points), None) => {
            let (model, model_value) = load_json::<SpectralModel>(model)?;
            let (points, points_value) = load_json::<Vec<SpacetimePoint>>(points)?;
            Ok(LoadedKernel {
                bundle: build_kernel(&model, &points)?,
                inputs: serde_json::json!({ "model": model_value, "points": points_value }),
            })
        }
        (_, Some(_), Some(_)) => Err(CliError::Config("give either --points or --matrix, not both".into())),
        _ => Err(CliError::Config(
            "need --model with --points, or a cross-correlation --matrix".into(),
        )),
    }
}

pub fn load_detector(path: &Path) -> CliResult<(DetectorConfig, Value)> {
    load_json(path)
}

/// Parses `n=64,dt=1e-15,t0=0`. `dt` falls back to `default_dt` and `t0` to 0.
pub fn parse_grid(text: &str, default_dt: f64) -> CliResult<GridSpec> {
    let bad = |msg: String| CliError::Config(format!("grid \"{text}\": {msg}"));
    let mut n = None;
    let mut dt = default_dt;
    let mut t0 = 0.0;
    for field in text.split(',').map(str::trim).filter(|f| !f.is_empty()) {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got \"{field}\"")))?;
        let real = || value.trim().parse::<f64>().map_err(|e| bad(format!("{key}: {e}")));
        match key.trim() {
            "n" => n = Some(value.trim().parse::<usize>().map_err(|e| bad(format!("n: {e}")))?),
            "dt" => dt = real()?,
            "t0" => t0 = real()?,
            other => return Err(bad(format!("unknown key \"{other}\""))),
        }
    }
    let n = n.ok_or_else(|| bad("missing n".into()))?;
    Ok(GridSpec::new(n, t0, dt)?)
}

/// Parses an energy bandwidth such as `0.2eV`, `0.2 eV` or a bare `0.2`
/// (taken as eV).
pub fn parse_bandwidth(text: &str) -> CliResult<f64> {
    let trimmed = text.trim();
    let number = trimmed
        .strip_suffix("eV")
        .or_else(|| trimmed.strip_suffix("ev"))
        .unwrap_or(trimmed)
        .trim();
    number
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("bandwidth \"{text}\" is not a number of eV")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_defaults() {
        let g = parse_grid("n=64", 2e-15).unwrap();
        assert_eq!((g.n_bins, g.bin_width, g.t_start), (64, 2e-15, 0.0));
        let g = parse_grid("n=8, dt=1e-15, t0=-3e-15", 2e-15).unwrap();
        assert_eq!((g.n_bins, g.bin_width, g.t_start), (8, 1e-15, -3e-15));
    }

    #[test]
    fn grid_rejects_garbage() {
        assert!(parse_grid("dt=1e-15", 1.0).is_err());
        assert!(parse_grid("n=4,x=1", 1.0).is_err());
        assert!(parse_grid("n=0", 1.0).is_err());
        assert!(parse_grid("n=four", 1.0).is_err());
    }

    #[test]
    fn bandwidth_units() {
        assert_eq!(parse_bandwidth("0.2eV").unwrap(), 0.2);
        assert_eq!(parse_bandwidth("0.2 eV").unwrap(), 0.2);
        assert_eq!(parse_bandwidth("0.2").unwrap(), 0.2);
        assert!(parse_bandwidth("0.2meV").is_err());
    }
}
