//! JSON run configuration. Precedence is flags > config file > defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Option<String>,
    pub potential: Option<String>,
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub alpha: Option<f64>,
    pub nu: Option<f64>,
    pub pmax: Option<f64>,
    pub radius: Option<f64>,
    pub sweep: Option<String>,
    pub a: Option<f64>,
    pub form: Option<String>,
    #[serde(rename = "R")]
    pub coupling: Option<f64>,
    pub zeta: Option<f64>,
    pub csv: Option<PathBuf>,
    pub max_states: Option<usize>,
    pub sum: Option<String>,
    pub strategy: Option<String>,
    pub cutoff: Option<f64>,
    pub ell: Option<f64>,
    #[serde(rename = "F")]
    pub f: Option<f64>,
    #[serde(rename = "G")]
    pub g: Option<f64>,
    pub pairs: Option<String>,
    pub nmax: Option<u32>,
    pub levels: Option<usize>,
    pub dense: Option<bool>,
    pub lanczos: Option<bool>,
    pub from_table: Option<PathBuf>,
    pub gp_n: Option<u64>,
    pub shells: Option<usize>,
    pub suite: Option<String>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }
}

/// First present value among flag and config, else the default.
pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}
