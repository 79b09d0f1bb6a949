//! Parameter ingestion: preset, then config file, then flags.

use std::path::{Path, PathBuf};

use cavicool::params::SystemParams;
use cavicool::presets;
use clap::Args;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("unknown preset `{0}`; known presets: {1}")]
    UnknownPreset(String, String),
    #[error("scale must be a positive number of Hz, got {0}")]
    Scale(f64),
    #[error("parameter set {index}: {source}")]
    Invalid { index: usize, source: cavicool::params::ParamError },
    #[error("--lock-sideband needs Ω < ν, got Ω = {0}")]
    LockSideband(f64),
    #[error("{0}")]
    Usage(String),
}

/// Flat key-value config file. Parameter keys match the JSON echo; the
/// remaining keys fill in command options not given on the command line.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    /// Hz per input frequency unit. Given, every frequency-valued input is
    /// read in Hz.
    pub scale: Option<f64>,
    pub g: Option<f64>,
    pub kappa: Option<f64>,
    #[serde(rename = "Omega")]
    pub rabi: Option<f64>,
    #[serde(rename = "Delta")]
    pub detuning: Option<f64>,
    #[serde(rename = "Delta_c")]
    pub cavity_detuning: Option<f64>,
    pub nu: Option<f64>,
    #[serde(rename = "N")]
    pub n_thermal: Option<f64>,
    pub eta: Option<f64>,
    pub eta_c: Option<f64>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub omega_points: Option<usize>,
    pub delta_nu_min: Option<f64>,
    pub delta_nu_max: Option<f64>,
    pub delta_nu_points: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse { path: path.into(), message: e.to_string() })
    }
}

/// Parameter flags. Comma-separated lists expand into one parameter set per
/// combination, in field order.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Flat TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named parameter set (figure or Table-1 cell).
    #[arg(long)]
    pub preset: Option<String>,
    /// Hz per frequency unit of config and flag values.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub g: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub kappa: Vec<f64>,
    #[arg(long = "Omega", value_delimiter = ',', allow_negative_numbers = true)]
    pub rabi: Vec<f64>,
    #[arg(long = "Delta", value_delimiter = ',', allow_negative_numbers = true)]
    pub detuning: Vec<f64>,
    #[arg(long = "Delta_c", value_delimiter = ',', allow_negative_numbers = true)]
    pub cavity_detuning: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub nu: Vec<f64>,
    #[arg(long = "N", value_delimiter = ',', allow_negative_numbers = true)]
    pub n_thermal: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub eta: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub eta_c: Vec<f64>,
    /// Set Δ = −√(ν² − Ω²) after all overrides, so the upper dressed level
    /// sits one trap quantum above the lower one.
    #[arg(long)]
    pub lock_sideband: bool,
}

pub struct Resolved {
    pub file: ConfigFile,
    pub preset: Option<String>,
    pub sets: Vec<SystemParams>,
}

type Field = fn(&mut SystemParams) -> &mut f64;

const FIELDS: [(Field, bool); 9] = [
    (|p| &mut p.g, true),
    (|p| &mut p.kappa, true),
    (|p| &mut p.rabi, true),
    (|p| &mut p.detuning, true),
    (|p| &mut p.cavity_detuning, true),
    (|p| &mut p.nu, true),
    (|p| &mut p.n_thermal, false),
    (|p| &mut p.eta, false),
    (|p| &mut p.eta_c, false),
];

impl ParamArgs {
    fn flag_lists(&self) -> [&[f64]; 9] {
        [
            &self.g,
            &self.kappa,
            &self.rabi,
            &self.detuning,
            &self.cavity_detuning,
            &self.nu,
            &self.n_thermal,
            &self.eta,
            &self.eta_c,
        ]
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let preset = self.preset.clone().or_else(|| file.preset.clone());
        let mut base = match &preset {
            Some(name) => presets::preset(name)
                .ok_or_else(|| ConfigError::UnknownPreset(name.clone(), presets::names().join(", ")))?,
            None => SystemParams::default(),
        };
        let scale = self.scale.or(file.scale).unwrap_or(1.0);
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(ConfigError::Scale(scale));
        }
        let unit = |v: f64, freq: bool| if freq { v / scale } else { v };

        let from_file = [
            file.g,
            file.kappa,
            file.rabi,
            file.detuning,
            file.cavity_detuning,
            file.nu,
            file.n_thermal,
            file.eta,
            file.eta_c,
        ];
        for ((field, freq), v) in FIELDS.iter().zip(from_file) {
            if let Some(v) = v {
                *field(&mut base) = unit(v, *freq);
            }
        }

        let mut sets = vec![base];
        for ((field, freq), values) in FIELDS.iter().zip(self.flag_lists()) {
            if values.is_empty() {
                continue;
            }
            sets = sets
                .iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = *p;
                        *field(&mut q) = unit(v, *freq);
                        q
                    })
                })
                .collect();
        }

        for (index, p) in sets.iter_mut().enumerate() {
            p.validate().map_err(|source| ConfigError::Invalid { index, source })?;
            *p = p.to_reduced();
            if self.lock_sideband {
                if !(p.rabi < 1.0) {
                    return Err(ConfigError::LockSideband(p.rabi));
                }
                p.detuning = -(1.0 - p.rabi * p.rabi).sqrt();
            }
        }
        Ok(Resolved { file, preset, sets })
    }
}

/// Strictly increasing grid of `points` values on `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, points: usize, what: &str) -> Result<Vec<f64>, ConfigError> {
    if points == 0 {
        return Err(ConfigError::Usage(format!("{what} grid is empty")));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    if !(hi > lo) {
        return Err(ConfigError::Usage(format!("{what} grid needs min < max, got [{lo}, {hi}]")));
    }
    Ok((0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect())
}
