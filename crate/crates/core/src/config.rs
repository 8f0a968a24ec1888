//! Run configuration: defaults, config file, command-line overrides.
//!
//! The config file is TOML whose keys mirror [`RunConfig`] field names, in
//! the same presentation units as the command line (T, T/m, µm, MHz).
//! Precedence is defaults < file < flags. Every field is optional in the
//! file; an empty file gives the reference ten-ion setup.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::robustness::Distribution;
use crate::species::IonSpecies;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "analyze")]
    Analyze,
    #[serde(rename = "design")]
    Design,
    #[serde(rename = "plan")]
    Plan,
    #[serde(rename = "fig2")]
    Fig2,
    #[serde(rename = "fig3")]
    Fig3,
    #[serde(rename = "table1")]
    Table1,
    #[serde(rename = "scan-N", alias = "scan-n")]
    ScanN,
    #[serde(rename = "scan-h")]
    ScanH,
    #[serde(rename = "perturb")]
    Perturb,
}

impl Mode {
    pub const ALL: [Mode; 9] = [
        Mode::Analyze,
        Mode::Design,
        Mode::Plan,
        Mode::Fig2,
        Mode::Fig3,
        Mode::Table1,
        Mode::ScanN,
        Mode::ScanH,
        Mode::Perturb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Analyze => "analyze",
            Mode::Design => "design",
            Mode::Plan => "plan",
            Mode::Fig2 => "fig2",
            Mode::Fig3 => "fig3",
            Mode::Table1 => "table1",
            Mode::ScanN => "scan-N",
            Mode::ScanH => "scan-h",
            Mode::Perturb => "perturb",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ConfigError::Invalid(format!("unknown mode `{s}`")))
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown configuration key: {0}")]
    UnknownKey(String),
    #[error("malformed configuration: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    /// Process exit code for this failure. Computation failures use 7 and
    /// output errors 6; see [`crate::report`].
    pub fn exit_code(&self) -> i32 {
        match self {
            ConfigError::UnknownKey(_) | ConfigError::Parse(_) => 3,
            ConfigError::Invalid(_) => 4,
            ConfigError::UnknownSpecies(_) => 5,
            ConfigError::Io { .. } => 6,
        }
    }
}

/// Fully resolved run settings. Embedded verbatim in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub species: String,
    /// Field offset B₀ (T).
    pub b0: f64,
    /// Field gradient b (T/m).
    pub grad: f64,
    pub n: usize,
    /// Ion spacing (µm).
    pub h: f64,
    /// End-trap frequency (MHz).
    pub nu1: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub uniformity_tolerance: f64,
    pub samples: usize,
    pub position_range_um: f64,
    pub strength_range_khz: f64,
    pub distribution: Distribution,
    pub fig3_n: Vec<usize>,
    pub scan_n: Vec<usize>,
    pub scan_h_um: Vec<f64>,
    pub asymptote_n: usize,
    pub growth_n: Vec<usize>,
    pub species_data: IonSpecies,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    mode: Option<String>,
    species: Option<String>,
    b0: Option<f64>,
    grad: Option<f64>,
    n: Option<usize>,
    h: Option<f64>,
    nu1: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    uniformity_tolerance: Option<f64>,
    samples: Option<usize>,
    position_range_um: Option<f64>,
    strength_range_khz: Option<f64>,
    distribution: Option<Distribution>,
    fig3_n: Option<Vec<usize>>,
    scan_n: Option<Vec<usize>>,
    scan_h_um: Option<Vec<f64>>,
    asymptote_n: Option<usize>,
    growth_n: Option<Vec<usize>>,
}

/// Command-line flags. `None` leaves the file or default value in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub species: Option<String>,
    pub b0: Option<f64>,
    pub grad: Option<f64>,
    pub n: Option<usize>,
    pub h: Option<f64>,
    pub nu1: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

fn parse_file(text: &str) -> Result<FileConfig, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        if msg.contains("unknown field") {
            ConfigError::UnknownKey(msg)
        } else {
            ConfigError::Parse(msg)
        }
    })
}

/// Resolves a run configuration from an optional config file and flag
/// overrides. `mode` from the command line wins over `mode` in the file.
pub fn parse_config(file: Option<&Path>, mode: Option<Mode>, flags: &Overrides) -> Result<RunConfig, ConfigError> {
    let text = match file {
        Some(p) => std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
            path: p.to_path_buf(),
            source,
        })?,
        None => String::new(),
    };
    parse_config_str(&text, mode, flags)
}

pub fn parse_config_str(text: &str, mode: Option<Mode>, flags: &Overrides) -> Result<RunConfig, ConfigError> {
    let f = parse_file(text)?;
    let mode = match (mode, &f.mode) {
        (Some(m), _) => m,
        (None, Some(s)) => s.parse()?,
        (None, None) => return Err(ConfigError::Invalid("no mode given".into())),
    };
    let species = flags.species.clone().or(f.species).unwrap_or_else(|| "Yb171".into());
    let species_data = IonSpecies::resolve(&species).map_err(|e| match e {
        crate::Error::UnknownSpecies(s) => ConfigError::UnknownSpecies(s),
        other => ConfigError::Invalid(other.to_string()),
    })?;

    let cfg = RunConfig {
        mode,
        species,
        b0: flags.b0.or(f.b0).unwrap_or(1.0),
        grad: flags.grad.or(f.grad).unwrap_or(1000.0),
        n: flags.n.or(f.n).unwrap_or(10),
        h: flags.h.or(f.h).unwrap_or(10.0),
        nu1: flags.nu1.or(f.nu1).unwrap_or(1.0),
        seed: flags.seed.or(f.seed).unwrap_or(0),
        out: flags.out.clone().or(f.out).unwrap_or_else(|| PathBuf::from("out")),
        uniformity_tolerance: f.uniformity_tolerance.unwrap_or(1e-8),
        samples: f.samples.unwrap_or(500),
        position_range_um: f.position_range_um.unwrap_or(0.1),
        strength_range_khz: f.strength_range_khz.unwrap_or(10.0),
        distribution: f.distribution.unwrap_or_default(),
        fig3_n: f.fig3_n.unwrap_or_else(|| (3..=20).collect()),
        scan_n: f.scan_n.unwrap_or_else(|| vec![10, 20, 30, 40, 50, 60]),
        scan_h_um: f.scan_h_um.unwrap_or_else(|| vec![6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 20.0]),
        asymptote_n: f.asymptote_n.unwrap_or(200),
        growth_n: f.growth_n.unwrap_or_else(|| (2..=20).collect()),
        species_data,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn ascending<T: PartialOrd + Copy>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn validate(c: &RunConfig) -> Result<(), ConfigError> {
    let bad = |m: String| Err(ConfigError::Invalid(m));
    if !(c.b0.is_finite() && c.b0 >= 0.0) {
        return bad(format!("b0 must be >= 0 T, got {}", c.b0));
    }
    if !c.grad.is_finite() {
        return bad(format!("grad must be finite, got {}", c.grad));
    }
    if c.n < 2 {
        return bad(format!("n must be at least 2, got {}", c.n));
    }
    if !(c.h.is_finite() && c.h > 0.0) {
        return bad(format!("h must be > 0 um, got {}", c.h));
    }
    if !(c.nu1.is_finite() && c.nu1 > 0.0) {
        return bad(format!("nu1 must be > 0 MHz, got {}", c.nu1));
    }
    if !(c.uniformity_tolerance > 0.0) {
        return bad(format!("uniformity_tolerance must be > 0, got {}", c.uniformity_tolerance));
    }
    if c.samples == 0 {
        return bad("samples must be at least 1".into());
    }
    if !(c.position_range_um >= 0.0 && c.strength_range_khz >= 0.0) {
        return bad("perturbation ranges must be >= 0".into());
    }
    if c.fig3_n.is_empty() || c.fig3_n.iter().any(|&n| n < 2) || !ascending(&c.fig3_n) {
        return bad("fig3_n must be ascending values >= 2".into());
    }
    if c.scan_n.len() < crate::scaling::MIN_FIT_POINTS || c.scan_n[0] < 2 || !ascending(&c.scan_n) {
        return bad(format!(
            "scan_n needs at least {} ascending values >= 2",
            crate::scaling::MIN_FIT_POINTS
        ));
    }
    if c.asymptote_n <= *c.scan_n.last().unwrap() || c.asymptote_n <= c.n {
        return bad("asymptote_n must exceed every scanned N and n".into());
    }
    if c.scan_h_um.len() < crate::scaling::MIN_FIT_POINTS
        || c.scan_h_um.iter().any(|h| !(*h > 0.0))
        || !ascending(&c.scan_h_um)
    {
        return bad(format!(
            "scan_h_um needs at least {} ascending positive values",
            crate::scaling::MIN_FIT_POINTS
        ));
    }
    if c.growth_n.len() < 2 || c.growth_n[0] < 1 || !ascending(&c.growth_n) {
        return bad("growth_n needs at least 2 ascending values >= 1".into());
    }
    Ok(())
}
