//! Ion species data and the species file format.
//!
//! A species file is TOML with exactly these keys:
//!
//! ```toml
//! name = "Yb171"
//! mass_amu = 170.936
//! hyperfine_ghz = 12.6428
//! g_j = 2.0025
//! readout_coefficient = 1.3333333333333333
//! ```
//!
//! `nuclear_spin` may be given but must be 0.5. Any other key is rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::ATOMIC_MASS_UNIT;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IonSpecies {
    pub name: String,
    /// kg
    pub mass: f64,
    /// Ground-state hyperfine splitting (Hz).
    pub hyperfine_constant: f64,
    pub g_j_ground: f64,
    /// Coefficient of `μ_B b δz / h` in the neighbouring optical transition
    /// separation.
    pub readout_coefficient: f64,
    pub nuclear_spin: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeciesFile {
    name: String,
    mass_amu: f64,
    hyperfine_ghz: f64,
    g_j: f64,
    readout_coefficient: f64,
    #[serde(default = "half")]
    nuclear_spin: f64,
}

fn half() -> f64 {
    0.5
}

const BUILTIN_YB171: &str = include_str!("../data/yb171.toml");

impl IonSpecies {
    /// ¹⁷¹Yb⁺ with the qubit in the S₁/₂ hyperfine manifold.
    pub fn yb171() -> Self {
        Self::from_toml_str(BUILTIN_YB171).expect("bundled species file is valid")
    }

    /// Looks up a bundled species by name (case-insensitive).
    pub fn builtin(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "yb171" | "171yb" | "171yb+" | "yb171+" | "yb+" | "yb" => Some(Self::yb171()),
            _ => None,
        }
    }

    /// Resolves `name` as a bundled species, or, failing that, as a path to a
    /// species file.
    pub fn resolve(name: &str) -> Result<Self> {
        if let Some(s) = Self::builtin(name) {
            return Ok(s);
        }
        let path = Path::new(name);
        if path.is_file() {
            return Self::from_file(path);
        }
        Err(Error::UnknownSpecies(name.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::InvalidParameter(message) => Error::SpeciesFile {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: SpeciesFile =
            toml::from_str(text).map_err(|e| Error::invalid(e.message().to_string()))?;
        let species = IonSpecies {
            name: raw.name,
            mass: raw.mass_amu * ATOMIC_MASS_UNIT,
            hyperfine_constant: raw.hyperfine_ghz * 1e9,
            g_j_ground: raw.g_j,
            readout_coefficient: raw.readout_coefficient,
            nuclear_spin: raw.nuclear_spin,
        };
        species.validate()?;
        Ok(species)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("hyperfine constant", self.hyperfine_constant),
            ("g_J", self.g_j_ground),
            ("readout coefficient", self.readout_coefficient),
        ];
        for (what, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("species {what} must be positive, got {v}")));
            }
        }
        if self.nuclear_spin != 0.5 {
            return Err(Error::invalid(format!(
                "only nuclear spin 1/2 species are supported, got {}",
                self.nuclear_spin
            )));
        }
        Ok(())
    }

    /// Trap strength `g = m ω²` (N/m) for a trap frequency in Hz.
    pub fn strength_for_frequency(&self, frequency_hz: f64) -> f64 {
        let w = std::f64::consts::TAU * frequency_hz;
        self.mass * w * w
    }

    /// Trap frequency (Hz) for a strength `g = m ω²`.
    pub fn frequency_for_strength(&self, strength: f64) -> f64 {
        (strength / self.mass).sqrt() / std::f64::consts::TAU
    }
}
