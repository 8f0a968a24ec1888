//! Linear magnetic field model and strong-field (Paschen-Back) Zeeman
//! frequencies for the hyperfine qubit.
//!
//! The qubit is `|M_I=1/2, M_J=-1/2⟩ ↔ |M_I=1/2, M_J=+1/2⟩`. In the
//! decoupled regime its energy is `g_J μ_B B ΔM_J + A M_I ΔM_J`, so the
//! transition frequency is `g_J μ_B B / h + A/2`. Only the first term depends
//! on position.

use serde::{Deserialize, Serialize};

use crate::constants::{BOHR_MAGNETON, PLANCK};
use crate::error::{Error, Result};
use crate::species::IonSpecies;

/// `B(x) = offset + gradient * x`, along ẑ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticField {
    /// T
    pub offset: f64,
    /// T/m
    pub gradient: f64,
}

impl MagneticField {
    pub fn new(offset: f64, gradient: f64) -> Result<Self> {
        if !(offset.is_finite() && offset >= 0.0) {
            return Err(Error::invalid(format!("field offset must be >= 0, got {offset}")));
        }
        if !gradient.is_finite() {
            return Err(Error::invalid("field gradient must be finite"));
        }
        Ok(Self { offset, gradient })
    }

    pub fn at(&self, x: f64) -> f64 {
        field_at(self, x)
    }
}

pub fn field_at(field: &MagneticField, x: f64) -> f64 {
    field.offset + field.gradient * x
}

/// Electron Zeeman coefficient `g_J μ_B / h` in Hz/T.
fn zeeman_hz_per_tesla(species: &IonSpecies) -> f64 {
    species.g_j_ground * BOHR_MAGNETON / PLANCK
}

/// `g_J μ_B B / (h A)`. The strong-field regime holds when this exceeds 1.
pub fn paschen_back_ratio(species: &IonSpecies, b: f64) -> f64 {
    zeeman_hz_per_tesla(species) * b / species.hyperfine_constant
}

/// Field at which [`paschen_back_ratio`] equals one.
pub fn paschen_back_threshold(species: &IonSpecies) -> f64 {
    species.hyperfine_constant / zeeman_hz_per_tesla(species)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitFrequency {
    /// Hz
    pub frequency: f64,
    /// False when the field at the ion is below the Paschen-Back threshold;
    /// the strong-field formula is still evaluated.
    pub paschen_back: bool,
}

pub fn qubit_transition_frequency(
    species: &IonSpecies,
    field: &MagneticField,
    x: f64,
) -> QubitFrequency {
    let b = field.at(x);
    QubitFrequency {
        frequency: zeeman_hz_per_tesla(species) * b + 0.5 * species.hyperfine_constant,
        paschen_back: paschen_back_ratio(species, b.abs()) > 1.0,
    }
}

/// `∂ν/∂x = g_J μ_B b / h` in Hz/m. Independent of position in the
/// strong-field limit.
pub fn qubit_frequency_gradient(species: &IonSpecies, field: &MagneticField) -> f64 {
    zeeman_hz_per_tesla(species) * field.gradient
}

/// Frequency difference (Hz) between neighbouring qubits a distance
/// `spacing` apart.
pub fn manipulate_separation(species: &IonSpecies, gradient: f64, spacing: f64) -> f64 {
    zeeman_hz_per_tesla(species) * gradient * spacing
}

/// Separation (Hz) of the optical readout transitions of neighbouring ions.
pub fn readout_separation(species: &IonSpecies, gradient: f64, spacing: f64) -> f64 {
    species.readout_coefficient * BOHR_MAGNETON * gradient * spacing / PLANCK
}

/// Phase (rad) picked up by a neighbouring ion while `photons` are scattered
/// from a target detuned by `detuning_linewidths` natural linewidths.
pub fn reset_phase_error(photons: f64, detuning_linewidths: f64) -> Result<f64> {
    if !(detuning_linewidths > 0.0) {
        return Err(Error::invalid(format!(
            "detuning must be a positive number of linewidths, got {detuning_linewidths}"
        )));
    }
    if !(photons >= 0.0) {
        return Err(Error::invalid(format!("photon count must be >= 0, got {photons}")));
    }
    Ok(photons / detuning_linewidths)
}
