//! Spin-spin coupling matrix and motional band structure.
//!
//! Two independent routes to the same matrix:
//!
//! ```text
//! J_nm = ħ/(4π m) Σⱼ Gₙ Gₘ Dₙⱼ Dₘⱼ / Ωⱼ²        (mode sum)
//! J_nm = ħ/(4π)  Gₙ Gₘ (A⁻¹)ₙₘ                  (inverse Hessian)
//! ```
//!
//! where `G` is the qubit frequency gradient, `Ωⱼ = 2πνⱼ` and `m Ωⱼ²` are the
//! Hessian eigenvalues. The diagonal is zero by definition.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::atomic::{qubit_transition_frequency, MagneticField};
use crate::chain::ChainSolution;
use crate::constants::REDUCED_PLANCK;
use crate::error::{Error, Result};
use crate::species::IonSpecies;

/// How the frequency gradient enters the prefactor.
///
/// The coupling formula does not say whether `∂ω/∂x` is angular or ordinary.
/// `AngularGradient` uses `2π × (∂ν/∂x)` and reports the result in Hz; it is
/// the reading that reproduces the ~850 Hz nearest-neighbour coupling of the
/// reference ten-ion design. `OrdinaryGradient` is kept for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrequencyConvention {
    #[default]
    AngularGradient,
    OrdinaryGradient,
}

impl FrequencyConvention {
    fn gradient_factor(self) -> f64 {
        match self {
            FrequencyConvention::AngularGradient => TAU,
            FrequencyConvention::OrdinaryGradient => 1.0,
        }
    }

    pub fn note(self) -> &'static str {
        match self {
            FrequencyConvention::AngularGradient => {
                "J = hbar/(4 pi) * (2 pi dnu/dx)_n (2 pi dnu/dx)_m * (A^-1)_nm, reported in Hz"
            }
            FrequencyConvention::OrdinaryGradient => {
                "J = hbar/(4 pi) * (dnu/dx)_n (dnu/dx)_m * (A^-1)_nm, reported in Hz"
            }
        }
    }
}

/// Symmetric N×N coupling matrix (Hz) with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    pub values: DMatrix<f64>,
    pub convention: FrequencyConvention,
}

impl CouplingMatrix {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Entries `J_{i,i+d}` for `i = 0..N-d`.
    pub fn offset_diagonal(&self, d: usize) -> Vec<f64> {
        let n = self.n();
        (0..n.saturating_sub(d)).map(|i| self.values[(i, i + d)]).collect()
    }

    pub fn nearest_neighbour(&self) -> Vec<f64> {
        self.offset_diagonal(1)
    }

    pub fn nn_relative_std(&self) -> f64 {
        relative_std(&self.nearest_neighbour())
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        matrix_rows(&self.values)
    }

    /// Row-major CSV with a header row of 1-based ion indices. Values use
    /// scientific notation with 12 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.n();
        let mut out = String::new();
        let header: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{:.11e}", self.values[(i, j)])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

impl Serialize for CouplingMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CouplingMatrix", 3)?;
        st.serialize_field("convention", &self.convention)?;
        st.serialize_field("convention_note", self.convention.note())?;
        st.serialize_field("values_hz", &self.rows())?;
        st.end()
    }
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().cloned().collect()).collect()
}

/// Population standard deviation over |mean|. Zero for an all-zero or
/// single-element input.
pub fn relative_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if mean == 0.0 {
        return if var == 0.0 { 0.0 } else { f64::INFINITY };
    }
    var.sqrt() / mean.abs()
}

fn check_gradients(solution: &ChainSolution, gradients: &[f64]) -> Result<()> {
    if gradients.len() != solution.ion_count() {
        return Err(Error::invalid(format!(
            "{} gradients for {} ions",
            gradients.len(),
            solution.ion_count()
        )));
    }
    Ok(())
}

/// Coupling matrix from the normal-mode sum. `gradients` are `∂ν/∂x` per
/// ion in Hz/m.
pub fn j_matrix_mode_sum(
    solution: &ChainSolution,
    gradients: &[f64],
    convention: FrequencyConvention,
) -> Result<CouplingMatrix> {
    check_gradients(solution, gradients)?;
    let n = solution.ion_count();
    let gf = convention.gradient_factor();
    let d = &solution.mode_matrix;
    let inv_omega_sq: Vec<f64> = solution
        .mode_frequencies
        .iter()
        .map(|nu| {
            let w = TAU * nu;
            1.0 / (w * w)
        })
        .collect();
    let pref = REDUCED_PLANCK / (4.0 * PI * solution.mass);
    let mut values = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let sum: f64 = (0..n).map(|j| inv_omega_sq[j] * d[(a, j)] * d[(b, j)]).sum();
            let v = pref * gf * gradients[a] * gf * gradients[b] * sum;
            values[(a, b)] = v;
            values[(b, a)] = v;
        }
    }
    Ok(CouplingMatrix { values, convention })
}

/// Coupling matrix from the inverse Hessian.
pub fn j_matrix_inverse(
    solution: &ChainSolution,
    gradients: &[f64],
    convention: FrequencyConvention,
) -> Result<CouplingMatrix> {
    check_gradients(solution, gradients)?;
    let inv = inverse_spd(&solution.hessian)?;
    Ok(coupling_from_inverse(&inv, gradients, convention))
}

pub(crate) fn inverse_spd(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    match a.clone().cholesky() {
        Some(ch) => Ok(ch.inverse()),
        None => a.clone().try_inverse().ok_or(Error::SingularHessian),
    }
}

pub(crate) fn coupling_from_inverse(
    inv: &DMatrix<f64>,
    gradients: &[f64],
    convention: FrequencyConvention,
) -> CouplingMatrix {
    let n = inv.nrows();
    let gf = convention.gradient_factor();
    let pref = REDUCED_PLANCK / (4.0 * PI);
    let mut values = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            // symmetrize: the inverse is symmetric only to rounding
            let ab = 0.5 * (inv[(a, b)] + inv[(b, a)]);
            let v = pref * gf * gradients[a] * gf * gradients[b] * ab;
            values[(a, b)] = v;
            values[(b, a)] = v;
        }
    }
    CouplingMatrix { values, convention }
}

/// Per-ion `∂ν/∂x` (Hz/m) in the strong-field limit: the same for every ion.
pub fn uniform_gradients(species: &IonSpecies, field: &MagneticField, n: usize) -> Vec<f64> {
    vec![crate::atomic::qubit_frequency_gradient(species, field); n]
}

/// Mean nearest-neighbour coupling under both conventions, and the one
/// whose value is closer (in log ratio) to `target_hz`.
pub fn calibrate_convention(
    solution: &ChainSolution,
    gradients: &[f64],
    target_hz: f64,
) -> Result<(FrequencyConvention, [(FrequencyConvention, f64); 2])> {
    let mut cands = [
        (FrequencyConvention::AngularGradient, 0.0),
        (FrequencyConvention::OrdinaryGradient, 0.0),
    ];
    for c in cands.iter_mut() {
        let j = j_matrix_inverse(solution, gradients, c.0)?;
        let nn = j.nearest_neighbour();
        c.1 = nn.iter().sum::<f64>() / nn.len().max(1) as f64;
    }
    let miss = |v: f64| (v.abs() / target_hz).ln().abs();
    let best = if miss(cands[0].1) <= miss(cands[1].1) {
        cands[0].0
    } else {
        cands[1].0
    };
    Ok((best, cands))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandStructure {
    /// Hz, ascending
    pub mode_frequencies: Vec<f64>,
    /// Highest mode frequency (Hz).
    pub extent: f64,
    /// Highest minus lowest mode frequency (Hz).
    pub band_width: f64,
}

pub fn sideband_extent(solution: &ChainSolution) -> BandStructure {
    let f = &solution.mode_frequencies;
    let max = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = f.iter().cloned().fold(f64::INFINITY, f64::min);
    BandStructure {
        mode_frequencies: f.clone(),
        extent: max,
        band_width: max - min,
    }
}

/// Smallest neighbouring qubit-frequency separation over twice the highest
/// mode frequency. `None` for a single ion.
pub fn discrimination_margin(
    species: &IonSpecies,
    field: &MagneticField,
    solution: &ChainSolution,
) -> Option<f64> {
    let freqs: Vec<f64> = solution
        .equilibrium
        .iter()
        .map(|&x| qubit_transition_frequency(species, field, x).frequency)
        .collect();
    let min_sep = freqs
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.min(d))))?;
    Some(min_sep / (2.0 * sideband_extent(solution).extent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{ChainConfiguration, MicrotrapArray};

    fn config(n: usize, b: f64) -> ChainConfiguration {
        let s = IonSpecies::yb171();
        let g = s.strength_for_frequency(1e6);
        ChainConfiguration::new(
            s,
            MagneticField::new(1.0, b).unwrap(),
            MicrotrapArray::single_trap(0.0, g, n).unwrap(),
        )
    }

    #[test]
    fn zero_gradient_zero_matrix() {
        let c = config(4, 0.0);
        let sol = ChainSolution::solve(&c).unwrap();
        let g = uniform_gradients(&c.species, &c.field, 4);
        let j = j_matrix_mode_sum(&sol, &g, FrequencyConvention::default()).unwrap();
        assert!(j.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn forms_agree_single_trap() {
        let c = config(6, 1000.0);
        let sol = ChainSolution::solve(&c).unwrap();
        let g = uniform_gradients(&c.species, &c.field, 6);
        let a = j_matrix_mode_sum(&sol, &g, FrequencyConvention::default()).unwrap();
        let b = j_matrix_inverse(&sol, &g, FrequencyConvention::default()).unwrap();
        for (x, y) in a.values.iter().zip(b.values.iter()) {
            assert!((x - y).abs() <= 1e-10 * y.abs().max(1e-300), "{x} {y}");
        }
    }

    #[test]
    fn diagonal_zero_and_symmetric() {
        let c = config(5, 1000.0);
        let sol = ChainSolution::solve(&c).unwrap();
        let g = uniform_gradients(&c.species, &c.field, 5);
        let j = j_matrix_inverse(&sol, &g, FrequencyConvention::default()).unwrap();
        for i in 0..5 {
            assert_eq!(j.get(i, i), 0.0);
            for k in 0..5 {
                assert_eq!(j.get(i, k), j.get(k, i));
            }
        }
    }

    #[test]
    fn diagonal_hessian_means_no_coupling() {
        let s = IonSpecies::yb171();
        let traps = MicrotrapArray::new(vec![0.0, 1.0, 2.0], vec![1e-11; 3]).unwrap();
        let c = ChainConfiguration::new(s, MagneticField::new(1.0, 1000.0).unwrap(), traps);
        let sol = ChainSolution::solve(&c).unwrap();
        let g = uniform_gradients(&c.species, &c.field, 3);
        let j = j_matrix_inverse(&sol, &g, FrequencyConvention::default()).unwrap();
        // 1 m apart: Coulomb curvature is ~1e-28 N/m against 1e-11 N/m traps
        assert!(j.values.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn single_ion_band() {
        let c = config(1, 1000.0);
        let sol = ChainSolution::solve(&c).unwrap();
        let band = sideband_extent(&sol);
        assert!((band.extent - 1e6).abs() < 1e-6);
        assert_eq!(band.band_width, 0.0);
        assert_eq!(discrimination_margin(&c.species, &c.field, &sol), None);
    }

    #[test]
    fn margin_zero_without_gradient() {
        let c = config(3, 0.0);
        let sol = ChainSolution::solve(&c).unwrap();
        assert_eq!(discrimination_margin(&c.species, &c.field, &sol), Some(0.0));
    }

    #[test]
    fn relative_std_edge_cases() {
        assert_eq!(relative_std(&[]), 0.0);
        assert_eq!(relative_std(&[3.0]), 0.0);
        assert_eq!(relative_std(&[0.0, 0.0]), 0.0);
        assert!((relative_std(&[1.0, 3.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let j = CouplingMatrix {
            values: DMatrix::from_row_slice(2, 2, &[0.0, 850.0, 850.0, 0.0]),
            convention: FrequencyConvention::AngularGradient,
        };
        assert_eq!(
            j.to_csv(),
            "1,2\n0.00000000000e0,8.50000000000e2\n8.50000000000e2,0.00000000000e0\n"
        );
    }
}
