//! Inverse design of a microtrap array for a uniformly spaced chain with
//! uniform nearest-neighbour couplings.
//!
//! Positions are handled in closed form: for a target lattice the
//! stationarity condition `gₙ (xₙ − kₙ) = Fₙ` gives every center directly.
//! Strengths are refined numerically. With the lattice fixed, `J ∝ A⁻¹` and
//! `A` depends on the strengths only through its diagonal, so the refinement
//! works on `A⁻¹` at the lattice and never needs an equilibrium solve inside
//! the loop.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::atomic::MagneticField;
use crate::chain::{ChainConfiguration, ChainSolution, CoulombModel, MicrotrapArray, Potential};
use crate::constants::coulomb_coupling;
use crate::coupling::{
    inverse_spd, j_matrix_inverse, relative_std, uniform_gradients, CouplingMatrix, FrequencyConvention,
};
use crate::error::{Error, Result};
use crate::species::IonSpecies;

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    pub ion_count: usize,
    /// Target ion spacing h (m).
    pub spacing: f64,
    /// End-trap strength g₁ = g_N (N/m).
    pub end_strength: f64,
    pub species: IonSpecies,
    pub field: MagneticField,
    /// Target relative std of the nearest-neighbour couplings.
    pub uniformity_tolerance: f64,
    pub max_iterations: usize,
    pub coulomb: CoulombModel,
    pub convention: FrequencyConvention,
}

impl DesignSpec {
    pub fn new(
        species: IonSpecies,
        field: MagneticField,
        ion_count: usize,
        spacing: f64,
        end_frequency_hz: f64,
    ) -> Result<Self> {
        let end_strength = species.strength_for_frequency(end_frequency_hz);
        let spec = Self {
            ion_count,
            spacing,
            end_strength,
            species,
            field,
            uniformity_tolerance: 1e-8,
            max_iterations: 100,
            coulomb: CoulombModel::Full,
            convention: FrequencyConvention::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ion_count < 2 {
            return Err(Error::invalid(format!("design needs at least 2 ions, got {}", self.ion_count)));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::invalid(format!("spacing must be positive, got {}", self.spacing)));
        }
        if !(self.end_strength.is_finite() && self.end_strength > 0.0) {
            return Err(Error::invalid(format!("end strength must be positive, got {}", self.end_strength)));
        }
        if !(self.uniformity_tolerance > 0.0) {
            return Err(Error::invalid("uniformity tolerance must be positive"));
        }
        Ok(())
    }

    pub fn end_frequency(&self) -> f64 {
        self.species.frequency_for_strength(self.end_strength)
    }

    pub fn with_ion_count(&self, n: usize) -> Self {
        Self {
            ion_count: n,
            ..self.clone()
        }
    }

    pub fn with_spacing(&self, h: f64) -> Self {
        Self {
            spacing: h,
            ..self.clone()
        }
    }
}

/// Ratio of nearest-neighbour Coulomb energy to end-trap energy at spacing
/// `h`: `(e²/4πε₀h) / (½ g₁ h²)`.
pub fn epsilon1(end_strength: f64, spacing: f64) -> f64 {
    let h = spacing;
    (coulomb_coupling() / h) / (0.5 * end_strength * h * h)
}

/// Analytic strengths for a nearest-neighbour-only Hessian: ends at `g₁`,
/// interior at `g₁/(1+ε₁)`. With nearest-neighbour Coulomb this makes `A⁻¹`
/// a Kac-Murdock-Szegő (Toeplitz) matrix, so the couplings depend only on
/// `|i−j|`.
pub fn nearest_neighbor_strengths(spec: &DesignSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let g1 = spec.end_strength;
    let interior = g1 / (1.0 + epsilon1(g1, spec.spacing));
    let n = spec.ion_count;
    Ok((0..n)
        .map(|i| if i == 0 || i == n - 1 { g1 } else { interior })
        .collect())
}

/// Ion positions `(n − (N−1)/2) h`, centered on the origin.
pub fn target_lattice(n: usize, spacing: f64) -> Vec<f64> {
    let mid = (n as f64 - 1.0) / 2.0;
    (0..n).map(|i| (i as f64 - mid) * spacing).collect()
}

/// Trap centers that hold ions with the given strengths on a uniform
/// lattice of spacing `h`. The result is checked by re-solving the
/// equilibrium; the spacing must be reproduced to `1e-12 h`.
pub fn centers_for_uniform_spacing(strengths: &[f64], spacing: f64, coulomb: CoulombModel) -> Result<Vec<f64>> {
    let n = strengths.len();
    if n == 0 {
        return Err(Error::invalid("no strengths given"));
    }
    if let Some(g) = strengths.iter().find(|g| !(**g > 0.0)) {
        return Err(Error::invalid(format!("trap strength must be positive, got {g}")));
    }
    let lattice = target_lattice(n, spacing);
    // any strictly increasing centers will do to evaluate the Coulomb forces
    let probe = MicrotrapArray::new(lattice.clone(), strengths.to_vec())?;
    let forces = Potential::new(&probe, coulomb).coulomb_forces(&lattice)?;
    let centers: Vec<f64> = lattice
        .iter()
        .zip(&forces)
        .zip(strengths)
        .map(|((x, f), g)| x - f / g)
        .collect();

    let traps = MicrotrapArray::new(centers.clone(), strengths.to_vec())?;
    let eq = Potential::new(&traps, coulomb).equilibrium(None, &Default::default())?;
    let error = max_spacing_error(&eq.positions, spacing);
    let limit = 1e-12 * spacing;
    if !(error < limit) {
        return Err(Error::SpacingVerification { error, limit });
    }
    Ok(centers)
}

pub fn max_spacing_error(positions: &[f64], spacing: f64) -> f64 {
    positions
        .windows(2)
        .map(|w| ((w[1] - w[0]) - spacing).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignDiagnostics {
    /// Refinement iterations taken from the analytic seed.
    pub iterations: usize,
    pub epsilon1: f64,
    /// Relative std of the nearest-neighbour entries of `A⁻¹` at the final
    /// equilibrium. Equal to that of J whenever the frequency gradient is
    /// uniform and nonzero.
    pub nn_relative_std: f64,
    pub max_spacing_error_m: f64,
    pub equilibrium_residual_n: f64,
    /// Largest relative mismatch between mirrored strengths or mirrored
    /// center offsets.
    pub symmetry_error: f64,
    pub seed_strengths_n_per_m: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrapDesign {
    pub spec: DesignSpec,
    pub traps: MicrotrapArray,
    pub solution: ChainSolution,
    pub coupling: CouplingMatrix,
    pub diagnostics: DesignDiagnostics,
}

impl TrapDesign {
    pub fn configuration(&self) -> ChainConfiguration {
        ChainConfiguration::new(self.spec.species.clone(), self.spec.field, self.traps.clone())
            .with_coulomb(self.spec.coulomb)
    }

    pub fn trap_frequencies(&self) -> Vec<f64> {
        self.traps.trap_frequencies(&self.spec.species)
    }
}

/// Symmetric parameterization of the interior strengths: `p[l] = g_{l+1}/g₁`
/// mirrored onto `g_{N−2−l}`.
struct Refinement {
    n: usize,
    g1: f64,
    lattice: Vec<f64>,
    coulomb: CoulombModel,
}

impl Refinement {
    fn free(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Distinct nearest-neighbour pairs under mirror symmetry.
    fn distinct_pairs(&self) -> usize {
        self.n / 2
    }

    fn strengths(&self, p: &[f64]) -> Vec<f64> {
        let mut g = vec![self.g1; self.n];
        for (l, v) in p.iter().enumerate() {
            g[1 + l] = v * self.g1;
            g[self.n - 2 - l] = v * self.g1;
        }
        g
    }

    fn inverse(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let traps = MicrotrapArray::new(self.lattice.clone(), self.strengths(p))?;
        let a = Potential::new(&traps, self.coulomb).hessian(&self.lattice)?;
        inverse_spd(&a)
    }

    /// `a_i/a_0 − 1` over distinct pairs, with `a_i = (A⁻¹)_{i,i+1}`.
    fn residuals(&self, inv: &DMatrix<f64>) -> Vec<f64> {
        let a0 = inv[(0, 1)];
        (1..self.distinct_pairs()).map(|i| inv[(i, i + 1)] / a0 - 1.0).collect()
    }

    /// Analytic Jacobian of the residuals, using
    /// `∂(A⁻¹)_{ij}/∂g_k = −(A⁻¹)_{ik}(A⁻¹)_{kj}`.
    fn jacobian(&self, inv: &DMatrix<f64>) -> DMatrix<f64> {
        let rows = self.distinct_pairs() - 1;
        let cols = self.free();
        let da = |i: usize, l: usize| -> f64 {
            let k1 = 1 + l;
            let k2 = self.n - 2 - l;
            let mut s = inv[(i, k1)] * inv[(k1, i + 1)];
            if k2 != k1 {
                s += inv[(i, k2)] * inv[(k2, i + 1)];
            }
            -self.g1 * s
        };
        let a0 = inv[(0, 1)];
        let mut jac = DMatrix::zeros(rows, cols);
        for r in 0..rows {
            let i = r + 1;
            let ai = inv[(i, i + 1)];
            for l in 0..cols {
                jac[(r, l)] = (da(i, l) * a0 - ai * da(0, l)) / (a0 * a0);
            }
        }
        jac
    }

    fn nn_relative_std(&self, inv: &DMatrix<f64>) -> f64 {
        let nn: Vec<f64> = (0..self.n - 1).map(|i| inv[(i, i + 1)]).collect();
        relative_std(&nn)
    }
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Damped Gauss-Newton refinement of the interior strengths.
///
/// For even N the symmetric problem is square. For odd N there is one more
/// free strength than independent conditions; each step then takes the
/// solution of the linearized conditions closest to the analytic seed, which
/// makes the result unique and deterministic.
fn refine(spec: &DesignSpec, seed: &[f64]) -> Result<(Vec<f64>, usize)> {
    let rf = Refinement {
        n: spec.ion_count,
        g1: spec.end_strength,
        lattice: target_lattice(spec.ion_count, spec.spacing),
        coulomb: spec.coulomb,
    };
    let nf = rf.free();
    let p_seed: Vec<f64> = seed[1..1 + nf].iter().map(|g| g / rf.g1).collect();
    let mut p = p_seed.clone();
    let mut inv = rf.inverse(&p)?;
    let mut best = rf.nn_relative_std(&inv);

    for it in 0..=spec.max_iterations {
        if best < spec.uniformity_tolerance {
            return Ok((rf.strengths(&p), it));
        }
        if it == spec.max_iterations {
            break;
        }
        let r = rf.residuals(&inv);
        let jac = rf.jacobian(&inv);
        let d0 = DVector::from_iterator(nf, p_seed.iter().zip(&p).map(|(s, c)| s - c));
        let rhs = -(DVector::from_column_slice(&r) + &jac * &d0);
        let svd = jac.svd(true, true);
        let tol = 1e-12 * svd.singular_values.max();
        let step = match svd.solve(&rhs, tol) {
            Ok(x) => x + d0,
            Err(_) => return Err(Error::DesignNotConverged { iterations: it, best }),
        };

        let merit = norm_sq(&r);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, s)| a + alpha * s).collect();
            if trial.iter().all(|v| *v > 0.0) {
                if let Ok(tinv) = rf.inverse(&trial) {
                    if norm_sq(&rf.residuals(&tinv)) < merit || rf.nn_relative_std(&tinv) < best {
                        p = trial;
                        inv = tinv;
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        best = rf.nn_relative_std(&inv);
        if !accepted && best >= spec.uniformity_tolerance {
            return Err(Error::DesignNotConverged { iterations: it + 1, best });
        }
    }
    Err(Error::DesignNotConverged {
        iterations: spec.max_iterations,
        best,
    })
}

fn symmetry_error(values: &[f64], scale: f64) -> f64 {
    let n = values.len();
    (0..n / 2)
        .map(|i| (values[i] - values[n - 1 - i]).abs() / scale)
        .fold(0.0, f64::max)
}

/// Full design: seed, refine interior strengths, place centers for the
/// uniform lattice, then re-solve the chain and evaluate J.
pub fn design_uniform_j(spec: &DesignSpec) -> Result<TrapDesign> {
    spec.validate()?;
    let seed = nearest_neighbor_strengths(spec)?;
    let (strengths, iterations) = refine(spec, &seed)?;
    let centers = centers_for_uniform_spacing(&strengths, spec.spacing, spec.coulomb)?;
    let traps = MicrotrapArray::new(centers, strengths)?;
    let config = ChainConfiguration::new(spec.species.clone(), spec.field, traps.clone()).with_coulomb(spec.coulomb);
    let solution = ChainSolution::solve(&config)?;
    let gradients = uniform_gradients(&spec.species, &spec.field, spec.ion_count);
    let coupling = j_matrix_inverse(&solution, &gradients, spec.convention)?;

    let inv = inverse_spd(&solution.hessian)?;
    let nn: Vec<f64> = (0..spec.ion_count - 1).map(|i| inv[(i, i + 1)]).collect();
    let lattice = target_lattice(spec.ion_count, spec.spacing);
    let offsets: Vec<f64> = traps
        .centers()
        .iter()
        .zip(&lattice)
        .map(|(k, x)| x - k)
        .collect();
    let mirrored: Vec<f64> = offsets
        .iter()
        .enumerate()
        .map(|(i, o)| if i < spec.ion_count / 2 { -o } else { *o })
        .collect();
    let offset_scale = offsets.iter().fold(0.0f64, |m, o| m.max(o.abs())).max(f64::MIN_POSITIVE);
    let symmetry = symmetry_error(traps.strengths(), spec.end_strength).max(symmetry_error(&mirrored, offset_scale));

    let diagnostics = DesignDiagnostics {
        iterations,
        epsilon1: epsilon1(spec.end_strength, spec.spacing),
        nn_relative_std: relative_std(&nn),
        max_spacing_error_m: max_spacing_error(&solution.equilibrium, spec.spacing),
        equilibrium_residual_n: solution.residual,
        symmetry_error: symmetry,
        seed_strengths_n_per_m: seed,
    };
    Ok(TrapDesign {
        spec: spec.clone(),
        traps,
        solution,
        coupling,
        diagnostics,
    })
}

/// Single-trap chain with the same species, field, ion count and end
/// frequency as `spec`, for comparison against the tailored design.
pub fn single_trap_reference(spec: &DesignSpec) -> Result<(ChainSolution, CouplingMatrix)> {
    let traps = MicrotrapArray::single_trap(0.0, spec.end_strength, spec.ion_count)?;
    let config = ChainConfiguration::new(spec.species.clone(), spec.field, traps);
    let solution = ChainSolution::solve(&config)?;
    let gradients = uniform_gradients(&spec.species, &spec.field, spec.ion_count);
    let coupling = j_matrix_inverse(&solution, &gradients, spec.convention)?;
    Ok((solution, coupling))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrengthProfile {
    pub n: usize,
    pub trap_frequencies_hz: Vec<f64>,
    pub seed_frequencies_hz: Vec<f64>,
    pub iterations: usize,
}

impl StrengthProfile {
    /// Value on curve `k`, i.e. the frequency of traps `k+1` and `N−k`
    /// (1-based).
    pub fn curve(&self, k: usize) -> Option<f64> {
        (k < self.n.div_ceil(2)).then(|| self.trap_frequencies_hz[k])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrengthProfiles {
    pub spacing_m: f64,
    pub end_frequency_hz: f64,
    pub profiles: Vec<StrengthProfile>,
}

impl StrengthProfiles {
    /// One row per N; column `curve_k` holds the frequency of traps `k+1`
    /// and `N−k`, blank when the chain is too short.
    pub fn to_csv(&self) -> String {
        let curves = self.profiles.iter().map(|p| p.n.div_ceil(2)).max().unwrap_or(0);
        let mut out = String::from("n");
        for k in 0..curves {
            out.push_str(&format!(",curve_{k}"));
        }
        out.push('\n');
        for p in &self.profiles {
            out.push_str(&p.n.to_string());
            for k in 0..curves {
                out.push(',');
                if let Some(v) = p.curve(k) {
                    out.push_str(&format!("{v:.11e}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn strength_profile_vs_n(template: &DesignSpec, n_values: &[usize]) -> Result<StrengthProfiles> {
    let profiles = n_values
        .par_iter()
        .map(|&n| {
            let spec = template.with_ion_count(n);
            let design = design_uniform_j(&spec)?;
            let species = &spec.species;
            Ok(StrengthProfile {
                n,
                trap_frequencies_hz: design.trap_frequencies(),
                seed_frequencies_hz: design
                    .diagnostics
                    .seed_strengths_n_per_m
                    .iter()
                    .map(|g| species.frequency_for_strength(*g))
                    .collect(),
                iterations: design.diagnostics.iterations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StrengthProfiles {
        spacing_m: template.spacing,
        end_frequency_hz: template.end_frequency(),
        profiles,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuppressionRow {
    pub offset: usize,
    pub single_trap_ratio: f64,
    pub tailored_ratio: f64,
    /// single-trap ratio over tailored ratio
    pub improvement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuppressionReport {
    pub rows: Vec<SuppressionRow>,
}

fn mean_offset_ratio(j: &CouplingMatrix, d: usize) -> f64 {
    let n = j.n();
    let ratios: Vec<f64> = (0..n - d)
        .map(|i| j.get(i, i + d).abs() / j.get(i, i + 1).abs())
        .collect();
    ratios.iter().sum::<f64>() / ratios.len() as f64
}

/// Mean `|J_{i,i+d}| / |J_{i,i+1}|` per offset `d` for both designs.
pub fn suppression_report(single_trap: &CouplingMatrix, tailored: &CouplingMatrix) -> Result<SuppressionReport> {
    if single_trap.n() != tailored.n() {
        return Err(Error::invalid(format!(
            "matrices differ in size: {} vs {}",
            single_trap.n(),
            tailored.n()
        )));
    }
    let rows = (1..single_trap.n())
        .map(|d| {
            let s = mean_offset_ratio(single_trap, d);
            let t = mean_offset_ratio(tailored, d);
            SuppressionRow {
                offset: d,
                single_trap_ratio: s,
                tailored_ratio: t,
                improvement: s / t,
            }
        })
        .collect();
    Ok(SuppressionReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize) -> DesignSpec {
        DesignSpec::new(IonSpecies::yb171(), MagneticField::new(1.0, 1000.0).unwrap(), n, 10e-6, 1e6).unwrap()
    }

    #[test]
    fn epsilon1_value() {
        let s = spec(10);
        let e = epsilon1(s.end_strength, s.spacing);
        // 2 e²/(4πε₀) / (m ω² h³) for 171Yb+ at 1 MHz, 10 µm
        assert!((e - 0.04118).abs() < 1e-4, "{e}");
        assert!(epsilon1(s.end_strength, 1.0) < 1e-14);
        let ratio = epsilon1(s.end_strength, 5e-6) / e;
        assert!((ratio - 8.0).abs() < 1e-12);
    }

    #[test]
    fn seed_strengths() {
        let s = spec(3);
        let g = nearest_neighbor_strengths(&s).unwrap();
        let e = epsilon1(s.end_strength, s.spacing);
        assert_eq!(g[0], s.end_strength);
        assert_eq!(g[2], s.end_strength);
        assert!((g[1] - s.end_strength / (1.0 + e)).abs() < 1e-15 * g[1]);

        let far = spec(6).with_spacing(1.0);
        let g = nearest_neighbor_strengths(&far).unwrap();
        assert!(g.iter().all(|v| (v - far.end_strength).abs() < 1e-12 * v));

        let g = nearest_neighbor_strengths(&spec(7)).unwrap();
        for i in 0..7 {
            assert_eq!(g[i], g[6 - i]);
        }
    }

    #[test]
    fn two_ion_centers_sit_inside_the_ions() {
        let g = 1.1e-11;
        let h = 10e-6;
        let c = centers_for_uniform_spacing(&[g, g], h, CoulombModel::Full).unwrap();
        let shift = coulomb_coupling() / (h * h) / g;
        assert!((c[0] - (-h / 2.0 + shift)).abs() < 1e-12 * h);
        assert!((c[1] - (h / 2.0 - shift)).abs() < 1e-12 * h);
    }

    #[test]
    fn far_spacing_centers_equal_lattice() {
        let c = centers_for_uniform_spacing(&[1e-11; 4], 1.0, CoulombModel::Full).unwrap();
        let x = target_lattice(4, 1.0);
        for (a, b) in c.iter().zip(&x) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn edge_trap_gaps_shrink() {
        let d = design_uniform_j(&spec(20)).unwrap();
        let k = d.traps.centers();
        let gaps: Vec<f64> = k.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(gaps[0] < gaps[9]);
        assert!(gaps[18] < gaps[9]);
    }

    #[test]
    fn ten_ion_design() {
        let d = design_uniform_j(&spec(10)).unwrap();
        assert!(d.diagnostics.nn_relative_std < 1e-8);
        assert!(d.coupling.nn_relative_std() < 1e-8);
        let j = d.coupling.nearest_neighbour()[0];
        assert!((j - 850.0).abs() < 0.15 * 850.0, "{j}");
        assert!(d.diagnostics.max_spacing_error_m < 1e-12 * 10e-6);
        assert!(d.diagnostics.symmetry_error < 1e-10);
        let g = d.traps.strengths();
        assert!(g[1..9].iter().all(|v| *v <= g[0]));
    }

    #[test]
    fn odd_and_tiny_chains() {
        for n in [2, 3, 5, 9, 11] {
            let d = design_uniform_j(&spec(n)).unwrap();
            assert!(d.coupling.nn_relative_std() < 1e-8, "n={n}");
        }
        // N=3 is uniform by symmetry: the seed is kept
        let d = design_uniform_j(&spec(3)).unwrap();
        assert_eq!(d.diagnostics.iterations, 0);
    }

    #[test]
    fn nearest_neighbour_model_seed_is_exact() {
        for n in [3, 6, 10, 15] {
            let mut s = spec(n);
            s.coulomb = CoulombModel::NearestNeighbour;
            s.uniformity_tolerance = 1e-10;
            let d = design_uniform_j(&s).unwrap();
            assert_eq!(d.diagnostics.iterations, 0, "n={n}");
            assert!(d.coupling.nn_relative_std() < 1e-10);
        }
    }

    #[test]
    fn suppression_offsets() {
        let s = spec(10);
        let d = design_uniform_j(&s).unwrap();
        let (_, single) = single_trap_reference(&s).unwrap();
        let r = suppression_report(&single, &d.coupling).unwrap();
        assert_eq!(r.rows[0].single_trap_ratio, 1.0);
        assert_eq!(r.rows[0].tailored_ratio, 1.0);
        assert!(r.rows[1].tailored_ratio < r.rows[1].single_trap_ratio);
        for w in r.rows.windows(2) {
            assert!(w[1].tailored_ratio < w[0].tailored_ratio);
        }
        let other = single_trap_reference(&spec(4)).unwrap().1;
        assert!(suppression_report(&other, &d.coupling).is_err());
    }

    #[test]
    fn profile_csv_layout() {
        let p = strength_profile_vs_n(&spec(3), &[3, 4]).unwrap();
        let csv = p.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,curve_0,curve_1");
        assert!(lines[1].starts_with("3,1.00000000000e6,"));
        assert!(lines[2].starts_with("4,1.00000000000e6,"));
    }
}
