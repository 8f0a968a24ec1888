//! Mode dispatch and report emission.
//!
//! Each `run_*` function computes one in-memory result and renders every
//! artifact (JSON, CSV, aligned text) from it. [`write_artifacts`] then
//! places them in the output directory, each through a temporary file and
//! a rename so readers never see a partial file.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::atomic::{manipulate_separation, qubit_transition_frequency, readout_separation, MagneticField};
use crate::chain::{ground_state_extent, ChainConfiguration, ChainSolution, MicrotrapArray};
use crate::config::{Mode, RunConfig};
use crate::coupling::{
    discrimination_margin, j_matrix_inverse, j_matrix_mode_sum, sideband_extent, uniform_gradients, BandStructure,
    CouplingMatrix,
};
use crate::design::{
    design_uniform_j, single_trap_reference, strength_profile_vs_n, suppression_report, DesignDiagnostics, DesignSpec,
    StrengthProfiles, SuppressionReport, TrapDesign,
};
use crate::error::{Error, Result};
use crate::robustness::{
    monte_carlo_joint, monte_carlo_positions, monte_carlo_strengths, PerturbationStudy, StudySettings,
};
use crate::scaling::{band_convergence_study, single_trap_band_growth, spacing_scaling_study, ScalingFit};

pub const TOOL_NAME: &str = "ionforge";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub mode: Mode,
    pub artifacts: Vec<Artifact>,
    /// Short human-readable summary for the terminal.
    pub summary: String,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    config: &'a RunConfig,
    result: &'a T,
}

fn json_artifact<T: Serialize>(name: &str, config: &RunConfig, result: &T) -> Result<Artifact> {
    let env = Envelope {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        seed: config.seed,
        config,
        result,
    };
    let mut contents = serde_json::to_string_pretty(&env)?;
    contents.push('\n');
    Ok(Artifact {
        file_name: name.to_string(),
        contents,
    })
}

fn text_artifact(name: &str, contents: String) -> Artifact {
    Artifact {
        file_name: name.to_string(),
        contents,
    }
}

/// Writes every artifact into `dir`, creating it if needed. Returns the
/// final paths in artifact order.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.file_name);
            write_atomic(&path, a.contents.as_bytes())?;
            Ok(path)
        })
        .collect()
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.{}.tmp", file_name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

/// Runs the configured mode and writes its artifacts to `config.out`.
pub fn execute(config: &RunConfig) -> Result<(RunOutput, Vec<PathBuf>)> {
    let output = run(config)?;
    let paths = write_artifacts(&config.out, &output.artifacts)?;
    Ok((output, paths))
}

/// Computes the configured mode without touching the filesystem.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    match config.mode {
        Mode::Analyze => run_analyze(config),
        Mode::Design => run_design(config),
        Mode::Plan => run_plan(config),
        Mode::Table1 => run_table1(config),
        Mode::Fig2 => run_fig2(config),
        Mode::Fig3 => run_fig3(config),
        Mode::ScanN => run_scan_n(config),
        Mode::ScanH => run_scan_h(config),
        Mode::Perturb => run_perturb(config),
    }
}

pub fn design_spec(config: &RunConfig) -> Result<DesignSpec> {
    let field = MagneticField::new(config.b0, config.grad)?;
    let mut spec = DesignSpec::new(
        config.species_data.clone(),
        field,
        config.n,
        config.h / 1e6,
        config.nu1 * 1e6,
    )?;
    spec.uniformity_tolerance = config.uniformity_tolerance;
    Ok(spec)
}

// ---- analyze ----

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainAnalysis {
    pub n: usize,
    pub trap_frequency_hz: f64,
    pub positions_m: Vec<f64>,
    pub spacings_m: Vec<f64>,
    pub band: BandStructure,
    pub ground_state_extent_m: Vec<f64>,
    pub qubit_frequencies_hz: Vec<f64>,
    pub paschen_back: bool,
    pub discrimination_margin: Option<f64>,
    pub nn_coupling_hz: Vec<f64>,
    pub nn_relative_std: f64,
    /// Largest `|J_inverse − J_mode_sum|` over all entries, Hz.
    pub route_difference_hz: f64,
    pub equilibrium_iterations: usize,
    pub equilibrium_residual_n: f64,
    pub coupling: CouplingMatrix,
}

/// N ions in one harmonic well of frequency ν₁.
pub fn analyze_single_trap(config: &RunConfig) -> Result<ChainAnalysis> {
    let species = &config.species_data;
    let field = MagneticField::new(config.b0, config.grad)?;
    let nu = config.nu1 * 1e6;
    let traps = MicrotrapArray::single_trap(0.0, species.strength_for_frequency(nu), config.n)?;
    let chain = ChainConfiguration::new(species.clone(), field, traps);
    let solution = ChainSolution::solve(&chain)?;
    let gradients = uniform_gradients(species, &field, config.n);
    let convention = Default::default();
    let coupling = j_matrix_inverse(&solution, &gradients, convention)?;
    let other = j_matrix_mode_sum(&solution, &gradients, convention)?;
    let route_difference_hz = (&coupling.values - &other.values).abs().max();
    let qubits: Vec<_> = solution
        .equilibrium
        .iter()
        .map(|&x| qubit_transition_frequency(species, &field, x))
        .collect();
    let nn = coupling.nearest_neighbour();
    Ok(ChainAnalysis {
        n: config.n,
        trap_frequency_hz: nu,
        spacings_m: solution.equilibrium.windows(2).map(|w| w[1] - w[0]).collect(),
        band: sideband_extent(&solution),
        ground_state_extent_m: solution
            .mode_frequencies
            .iter()
            .map(|f| ground_state_extent(species, *f))
            .collect(),
        qubit_frequencies_hz: qubits.iter().map(|q| q.frequency).collect(),
        paschen_back: qubits.iter().all(|q| q.paschen_back),
        discrimination_margin: discrimination_margin(species, &field, &solution),
        nn_relative_std: coupling.nn_relative_std(),
        nn_coupling_hz: nn,
        route_difference_hz,
        equilibrium_iterations: solution.iterations,
        equilibrium_residual_n: solution.residual,
        positions_m: solution.equilibrium,
        coupling,
    })
}

pub fn run_analyze(config: &RunConfig) -> Result<RunOutput> {
    let a = analyze_single_trap(config)?;
    let summary = format!(
        "single trap, {} ions at {:.6} MHz: highest mode {:.6} MHz, mean J(i,i+1) {:.3} Hz, NN relative std {:.4}\n",
        a.n,
        a.trap_frequency_hz * 1e-6,
        a.band.extent * 1e-6,
        mean(&a.nn_coupling_hz),
        a.nn_relative_std
    );
    Ok(RunOutput {
        mode: config.mode,
        artifacts: vec![
            json_artifact("analyze.json", config, &a)?,
            text_artifact("analyze_j.csv", a.coupling.to_csv()),
        ],
        summary,
    })
}

// ---- design ----

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub species: String,
    pub field: MagneticField,
    #[serde(rename = "N")]
    pub n: usize,
    /// m
    pub h: f64,
    pub centers_m: Vec<f64>,
    #[serde(rename = "strengths_N_per_m")]
    pub strengths_n_per_m: Vec<f64>,
    pub trap_frequencies_hz: Vec<f64>,
    pub positions_m: Vec<f64>,
    pub mode_frequencies_hz: Vec<f64>,
    #[serde(rename = "J_matrix_hz")]
    pub j_matrix_hz: Vec<Vec<f64>>,
    pub convention_note: &'static str,
    pub diagnostics: DesignDiagnostics,
}

impl DesignReport {
    pub fn from_design(d: &TrapDesign) -> Self {
        Self {
            species: d.spec.species.name.clone(),
            field: d.spec.field,
            n: d.spec.ion_count,
            h: d.spec.spacing,
            centers_m: d.traps.centers().to_vec(),
            strengths_n_per_m: d.traps.strengths().to_vec(),
            trap_frequencies_hz: d.trap_frequencies(),
            positions_m: d.solution.equilibrium.clone(),
            mode_frequencies_hz: d.solution.mode_frequencies.clone(),
            j_matrix_hz: d.coupling.rows(),
            convention_note: d.coupling.convention.note(),
            diagnostics: d.diagnostics.clone(),
        }
    }
}

pub fn run_design(config: &RunConfig) -> Result<RunOutput> {
    let design = design_uniform_j(&design_spec(config)?)?;
    let report = DesignReport::from_design(&design);
    let summary = format!(
        "{} ions, h = {} um: {} refinement steps, NN relative std {:.3e}, max spacing error {:.3e} m\n",
        report.n,
        config.h,
        report.diagnostics.iterations,
        report.diagnostics.nn_relative_std,
        report.diagnostics.max_spacing_error_m
    );
    Ok(RunOutput {
        mode: config.mode,
        artifacts: vec![
            json_artifact("design.json", config, &report)?,
            text_artifact("design_j.csv", design.coupling.to_csv()),
        ],
        summary,
    })
}

// ---- plan / table1 ----

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyPlan {
    pub mean_qubit_resonance_ghz: f64,
    pub neighbor_mw_separation_mhz: f64,
    /// Highest motional mode frequency.
    pub sideband_extent_mhz: f64,
    /// Highest minus lowest motional mode frequency.
    pub sideband_band_width_mhz: f64,
    pub neighbor_optical_separation_mhz: f64,
    /// Smallest neighbouring qubit separation over twice the sideband extent.
    pub discrimination_margin: f64,
    /// Neighbours can be resolved: margin above one.
    pub addressable: bool,
    /// The field at every ion exceeds the Paschen-Back threshold.
    pub paschen_back: bool,
    pub mean_nn_coupling_hz: f64,
    pub nn_relative_std: f64,
}

pub fn frequency_plan(design: &TrapDesign) -> FrequencyPlan {
    let species = &design.spec.species;
    let field = &design.spec.field;
    let sol = &design.solution;
    let qubits: Vec<_> = sol
        .equilibrium
        .iter()
        .map(|&x| qubit_transition_frequency(species, field, x))
        .collect();
    let mean_f = mean(&qubits.iter().map(|q| q.frequency).collect::<Vec<_>>());
    let spacing = mean(&sol.equilibrium.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>());
    let band = sideband_extent(sol);
    let margin = discrimination_margin(species, field, sol).unwrap_or(0.0);
    let nn = design.coupling.nearest_neighbour();
    FrequencyPlan {
        mean_qubit_resonance_ghz: mean_f * 1e-9,
        neighbor_mw_separation_mhz: manipulate_separation(species, field.gradient, spacing).abs() * 1e-6,
        sideband_extent_mhz: band.extent * 1e-6,
        sideband_band_width_mhz: band.band_width * 1e-6,
        neighbor_optical_separation_mhz: readout_separation(species, field.gradient, spacing).abs() * 1e-6,
        discrimination_margin: margin,
        addressable: margin > 1.0,
        paschen_back: qubits.iter().all(|q| q.paschen_back),
        mean_nn_coupling_hz: mean(&nn),
        nn_relative_std: design.coupling.nn_relative_std(),
    }
}

pub fn run_plan(config: &RunConfig) -> Result<RunOutput> {
    let design = design_uniform_j(&design_spec(config)?)?;
    let plan = frequency_plan(&design);
    Ok(RunOutput {
        mode: config.mode,
        summary: table1_text(config, &plan),
        artifacts: vec![json_artifact("plan.json", config, &plan)?],
    })
}

/// Aligned plain-text table of a frequency plan.
pub fn table1_text(config: &RunConfig, plan: &FrequencyPlan) -> String {
    let rows: [(&str, String); 9] = [
        ("Mean qubit resonance frequency (GHz)", format!("{:.4}", plan.mean_qubit_resonance_ghz)),
        (
            "Neighbouring qubit resonance frequency separation (MHz)",
            format!("{:.3}", plan.neighbor_mw_separation_mhz),
        ),
        ("Motional sideband extent (MHz)", format!("{:.4}", plan.sideband_extent_mhz)),
        ("Motional band width (MHz)", format!("{:.4}", plan.sideband_band_width_mhz)),
        (
            "Neighbouring qubit optical readout frequency separation (MHz)",
            format!("{:.3}", plan.neighbor_optical_separation_mhz),
        ),
        ("Discrimination margin", format!("{:.3}", plan.discrimination_margin)),
        ("Mean nearest-neighbour J (Hz)", format!("{:.2}", plan.mean_nn_coupling_hz)),
        ("Nearest-neighbour J relative std", format!("{:.3e}", plan.nn_relative_std)),
        (
            "Addressable / Paschen-Back",
            format!("{} / {}", yes_no(plan.addressable), yes_no(plan.paschen_back)),
        ),
    ];
    let label_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let value_w = rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
    let mut out = format!(
        "{} {} ions, B0 = {} T, b = {} T/m, nu1 = {} MHz, h = {} um\n",
        config.n, config.species_data.name, config.b0, config.grad, config.nu1, config.h
    );
    out.push_str(&"-".repeat(label_w + value_w + 2));
    out.push('\n');
    for (label, value) in &rows {
        out.push_str(&format!("{label:<label_w$}  {value:>value_w$}\n"));
    }
    out
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn run_table1(config: &RunConfig) -> Result<RunOutput> {
    let design = design_uniform_j(&design_spec(config)?)?;
    let plan = frequency_plan(&design);
    let text = table1_text(config, &plan);
    Ok(RunOutput {
        mode: config.mode,
        artifacts: vec![
            json_artifact("table1.json", config, &plan)?,
            text_artifact("table1.txt", text.clone()),
        ],
        summary: text,
    })
}

// ---- fig2 ----

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingSummary {
    pub nn_coupling_hz: Vec<f64>,
    pub nn_relative_std: f64,
    pub max_asymmetry_hz: f64,
}

impl CouplingSummary {
    fn of(j: &CouplingMatrix) -> Self {
        Self {
            nn_coupling_hz: j.nearest_neighbour(),
            nn_relative_std: j.nn_relative_std(),
            max_asymmetry_hz: (&j.values - j.values.transpose()).abs().max(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingComparison {
    pub single_trap: CouplingSummary,
    pub tailored: CouplingSummary,
    pub suppression: SuppressionReport,
    pub convention_note: &'static str,
}

pub fn compare_couplings(config: &RunConfig) -> Result<(CouplingComparison, CouplingMatrix, CouplingMatrix)> {
    let spec = design_spec(config)?;
    let (_, single) = single_trap_reference(&spec)?;
    let design = design_uniform_j(&spec)?;
    let tailored = design.coupling;
    let cmp = CouplingComparison {
        single_trap: CouplingSummary::of(&single),
        tailored: CouplingSummary::of(&tailored),
        suppression: suppression_report(&single, &tailored)?,
        convention_note: tailored.convention.note(),
    };
    Ok((cmp, single, tailored))
}

pub fn run_fig2(config: &RunConfig) -> Result<RunOutput> {
    let (cmp, single, tailored) = compare_couplings(config)?;
    let summary = format!(
        "NN relative std: single trap {:.4}, tailored {:.3e}\n",
        cmp.single_trap.nn_relative_std, cmp.tailored.nn_relative_std
    );
    Ok(RunOutput {
        mode: config.mode,
        artifacts: vec![
            json_artifact("fig2.json", config, &cmp)?,
            text_artifact("fig2_single_trap_j.csv", single.to_csv()),
            text_artifact("fig2_tailored_j.csv", tailored.to_csv()),
        ],
        summary,
    })
}

// ---- fig3 ----

pub fn run_fig3(config: &RunConfig) -> Result<RunOutput> {
    let profiles: StrengthProfiles = strength_profile_vs_n(&design_spec(config)?, &config.fig3_n)?;
    let summary = format!(
        "strength profiles for N = {}..{} at h = {} um, end trap {} MHz\n",
        config.fig3_n[0],
        config.fig3_n[config.fig3_n.len() - 1],
        config.h,
        config.nu1
    );
    Ok(RunOutput {
        mode: config.mode,
        artifacts: vec![
            json_artifact("fig3.json", config, &profiles)?,
            text_artifact("fig3_profiles.csv", profiles.to_csv()),
        ],
        summary,
    })
}

// ---- scans ----

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NScan {
    pub band_convergence: ScalingFit,
    /// Highest mode of N ions in one well at ν₁, fitted linearly in N.
    pub single_trap_growth: ScalingFit,
}

pub fn run_scan_n(config: &RunConfig) -> Result<RunOutput> {
    let spec = design_spec(config)?;
    let scan = NScan {
        band_convergence: band_convergence_study(&spec, &config.scan_n, Some(config.asymptote_n))?,
        single_trap_growth: single_trap_band_growth(&config.species_data, config.nu1 * 1e6, &config.growth_n)?,
    };
    let summary = format!(
        "band gap exponent in N: {:.4} (rms residual {:.3e}); single-trap growth {:.4} MHz per ion\n",
        scan.band_convergence.fitted_exponent,
        scan.band_convergence.fit_residual,
        scan.single_trap_growth.fitted_exponent * 1e-6
    );
    Ok(RunOutput {
        mode: config.mode,
        artifacts: vec![json_artifact("scan_n.json", config, &scan)?],
        summary,
    })
}

pub fn run_scan_h(config: &RunConfig) -> Result<RunOutput> {
    let spec = design_spec(config)?;
    let h: Vec<f64> = config.scan_h_um.iter().map(|h| h / 1e6).collect();
    let fit = spacing_scaling_study(&spec, config.n, &h, config.asymptote_n)?;
    let summary = format!(
        "band gap exponent in h: {:.4} (rms residual {:.3e})\n",
        fit.fitted_exponent, fit.fit_residual
    );
    Ok(RunOutput {
        mode: config.mode,
        artifacts: vec![json_artifact("scan_h.json", config, &fit)?],
        summary,
    })
}

// ---- perturb ----

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbReport {
    pub baseline_nn_coupling_hz: Vec<f64>,
    pub positions: PerturbationStudy,
    pub strengths: PerturbationStudy,
    pub joint: PerturbationStudy,
}

pub fn run_perturb(config: &RunConfig) -> Result<RunOutput> {
    let design = design_uniform_j(&design_spec(config)?)?;
    let settings = StudySettings {
        samples: config.samples,
        seed: config.seed,
        distribution: config.distribution,
    };
    let dx = config.position_range_um / 1e6;
    let df = config.strength_range_khz * 1e3;
    let report = PerturbReport {
        baseline_nn_coupling_hz: design.coupling.nearest_neighbour(),
        positions: monte_carlo_positions(&design, dx, settings)?,
        strengths: monte_carlo_strengths(&design, df, settings)?,
        joint: monte_carlo_joint(&design, dx, df, settings)?,
    };
    let summary = format!(
        "mean |dJ|/J over {} samples: positions {:.4}%, strengths {:.4}%, joint {:.4}%\n",
        config.samples,
        100.0 * report.positions.summary.mean,
        100.0 * report.strengths.summary.mean,
        100.0 * report.joint.summary.mean
    );
    Ok(RunOutput {
        mode: config.mode,
        artifacts: vec![json_artifact("perturb.json", config, &report)?],
        summary,
    })
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}
