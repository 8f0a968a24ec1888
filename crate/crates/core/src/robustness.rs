//! Monte-Carlo tolerance studies of a finished design.
//!
//! Each sample perturbs trap centers and/or trap frequencies, re-solves the
//! chain and compares its nearest-neighbour couplings against the
//! unperturbed design. Sample `i` draws from ChaCha8 seeded with the study
//! seed on stream `i`, so results do not depend on thread scheduling and
//! the same seed reproduces a study bit for bit on any platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainConfiguration, ChainSolution, MicrotrapArray};
use crate::coupling::{j_matrix_inverse, relative_std, uniform_gradients};
use crate::design::TrapDesign;
use crate::error::{Error, Result};

/// How a perturbation is drawn from its `range`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    /// Uniform on `[-range, +range]`.
    #[default]
    Uniform,
    /// Normal with standard deviation `range`.
    Gaussian,
}

impl Distribution {
    fn draw(self, rng: &mut ChaCha8Rng, range: f64) -> f64 {
        if range == 0.0 {
            return 0.0;
        }
        match self {
            Distribution::Uniform => rng.random_range(-range..=range),
            Distribution::Gaussian => Normal::new(0.0, range).expect("finite range").sample(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationKind {
    Positions,
    Strengths,
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleOutcome {
    pub index: usize,
    /// `|J'_{i,i+1} − J_{i,i+1}| / |J_{i,i+1}|` per pair.
    pub nn_relative_deviation: Vec<f64>,
    /// Relative std of the perturbed nearest-neighbour couplings.
    pub nn_relative_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationSummary {
    /// Mean over all samples and pairs.
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    /// Mean over samples of the within-sample relative std.
    pub mean_nn_relative_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationStudy {
    pub kind: PerturbationKind,
    pub sample_count: usize,
    pub position_range_m: f64,
    pub strength_range_hz: f64,
    pub distribution: Distribution,
    pub seed: u64,
    pub failed_samples: usize,
    pub summary: DeviationSummary,
    pub samples: Vec<SampleOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudySettings {
    pub samples: usize,
    pub seed: u64,
    pub distribution: Distribution,
}

impl Default for StudySettings {
    fn default() -> Self {
        Self {
            samples: 500,
            seed: 0,
            distribution: Distribution::Uniform,
        }
    }
}

pub fn monte_carlo_positions(design: &TrapDesign, range_m: f64, settings: StudySettings) -> Result<PerturbationStudy> {
    run(design, PerturbationKind::Positions, range_m, 0.0, settings)
}

pub fn monte_carlo_strengths(design: &TrapDesign, range_hz: f64, settings: StudySettings) -> Result<PerturbationStudy> {
    run(design, PerturbationKind::Strengths, 0.0, range_hz, settings)
}

pub fn monte_carlo_joint(
    design: &TrapDesign,
    position_range_m: f64,
    strength_range_hz: f64,
    settings: StudySettings,
) -> Result<PerturbationStudy> {
    run(design, PerturbationKind::Joint, position_range_m, strength_range_hz, settings)
}

fn sample(
    design: &TrapDesign,
    baseline: &[f64],
    position_range: f64,
    strength_range: f64,
    settings: &StudySettings,
    index: usize,
) -> Result<SampleOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    rng.set_stream(index as u64);
    let species = &design.spec.species;
    let n = design.traps.len();

    let centers: Vec<f64> = design
        .traps
        .centers()
        .iter()
        .map(|k| k + settings.distribution.draw(&mut rng, position_range))
        .collect();
    let freqs: Vec<f64> = design
        .trap_frequencies()
        .iter()
        .map(|f| f + settings.distribution.draw(&mut rng, strength_range))
        .collect();
    if let Some(f) = freqs.iter().find(|f| !(**f > 0.0)) {
        return Err(Error::invalid(format!("perturbed trap frequency {f} is not positive")));
    }

    let traps = MicrotrapArray::from_frequencies(species, centers, &freqs)?;
    let config = ChainConfiguration::new(species.clone(), design.spec.field, traps).with_coulomb(design.spec.coulomb);
    let solution = ChainSolution::solve(&config)?;
    let gradients = uniform_gradients(species, &design.spec.field, n);
    let j = j_matrix_inverse(&solution, &gradients, design.spec.convention)?;
    let nn = j.nearest_neighbour();
    Ok(SampleOutcome {
        index,
        nn_relative_deviation: nn
            .iter()
            .zip(baseline)
            .map(|(a, b)| ((a - b) / b).abs())
            .collect(),
        nn_relative_std: relative_std(&nn),
    })
}

fn run(
    design: &TrapDesign,
    kind: PerturbationKind,
    position_range: f64,
    strength_range: f64,
    settings: StudySettings,
) -> Result<PerturbationStudy> {
    if !(position_range >= 0.0 && strength_range >= 0.0) {
        return Err(Error::invalid("perturbation ranges must be >= 0"));
    }
    if settings.samples == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    if design.traps.len() < 2 {
        return Err(Error::invalid("need at least two ions for nearest-neighbour couplings"));
    }
    let baseline = design.coupling.nearest_neighbour();
    if baseline.contains(&0.0) {
        return Err(Error::invalid("design has zero nearest-neighbour coupling (no field gradient?)"));
    }

    let outcomes: Vec<Result<SampleOutcome>> = (0..settings.samples)
        .into_par_iter()
        .map(|i| sample(design, &baseline, position_range, strength_range, &settings, i))
        .collect();
    let failed_samples = outcomes.iter().filter(|o| o.is_err()).count();
    let samples: Vec<SampleOutcome> = outcomes.into_iter().filter_map(|o| o.ok()).collect();
    if samples.is_empty() {
        return Err(Error::invalid("every Monte-Carlo sample failed"));
    }

    let mut all: Vec<f64> = samples
        .iter()
        .flat_map(|s| s.nn_relative_deviation.iter().cloned())
        .collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let max = all.iter().cloned().fold(0.0, f64::max);
    all.sort_by(|a, b| a.total_cmp(b));
    let median = if all.len() % 2 == 1 {
        all[all.len() / 2]
    } else {
        0.5 * (all[all.len() / 2 - 1] + all[all.len() / 2])
    };
    let mean_nn_relative_std = samples.iter().map(|s| s.nn_relative_std).sum::<f64>() / samples.len() as f64;

    Ok(PerturbationStudy {
        kind,
        sample_count: settings.samples,
        position_range_m: position_range,
        strength_range_hz: strength_range,
        distribution: settings.distribution,
        seed: settings.seed,
        failed_samples,
        summary: DeviationSummary {
            mean,
            median,
            max,
            mean_nn_relative_std,
        },
        samples,
    })
}
