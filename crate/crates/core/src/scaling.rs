//! Band-convergence and band-growth scaling studies.
//!
//! For tailored arrays the highest mode frequency `ν_max(N)` approaches a
//! limit as N grows. The gap `Δν = ν_max(∞) − ν_max(N)` is estimated with the
//! largest simulated chain standing in for the limit, then fitted to a power
//! law by ordinary least squares in log-log space.

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{ChainConfiguration, ChainSolution, MicrotrapArray};
use crate::coupling::sideband_extent;
use crate::design::{design_uniform_j, DesignSpec};
use crate::error::{Error, Result};
use crate::species::IonSpecies;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// `y = c x^p`, fitted as a line in `(ln x, ln y)`.
    PowerLaw,
    /// `y = a + s x`.
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Root-mean-square residual, in the fitted coordinates.
    pub rms_residual: f64,
}

/// Ordinary least squares. Needs at least two distinct abscissae.
pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!("{} points", points.len())));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all abscissae equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        rms_residual: (ss_res / n).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    /// Name and unit of the abscissa.
    pub variable: String,
    pub model: FitModel,
    /// `(x, y)` pairs entering the fit, in natural units (y in Hz).
    pub sample_points: Vec<(f64, f64)>,
    /// Power-law exponent, or the slope for a linear fit.
    pub fitted_exponent: f64,
    /// `ln c` for a power law, the intercept for a linear fit.
    pub intercept: f64,
    pub fit_residual: f64,
    pub r_squared: f64,
    /// Abscissae left out because their gap to the asymptote was not positive.
    pub excluded: Vec<f64>,
    /// Ion count and highest mode frequency (Hz) used as the limit.
    pub asymptote: Option<(usize, f64)>,
}

pub const MIN_FIT_POINTS: usize = 4;

fn power_law_fit(
    variable: &str,
    points: Vec<(f64, f64)>,
    excluded: Vec<f64>,
    asymptote: Option<(usize, f64)>,
) -> Result<ScalingFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateFit(format!(
            "{} usable points, need {MIN_FIT_POINTS}",
            points.len()
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let fit = fit_line(&logs)?;
    Ok(ScalingFit {
        variable: variable.to_string(),
        model: FitModel::PowerLaw,
        sample_points: points,
        fitted_exponent: fit.slope,
        intercept: fit.intercept,
        fit_residual: fit.rms_residual,
        r_squared: fit.r_squared,
        excluded,
        asymptote,
    })
}

/// Fits `y = c x^p` to the given points directly.
pub fn fit_power_law(variable: &str, points: &[(f64, f64)]) -> Result<ScalingFit> {
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return Err(Error::DegenerateFit(format!("non-positive point {p:?}")));
    }
    power_law_fit(variable, points.to_vec(), Vec::new(), None)
}

fn tailored_band_max(template: &DesignSpec, n: usize, spacing: f64) -> Result<f64> {
    let spec = template.with_ion_count(n).with_spacing(spacing);
    Ok(sideband_extent(&design_uniform_j(&spec)?.solution).extent)
}

fn gaps_to_fit(variable: &str, gaps: Vec<(f64, f64)>, asymptote: (usize, f64)) -> Result<ScalingFit> {
    let nu_max = asymptote.1;
    if gaps.iter().all(|(_, g)| g.abs() < 1e-6 * nu_max) {
        return Err(Error::DegenerateFit(format!(
            "every gap is below 1e-6 of the asymptote {nu_max:e} Hz"
        )));
    }
    let (points, excluded): (Vec<_>, Vec<_>) = gaps.into_iter().partition(|(_, g)| *g > 0.0);
    power_law_fit(variable, points, excluded.into_iter().map(|p| p.0).collect(), Some(asymptote))
}

/// Gap `ν_max(N_asym) − ν_max(N)` versus N at the template's spacing and
/// end strength, fitted to `N^p`.
///
/// The limit is the largest simulated chain: `asymptote_n` when given
/// (it must exceed every entry of `n_values`), else the largest entry of
/// `n_values`, which then drops out of the fit.
pub fn band_convergence_study(
    template: &DesignSpec,
    n_values: &[usize],
    asymptote_n: Option<usize>,
) -> Result<ScalingFit> {
    if n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("N values must be strictly ascending"));
    }
    let largest = *n_values.last().ok_or_else(|| Error::invalid("no N values"))?;
    let (samples, asym_n) = match asymptote_n {
        Some(a) if a > largest => (n_values, a),
        Some(a) => return Err(Error::invalid(format!("asymptote N={a} must exceed the largest sample N={largest}"))),
        None => (&n_values[..n_values.len() - 1], largest),
    };
    let mut all: Vec<usize> = samples.to_vec();
    all.push(asym_n);
    let maxima = all
        .par_iter()
        .map(|&n| tailored_band_max(template, n, template.spacing))
        .collect::<Result<Vec<f64>>>()?;
    let limit = *maxima.last().expect("nonempty");
    let gaps = samples
        .iter()
        .zip(&maxima)
        .map(|(&n, &v)| (n as f64, limit - v))
        .collect();
    gaps_to_fit("N", gaps, (asym_n, limit))
}

/// Gap `ν_max(N_asym, h) − ν_max(N, h)` versus spacing h (m), fitted to `h^p`.
pub fn spacing_scaling_study(
    template: &DesignSpec,
    n: usize,
    h_values: &[f64],
    asymptote_n: usize,
) -> Result<ScalingFit> {
    if h_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("spacings must be strictly ascending"));
    }
    if asymptote_n <= n {
        return Err(Error::invalid(format!("asymptote N={asymptote_n} must exceed N={n}")));
    }
    let rows = h_values
        .par_iter()
        .map(|&h| {
            let limit = tailored_band_max(template, asymptote_n, h)?;
            let v = tailored_band_max(template, n, h)?;
            Ok((h, limit, limit - v))
        })
        .collect::<Result<Vec<_>>>()?;
    // the limit changes with h; report the one at the smallest spacing
    let asym = (asymptote_n, rows.first().map(|r| r.1).unwrap_or(f64::NAN));
    let nu_floor = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let gaps: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.2)).collect();
    if gaps.iter().all(|(_, g)| g.abs() < 1e-6 * nu_floor) {
        return Err(Error::DegenerateFit("every gap is below 1e-6 of the asymptote".into()));
    }
    let (points, excluded): (Vec<_>, Vec<_>) = gaps.into_iter().partition(|(_, g)| *g > 0.0);
    power_law_fit("h_m", points, excluded.into_iter().map(|p| p.0).collect(), Some(asym))
}

/// Highest mode frequency of N ions in one harmonic well, versus N, fitted
/// to a line. `fitted_exponent` holds the slope ν* (Hz per ion).
pub fn single_trap_band_growth(species: &IonSpecies, nu: f64, n_values: &[usize]) -> Result<ScalingFit> {
    let g = species.strength_for_frequency(nu);
    let field = crate::atomic::MagneticField { offset: 0.0, gradient: 0.0 };
    let points = n_values
        .par_iter()
        .map(|&n| {
            let traps = MicrotrapArray::single_trap(0.0, g, n)?;
            let config = ChainConfiguration::new(species.clone(), field, traps);
            let sol = ChainSolution::solve(&config)?;
            Ok((n as f64, sideband_extent(&sol).extent))
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_line(&points)?;
    Ok(ScalingFit {
        variable: "N".into(),
        model: FitModel::Linear,
        sample_points: points,
        fitted_exponent: fit.slope,
        intercept: fit.intercept,
        fit_residual: fit.rms_residual,
        r_squared: fit.r_squared,
        excluded: Vec::new(),
        asymptote: None,
    })
}
