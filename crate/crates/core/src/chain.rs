//! Classical mechanics of a 1D ion chain in an array of harmonic microtraps:
//! total potential, equilibrium, Hessian and collective axial modes.
//!
//! The potential is
//!
//! ```text
//! V(x) = Σᵢ ½ gᵢ (xᵢ − kᵢ)² + Σ_{i<j} e² / (4πε₀ |xᵢ − xⱼ|)
//! ```
//!
//! For ordered positions the Hessian is `diag(g)` plus a weighted graph
//! Laplacian, hence positive definite everywhere on the ordered domain. `V`
//! is strictly convex there and Newton's method with backtracking converges
//! from any ordered starting point.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::atomic::MagneticField;
use crate::constants::{coulomb_coupling, REDUCED_PLANCK};
use crate::error::{Error, Result};
use crate::species::IonSpecies;

/// Which Coulomb pairs enter the potential.
///
/// `NearestNeighbour` truncates the interaction to adjacent ions. It exists
/// to check the analytic nearest-neighbour strength formula and is never used
/// for production designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoulombModel {
    #[default]
    Full,
    NearestNeighbour,
}

impl CoulombModel {
    fn couples(self, i: usize, j: usize) -> bool {
        match self {
            CoulombModel::Full => i != j,
            CoulombModel::NearestNeighbour => i.abs_diff(j) == 1,
        }
    }
}

/// One harmonic well per ion: centers `kᵢ` (m) and strengths `gᵢ = m ωᵢ²`
/// (N/m).
///
/// Centers are strictly increasing, except for the single-trap case where
/// every ion sees the same well (all centers and strengths equal).
#[derive(Debug, Clone, PartialEq)]
pub struct MicrotrapArray {
    centers: Vec<f64>,
    strengths: Vec<f64>,
}

impl MicrotrapArray {
    pub fn new(centers: Vec<f64>, strengths: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::invalid("trap array is empty"));
        }
        if centers.len() != strengths.len() {
            return Err(Error::invalid(format!(
                "{} centers but {} strengths",
                centers.len(),
                strengths.len()
            )));
        }
        if let Some(g) = strengths.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::invalid(format!("trap strength must be positive, got {g}")));
        }
        if centers.iter().any(|k| !k.is_finite()) {
            return Err(Error::invalid("trap centers must be finite"));
        }
        let array = Self { centers, strengths };
        if !array.is_single_trap() {
            if let Some(i) = array.centers.windows(2).position(|w| !(w[1] > w[0])) {
                return Err(Error::invalid(format!(
                    "trap centers must be strictly increasing (traps {} and {})",
                    i + 1,
                    i + 2
                )));
            }
        }
        Ok(array)
    }

    /// `n` ions sharing one harmonic well.
    pub fn single_trap(center: f64, strength: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("ion count must be at least 1"));
        }
        Self::new(vec![center; n], vec![strength; n])
    }

    /// Builds an array from trap frequencies (Hz) using `g = m ω²`.
    pub fn from_frequencies(species: &IonSpecies, centers: Vec<f64>, frequencies: &[f64]) -> Result<Self> {
        let strengths = frequencies
            .iter()
            .map(|&f| species.strength_for_frequency(f))
            .collect();
        Self::new(centers, strengths)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn trap_frequencies(&self, species: &IonSpecies) -> Vec<f64> {
        self.strengths
            .iter()
            .map(|&g| species.frequency_for_strength(g))
            .collect()
    }

    pub fn is_single_trap(&self) -> bool {
        self.centers.len() > 1
            && self.centers.iter().all(|&k| k == self.centers[0])
            && self.strengths.iter().all(|&g| g == self.strengths[0])
    }

    /// Same array with every center shifted by `delta`.
    pub fn translated(&self, delta: f64) -> Self {
        Self {
            centers: self.centers.iter().map(|k| k + delta).collect(),
            strengths: self.strengths.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfiguration {
    pub species: IonSpecies,
    pub field: MagneticField,
    pub traps: MicrotrapArray,
    pub coulomb: CoulombModel,
}

impl ChainConfiguration {
    pub fn new(species: IonSpecies, field: MagneticField, traps: MicrotrapArray) -> Self {
        Self {
            species,
            field,
            traps,
            coulomb: CoulombModel::Full,
        }
    }

    pub fn with_coulomb(mut self, coulomb: CoulombModel) -> Self {
        self.coulomb = coulomb;
        self
    }

    pub fn ion_count(&self) -> usize {
        self.traps.len()
    }

    pub fn potential(&self) -> Potential<'_> {
        Potential::new(&self.traps, self.coulomb)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Converged once max |∂V/∂xᵢ| is below this (N) and the Newton step
    /// has shrunk to rounding level.
    pub force_tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            force_tolerance: 1e-18,
            max_iterations: 200,
            max_halvings: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub positions: Vec<f64>,
    pub iterations: usize,
    /// max |∂V/∂xᵢ| at the returned positions (N).
    pub residual: f64,
}

/// Trap-plus-Coulomb potential of one trap array.
#[derive(Debug, Clone, Copy)]
pub struct Potential<'a> {
    pub traps: &'a MicrotrapArray,
    pub coulomb: CoulombModel,
    k: f64,
}

fn check_positions(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::invalid(format!("expected {n} positions, got {}", x.len())));
    }
    if let Some(i) = x.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Collision(i, i + 1));
    }
    Ok(())
}

impl<'a> Potential<'a> {
    pub fn new(traps: &'a MicrotrapArray, coulomb: CoulombModel) -> Self {
        Self {
            traps,
            coulomb,
            k: coulomb_coupling(),
        }
    }

    fn n(&self) -> usize {
        self.traps.len()
    }

    pub fn energy(&self, x: &[f64]) -> Result<f64> {
        check_positions(self.n(), x)?;
        let (k_c, g) = (self.traps.centers(), self.traps.strengths());
        let mut v = 0.0;
        for i in 0..x.len() {
            let d = x[i] - k_c[i];
            v += 0.5 * g[i] * d * d;
            for j in (i + 1)..x.len() {
                if self.coulomb.couples(i, j) {
                    v += self.k / (x[j] - x[i]);
                }
            }
        }
        Ok(v)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_positions(self.n(), x)?;
        Ok(self.gradient_unchecked(x))
    }

    fn gradient_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let (k_c, g) = (self.traps.centers(), self.traps.strengths());
        let n = x.len();
        let mut grad: Vec<f64> = (0..n).map(|i| g[i] * (x[i] - k_c[i])).collect();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.coulomb.couples(i, j) {
                    let d = x[j] - x[i];
                    let f = self.k / (d * d);
                    // pair repels: pushes i left, j right
                    grad[i] += f;
                    grad[j] -= f;
                }
            }
        }
        grad
    }

    /// Net Coulomb force on each ion (N), positive pointing to +x.
    pub fn coulomb_forces(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_positions(self.n(), x)?;
        let n = x.len();
        let mut f = vec![0.0; n];
        for i in 0..n {
            for j in (i + 1)..n {
                if self.coulomb.couples(i, j) {
                    let d = x[j] - x[i];
                    let p = self.k / (d * d);
                    f[i] -= p;
                    f[j] += p;
                }
            }
        }
        Ok(f)
    }

    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_positions(self.n(), x)?;
        Ok(self.hessian_unchecked(x))
    }

    fn hessian_unchecked(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let g = self.traps.strengths();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = g[i];
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if self.coulomb.couples(i, j) {
                    let d = x[j] - x[i];
                    let c = 2.0 * self.k / (d * d * d);
                    a[(i, j)] = -c;
                    a[(j, i)] = -c;
                    a[(i, i)] += c;
                    a[(j, j)] += c;
                }
            }
        }
        a
    }

    /// Coulomb length `(e²/(4πε₀ g_max))^{1/3}`.
    fn length_scale(&self) -> f64 {
        let g = self.traps.strengths().iter().cloned().fold(0.0, f64::max);
        (self.k / g).cbrt()
    }

    /// Starting point for the Newton solve: trap centers, or an even spread
    /// of half-width `ℓ N^0.6` when the centers coincide.
    pub fn default_guess(&self) -> Vec<f64> {
        let n = self.n();
        let centers = self.traps.centers();
        if n == 1 || centers.windows(2).all(|w| w[1] > w[0]) {
            return centers.to_vec();
        }
        let mid = centers.iter().sum::<f64>() / n as f64;
        let half = self.length_scale() * (n as f64).powf(0.6);
        (0..n)
            .map(|i| mid + half * (2.0 * i as f64 / (n - 1) as f64 - 1.0))
            .collect()
    }

    pub fn equilibrium(&self, guess: Option<&[f64]>, opts: &SolverOptions) -> Result<Equilibrium> {
        let mut x = match guess {
            Some(g) => g.to_vec(),
            None => self.default_guess(),
        };
        check_positions(self.n(), &x)?;
        let scale = self.length_scale() + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let step_floor = 1e-13 * scale;

        let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let mut grad = self.gradient_unchecked(&x);
        let mut residual = max_abs(&grad);
        let mut energy = self.energy(&x)?;

        for it in 0..opts.max_iterations {
            if residual == 0.0 {
                return Ok(Equilibrium { positions: x, iterations: it, residual });
            }
            let a = self.hessian_unchecked(&x);
            let rhs = DVector::from_column_slice(&grad);
            let step = match a.clone().cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => a.lu().solve(&rhs).ok_or(Error::SingularHessian)?,
            };

            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..=opts.max_halvings {
                let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, s)| xi - alpha * s).collect();
                if trial.windows(2).all(|w| w[1] > w[0]) {
                    let e = self.energy(&trial)?;
                    let g = self.gradient_unchecked(&trial);
                    let r = max_abs(&g);
                    if e < energy || r < residual {
                        accepted = Some((trial, g, r, e));
                        break;
                    }
                }
                alpha *= 0.5;
            }

            match accepted {
                Some((trial, g, r, e)) => {
                    let moved = alpha * max_abs(step.as_slice());
                    x = trial;
                    grad = g;
                    residual = r;
                    energy = e;
                    if residual <= opts.force_tolerance && moved <= step_floor {
                        return Ok(Equilibrium { positions: x, iterations: it + 1, residual });
                    }
                }
                // rounding floor: no trial point improves on the current one
                None if residual <= opts.force_tolerance => {
                    return Ok(Equilibrium { positions: x, iterations: it + 1, residual });
                }
                None => {
                    return Err(Error::EquilibriumNotConverged { iterations: it + 1, residual });
                }
            }
        }
        Err(Error::EquilibriumNotConverged {
            iterations: opts.max_iterations,
            residual,
        })
    }
}

pub fn potential_energy(config: &ChainConfiguration, positions: &[f64]) -> Result<f64> {
    config.potential().energy(positions)
}

pub fn potential_gradient(config: &ChainConfiguration, positions: &[f64]) -> Result<Vec<f64>> {
    config.potential().gradient(positions)
}

pub fn hessian(config: &ChainConfiguration, positions: &[f64]) -> Result<DMatrix<f64>> {
    config.potential().hessian(positions)
}

pub fn solve_equilibrium(config: &ChainConfiguration, initial_guess: Option<&[f64]>) -> Result<Equilibrium> {
    config.potential().equilibrium(initial_guess, &SolverOptions::default())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalModes {
    /// Hz, ascending.
    pub frequencies: Vec<f64>,
    /// Columns are unit eigenvectors of the Hessian, in frequency order.
    pub matrix: DMatrix<f64>,
    /// Hessian eigenvalues `m (2πνⱼ)²` (N/m).
    pub eigenvalues: Vec<f64>,
}

/// Eigendecomposition of the Hessian at `equilibrium`.
pub fn normal_modes(config: &ChainConfiguration, equilibrium: &[f64]) -> Result<NormalModes> {
    let a = hessian(config, equilibrium)?;
    modes_from_hessian(&a, config.species.mass)
}

/// Fixes the sign of an eigenvector so its largest-magnitude entry is
/// positive. Entries within 1e-9 of the largest magnitude count as tied and
/// the lowest index wins.
fn fix_sign(v: &mut [f64]) {
    let big = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(&pivot) = v.iter().find(|x| x.abs() >= big * (1.0 - 1e-9)) {
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

pub fn modes_from_hessian(a: &DMatrix<f64>, mass: f64) -> Result<NormalModes> {
    let n = a.nrows();
    let eig = SymmetricEigen::new(a.clone());
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| {
            let mut v: Vec<f64> = eig.eigenvectors.column(j).iter().cloned().collect();
            fix_sign(&mut v);
            (eig.eigenvalues[j], v)
        })
        .collect();

    let scale = pairs.iter().fold(0.0f64, |m, p| m.max(p.0.abs()));
    pairs.sort_by(|a, b| {
        if (a.0 - b.0).abs() <= 1e-10 * scale {
            a.1.iter()
                .zip(&b.1)
                .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        } else {
            a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal)
        }
    });

    if let Some(&(lambda, _)) = pairs.iter().find(|p| !(p.0 > 0.0)) {
        return Err(Error::Unstable(lambda));
    }

    let mut matrix = DMatrix::zeros(n, n);
    for (j, (_, v)) in pairs.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            matrix[(i, j)] = *x;
        }
    }
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let frequencies = eigenvalues.iter().map(|l| (l / mass).sqrt() / TAU).collect();
    Ok(NormalModes {
        frequencies,
        matrix,
        eigenvalues,
    })
}

/// Zero-point amplitude `√(ħ / (2 m ω))` (m) of a mode at `frequency` Hz.
pub fn ground_state_extent(species: &IonSpecies, frequency: f64) -> f64 {
    (REDUCED_PLANCK / (2.0 * species.mass * TAU * frequency)).sqrt()
}

/// Equilibrium, Hessian and normal modes of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSolution {
    /// m, strictly increasing
    pub equilibrium: Vec<f64>,
    /// N/m
    pub hessian: DMatrix<f64>,
    /// Hz, ascending
    pub mode_frequencies: Vec<f64>,
    /// Orthogonal; column j is mode j.
    pub mode_matrix: DMatrix<f64>,
    /// kg
    pub mass: f64,
    pub iterations: usize,
    /// N
    pub residual: f64,
}

impl ChainSolution {
    pub fn solve(config: &ChainConfiguration) -> Result<Self> {
        Self::solve_from(config, None)
    }

    pub fn solve_from(config: &ChainConfiguration, guess: Option<&[f64]>) -> Result<Self> {
        let eq = solve_equilibrium(config, guess)?;
        let mut sol = Self::at_positions(config, &eq.positions)?;
        sol.iterations = eq.iterations;
        sol.residual = eq.residual;
        Ok(sol)
    }

    /// Hessian and modes at given positions, taken as the equilibrium.
    pub fn at_positions(config: &ChainConfiguration, positions: &[f64]) -> Result<Self> {
        let potential = config.potential();
        let hessian = potential.hessian(positions)?;
        let modes = modes_from_hessian(&hessian, config.species.mass)?;
        let residual = potential
            .gradient(positions)?
            .iter()
            .fold(0.0f64, |m, g| m.max(g.abs()));
        Ok(Self {
            equilibrium: positions.to_vec(),
            hessian,
            mode_frequencies: modes.frequencies,
            mode_matrix: modes.matrix,
            mass: config.species.mass,
            iterations: 0,
            residual,
        })
    }

    pub fn ion_count(&self) -> usize {
        self.equilibrium.len()
    }
}
