#![allow(dead_code)]

use ionforge::chain::{potential_energy, potential_gradient};
use ionforge::{ChainConfiguration, IonSpecies, MagneticField, MicrotrapArray};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// e²/(4πε₀) from the CODATA 2022 charge and permittivity.
pub const COULOMB_K: f64 =
    1.602_176_634e-19 * 1.602_176_634e-19 / (4.0 * std::f64::consts::PI * 8.854_187_818_8e-12);

pub fn yb() -> IonSpecies {
    IonSpecies::yb171()
}

pub fn reference_field() -> MagneticField {
    MagneticField::new(1.0, 1000.0).unwrap()
}

/// Either N ions in one well (0.2 to 2 MHz) or an array with gaps of 5 to
/// 20 µm and trap frequencies of 0.5 to 2 MHz.
pub fn random_configuration(rng: &mut ChaCha8Rng, n: usize, single: bool) -> ChainConfiguration {
    let s = yb();
    let traps = if single {
        let g = s.strength_for_frequency(rng.random_range(0.2e6..2e6));
        MicrotrapArray::single_trap(rng.random_range(-50e-6..50e-6), g, n).unwrap()
    } else {
        let mut c = vec![rng.random_range(-50e-6..50e-6)];
        for _ in 1..n {
            let last = *c.last().unwrap();
            c.push(last + rng.random_range(5e-6..20e-6));
        }
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(0.5e6..2e6)).collect();
        MicrotrapArray::from_frequencies(&s, c, &f).unwrap()
    };
    ChainConfiguration::new(s, reference_field(), traps)
}

/// Ordered positions near (but not at) a plausible crystal for `config`.
pub fn random_positions(rng: &mut ChaCha8Rng, config: &ChainConfiguration, scale: f64) -> Vec<f64> {
    let n = config.ion_count();
    let c = config.traps.centers();
    let mut x: Vec<f64> = if config.traps.is_single_trap() {
        (0..n).map(|i| c[0] + (i as f64 - 0.5 * (n as f64 - 1.0)) * scale).collect()
    } else {
        c.to_vec()
    };
    let jitter = 0.2 * scale;
    for v in x.iter_mut() {
        *v += rng.random_range(-jitter..jitter);
    }
    x.sort_by(|a, b| a.total_cmp(b));
    x
}

/// Central-difference gradient of the potential energy.
pub fn fd_gradient(config: &ChainConfiguration, x: &[f64], step: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[i] += step;
            m[i] -= step;
            (potential_energy(config, &p).unwrap() - potential_energy(config, &m).unwrap()) / (2.0 * step)
        })
        .collect()
}

/// Central-difference Jacobian of the analytic gradient.
pub fn fd_hessian(config: &ChainConfiguration, x: &[f64], step: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut h = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut p = x.to_vec();
        let mut m = x.to_vec();
        p[j] += step;
        m[j] -= step;
        let gp = potential_gradient(config, &p).unwrap();
        let gm = potential_gradient(config, &m).unwrap();
        for i in 0..n {
            h[i][j] = (gp[i] - gm[i]) / (2.0 * step);
        }
    }
    h
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}
