//! Closed-form and hand-derived reference values, computed here without the
//! library's own formulas.

mod common;

use std::f64::consts::PI;

use common::*;
use ionforge::atomic::{
    manipulate_separation, paschen_back_threshold, qubit_transition_frequency, readout_separation,
};
use ionforge::coupling::{j_matrix_inverse, uniform_gradients, FrequencyConvention};
use ionforge::design::{design_uniform_j, epsilon1};
use ionforge::{ChainConfiguration, ChainSolution, CoulombModel, DesignSpec, MagneticField, MicrotrapArray};

const H: f64 = 6.626_070_15e-34;
const MU_B: f64 = 9.274_010_065_7e-24;
const AMU: f64 = 1.660_539_068_92e-27;

fn mass() -> f64 {
    170.936 * AMU
}

fn g_of(nu: f64) -> f64 {
    mass() * (2.0 * PI * nu).powi(2)
}

#[test]
fn reference_frequencies() {
    let s = yb();
    let f = reference_field();
    let resonance = 2.0025 * MU_B * 1.0 / H + 0.5 * 12.6428e9;
    let mw = 2.0025 * MU_B * 1000.0 * 10e-6 / H;
    let optical = 4.0 / 3.0 * MU_B * 1000.0 * 10e-6 / H;
    assert!((qubit_transition_frequency(&s, &f, 0.0).frequency / resonance - 1.0).abs() < 1e-12);
    assert!((manipulate_separation(&s, 1000.0, 10e-6) / mw - 1.0).abs() < 1e-12);
    assert!((readout_separation(&s, 1000.0, 10e-6) / optical - 1.0).abs() < 1e-12);
    // frozen: 34.349 GHz, 280.275 MHz, 186.617 MHz, threshold 0.4511 T
    assert!((resonance - 34.3489e9).abs() < 0.05e6);
    assert!((mw - 280.275e6).abs() < 1e3);
    assert!((optical - 186.617e6).abs() < 1e3);
    assert!((paschen_back_threshold(&s) - 0.4511).abs() < 1e-4);
}

#[test]
fn three_ion_positions() {
    let g = g_of(1e6);
    let s = yb();
    let traps = MicrotrapArray::single_trap(0.0, g, 3).unwrap();
    let sol = ChainSolution::solve(&ChainConfiguration::new(s, reference_field(), traps)).unwrap();
    let a = (5.0 * COULOMB_K / (4.0 * g)).cbrt();
    for (x, want) in sol.equilibrium.iter().zip([-a, 0.0, a]) {
        assert!((x - want).abs() < 1e-12 * a);
    }
}

#[test]
fn two_ion_coupling_closed_form() {
    let nu = 1e6;
    let g = g_of(nu);
    let d = (2.0 * COULOMB_K / g).cbrt();
    let c = 2.0 * COULOMB_K / d.powi(3);
    let inv12 = c / (g * (g + 2.0 * c));
    let dnu_dx = 2.0025 * MU_B * 1000.0 / H;
    let hbar = H / (2.0 * PI);
    let angular = hbar / (4.0 * PI) * (2.0 * PI * dnu_dx).powi(2) * inv12;
    let ordinary = hbar / (4.0 * PI) * dnu_dx.powi(2) * inv12;

    let s = yb();
    let traps = MicrotrapArray::single_trap(0.0, g, 2).unwrap();
    let config = ChainConfiguration::new(s.clone(), reference_field(), traps);
    let sol = ChainSolution::solve(&config).unwrap();
    let grads = uniform_gradients(&s, &reference_field(), 2);
    let ja = j_matrix_inverse(&sol, &grads, FrequencyConvention::AngularGradient).unwrap();
    let jo = j_matrix_inverse(&sol, &grads, FrequencyConvention::OrdinaryGradient).unwrap();
    assert!((ja.get(0, 1) / angular - 1.0).abs() < 1e-10);
    assert!((jo.get(0, 1) / ordinary - 1.0).abs() < 1e-10);
    assert_eq!(ja.get(0, 0), 0.0);
}

#[test]
fn epsilon_value() {
    // 2k / (g1 h^3) with g1 for 1 MHz and h = 10 µm
    let want = 2.0 * COULOMB_K / (g_of(1e6) * 1e-15);
    assert!((epsilon1(g_of(1e6), 10e-6) / want - 1.0).abs() < 1e-9);
    assert!((want - 0.04118).abs() < 5e-5);
}

#[test]
fn nearest_neighbour_truncation_gives_geometric_inverse() {
    // with only adjacent Coulomb terms and the analytic strengths the
    // inverse Hessian is Toeplitz with geometric decay away from the diagonal
    let mut spec = DesignSpec::new(yb(), reference_field(), 9, 10e-6, 1e6).unwrap();
    spec.coulomb = CoulombModel::NearestNeighbour;
    let d = design_uniform_j(&spec).unwrap();
    assert_eq!(d.diagnostics.iterations, 0);
    let j = &d.coupling;
    let rho = j.get(0, 2) / j.get(0, 1);
    for off in 1..8 {
        for i in 0..9 - off {
            let want = j.get(0, 1) * rho.powi(off as i32 - 1);
            assert!((j.get(i, i + off) / want - 1.0).abs() < 1e-9, "offset {off} row {i}");
        }
    }
}

#[test]
fn two_ion_design_centers_sit_inside_the_ions() {
    let h = 10e-6;
    let spec = DesignSpec::new(yb(), reference_field(), 2, h, 1e6).unwrap();
    let d = design_uniform_j(&spec).unwrap();
    let shift = COULOMB_K / (g_of(1e6) * h * h);
    let want = [-h / 2.0 + shift, h / 2.0 - shift];
    for (k, w) in d.traps.centers().iter().zip(want) {
        assert!((k - w).abs() < 1e-9 * h);
    }
    assert!((d.solution.equilibrium[1] - d.solution.equilibrium[0] - h).abs() < 1e-12 * h);
}

#[test]
fn ten_ion_design_frozen_values() {
    let spec = DesignSpec::new(yb(), reference_field(), 10, 10e-6, 1e6).unwrap();
    let d = design_uniform_j(&spec).unwrap();
    let nn = d.coupling.nearest_neighbour();
    assert!((nn[0] - 870.416).abs() < 0.01, "{}", nn[0]);
    let top = d.solution.mode_frequencies.last().unwrap();
    assert!((top - 1.0620e6).abs() < 1e2, "{top}");
    let f = d.trap_frequencies();
    assert_eq!(f.len(), 10);
    assert!((f[0] - 1e6).abs() < 1e-6);
    assert!(f[1..9].iter().all(|v| *v < 1e6));
}

#[test]
fn zero_gradient_zero_coupling() {
    let s = yb();
    let field = MagneticField::new(1.0, 0.0).unwrap();
    let traps = MicrotrapArray::single_trap(0.0, g_of(1e6), 4).unwrap();
    let sol = ChainSolution::solve(&ChainConfiguration::new(s.clone(), field, traps)).unwrap();
    let j = j_matrix_inverse(&sol, &uniform_gradients(&s, &field, 4), Default::default()).unwrap();
    assert_eq!(j.values.abs().max(), 0.0);
}
