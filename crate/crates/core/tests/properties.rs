mod common;

use common::*;
use ionforge::atomic::{
    manipulate_separation, qubit_frequency_gradient, qubit_transition_frequency, readout_separation,
};
use ionforge::chain::{potential_gradient, hessian};
use ionforge::coupling::{j_matrix_inverse, j_matrix_mode_sum, relative_std, uniform_gradients};
use ionforge::design::{design_uniform_j, max_spacing_error};
use ionforge::{ChainConfiguration, ChainSolution, CouplingMatrix, DesignSpec, MagneticField, MicrotrapArray};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coupling(config: &ChainConfiguration) -> (ChainSolution, CouplingMatrix) {
    let sol = ChainSolution::solve(config).unwrap();
    let g = uniform_gradients(&config.species, &config.field, config.ion_count());
    let j = j_matrix_inverse(&sol, &g, Default::default()).unwrap();
    (sol, j)
}

fn max_rel_diff(a: &CouplingMatrix, b: &CouplingMatrix) -> f64 {
    let scale = a.values.abs().max();
    (&a.values - &b.values).abs().max() / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>(), n in 2usize..=20, single in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_configuration(&mut rng, n, single);
        let x = random_positions(&mut rng, &c, 5e-6);
        let g = potential_gradient(&c, &x).unwrap();
        let fd = fd_gradient(&c, &x, 1e-10);
        let scale = max_abs(g.iter().cloned());
        prop_assert!(max_abs(g.iter().zip(&fd).map(|(a, b)| a - b)) <= 1e-6 * scale);
    }

    #[test]
    fn hessian_matches_differentiated_gradient(seed in any::<u64>(), n in 2usize..=20, single in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_configuration(&mut rng, n, single);
        let x = random_positions(&mut rng, &c, 5e-6);
        let h = hessian(&c, &x).unwrap();
        let fd = fd_hessian(&c, &x, 1e-10);
        let scale = h.abs().max();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((h[(i, j)] - fd[i][j]).abs() <= 1e-5 * scale);
            }
        }
    }

    #[test]
    fn translation_moves_crystal_rigidly(seed in any::<u64>(), n in 2usize..=12, single in any::<bool>(), delta in -50e-6f64..50e-6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_configuration(&mut rng, n, single);
        let mut moved = c.clone();
        moved.traps = c.traps.translated(delta);
        let (a, ja) = coupling(&c);
        let (b, jb) = coupling(&moved);
        let length = a.equilibrium[n - 1] - a.equilibrium[0] + 1e-6;
        for (x, y) in a.equilibrium.iter().zip(&b.equilibrium) {
            prop_assert!((y - x - delta).abs() <= 1e-12 * length);
        }
        prop_assert!((&a.hessian - &b.hessian).abs().max() <= 1e-12 * a.hessian.abs().max());
        for (u, v) in a.mode_frequencies.iter().zip(&b.mode_frequencies) {
            prop_assert!((u - v).abs() <= 1e-12 * u);
        }
        prop_assert!((&a.mode_matrix - &b.mode_matrix).abs().max() <= 1e-9);
        prop_assert!(max_rel_diff(&ja, &jb) <= 1e-10);
    }

    #[test]
    fn coupling_is_quadratic_in_gradient(seed in any::<u64>(), n in 2usize..=12, single in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_configuration(&mut rng, n, single);
        let mut doubled = c.clone();
        doubled.field = MagneticField::new(c.field.offset, 2.0 * c.field.gradient).unwrap();
        let (_, j1) = coupling(&c);
        let (_, j2) = coupling(&doubled);
        for i in 0..n {
            for k in 0..n {
                prop_assert!((j2.get(i, k) - 4.0 * j1.get(i, k)).abs() <= 1e-12 * j2.get(i, k).abs());
            }
        }
    }

    #[test]
    fn cross_form_identity(seed in any::<u64>(), n in 2usize..=15, single in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_configuration(&mut rng, n, single);
        let sol = ChainSolution::solve(&c).unwrap();
        let g = uniform_gradients(&c.species, &c.field, n);
        let a = j_matrix_inverse(&sol, &g, Default::default()).unwrap();
        let b = j_matrix_mode_sum(&sol, &g, Default::default()).unwrap();
        for i in 0..n {
            for k in 0..n {
                if i != k {
                    prop_assert!((a.get(i, k) - b.get(i, k)).abs() <= 1e-10 * a.get(i, k).abs());
                }
            }
        }
    }

    /// Strengths times s, lengths times s^(-1/3) and gradient times √s scale
    /// the Hessian by s and the squared frequency gradient by s, so J is fixed.
    #[test]
    fn coupling_scale_covariance(seed in any::<u64>(), n in 2usize..=12, single in any::<bool>(), s in 0.25f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_configuration(&mut rng, n, single);
        let lambda = s.powf(-1.0 / 3.0);
        let centers: Vec<f64> = c.traps.centers().iter().map(|k| k * lambda).collect();
        let strengths: Vec<f64> = c.traps.strengths().iter().map(|g| g * s).collect();
        let scaled = ChainConfiguration::new(
            c.species.clone(),
            MagneticField::new(c.field.offset, c.field.gradient * s.sqrt()).unwrap(),
            MicrotrapArray::new(centers, strengths).unwrap(),
        );
        let (_, j1) = coupling(&c);
        let (_, j2) = coupling(&scaled);
        prop_assert!(max_rel_diff(&j1, &j2) <= 1e-10);
    }

    #[test]
    fn single_trap_symmetry_and_com_mode(n in 1usize..=20, nu in 0.2e6f64..3e6, center in -1e-4f64..1e-4) {
        let s = yb();
        let traps = MicrotrapArray::single_trap(center, s.strength_for_frequency(nu), n).unwrap();
        let sol = ChainSolution::solve(&ChainConfiguration::new(s, reference_field(), traps)).unwrap();
        let length = sol.equilibrium[n - 1] - sol.equilibrium[0] + 1e-6;
        for i in 0..n {
            let mirror = 2.0 * center - sol.equilibrium[n - 1 - i];
            prop_assert!((sol.equilibrium[i] - mirror).abs() <= 1e-12 * length);
        }
        prop_assert!((sol.mode_frequencies[0] / nu - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn linear_frequency_model(x in -1e-3f64..1e-3, b0 in 0.0f64..3.0, grad in -2000.0f64..2000.0) {
        let s = yb();
        let f = MagneticField::new(b0, grad).unwrap();
        let nu_x = qubit_transition_frequency(&s, &f, x).frequency;
        let nu_0 = qubit_transition_frequency(&s, &f, 0.0).frequency;
        let slope = qubit_frequency_gradient(&s, &f);
        prop_assert!((nu_x - nu_0 - slope * x).abs() <= 8.0 * f64::EPSILON * nu_x.abs().max(nu_0.abs()));
    }

    #[test]
    fn separations_homogeneous(grad in 1.0f64..2000.0, h in 1e-6f64..50e-6, t in 0.1f64..10.0) {
        let s = yb();
        for sep in [manipulate_separation, readout_separation] {
            let base = sep(&s, grad, h);
            prop_assert!((sep(&s, t * grad, h) / (t * base) - 1.0).abs() <= 1e-14);
            prop_assert!((sep(&s, grad, t * h) / (t * base) - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn neighbour_separation_matches_spacing(seed in any::<u64>(), n in 2usize..=12, single in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_configuration(&mut rng, n, single);
        let sol = ChainSolution::solve(&c).unwrap();
        for w in sol.equilibrium.windows(2) {
            let df = (qubit_transition_frequency(&c.species, &c.field, w[1]).frequency
                - qubit_transition_frequency(&c.species, &c.field, w[0]).frequency)
                .abs();
            let want = manipulate_separation(&c.species, c.field.gradient, w[1] - w[0]);
            prop_assert!((df / want - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn relative_std_is_scale_free(v in proptest::collection::vec(0.1f64..10.0, 2..20), k in 0.01f64..100.0) {
        let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
        prop_assert!((relative_std(&v) - relative_std(&scaled)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn designs_meet_their_invariants(n in 2usize..=20, h_um in 5.0f64..20.0, nu_mhz in 0.5f64..2.0) {
        let spec = DesignSpec::new(yb(), reference_field(), n, h_um / 1e6, nu_mhz * 1e6).unwrap();
        let d = design_uniform_j(&spec).unwrap();
        prop_assert!(d.coupling.nn_relative_std() < spec.uniformity_tolerance);
        prop_assert!(max_spacing_error(&d.solution.equilibrium, spec.spacing) <= 1e-12 * spec.spacing);
        prop_assert!(d.diagnostics.symmetry_error <= 1e-10);
        let f = d.trap_frequencies();
        prop_assert!(f.iter().all(|v| *v <= f[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn design_scale_covariance(n in 2usize..=12, s in 0.5f64..2.0) {
        let base = DesignSpec::new(yb(), reference_field(), n, 10e-6, 1e6).unwrap();
        let mut scaled = base.with_spacing(base.spacing * s.powf(-1.0 / 3.0));
        scaled.end_strength *= s;
        scaled.field = MagneticField::new(1.0, 1000.0 * s.sqrt()).unwrap();
        let a = design_uniform_j(&base).unwrap();
        let b = design_uniform_j(&scaled).unwrap();
        let nn_a = a.coupling.nearest_neighbour();
        let nn_b = b.coupling.nearest_neighbour();
        for (x, y) in nn_a.iter().zip(&nn_b) {
            prop_assert!((x / y - 1.0).abs() <= 1e-10);
        }
    }
}
