use nalgebra::DMatrix;
use proptest::prelude::*;

use hybrid_sr_core::evo::{adapt_pair, btv_parameter};
use hybrid_sr_core::problem::format_problem;
use hybrid_sr_core::problem::parse_problem;
use hybrid_sr_core::rng::substream;
use hybrid_sr_core::{
    direct_solve, generate, iteration_matrix, jacobi_sr_solve, operator_norm_inf, spectral_radius, AdaptationMode,
    AdaptationParams, JacobiOperator, LinearSystem, ProblemFamily, SolveConfig, Status,
};

fn dd_family() -> ProblemFamily {
    ProblemFamily::p2().diagonally_dominant(true)
}

fn system_strategy(n: usize) -> impl Strategy<Value = LinearSystem> {
    (
        prop::collection::vec(-5.0..5.0f64, n * n),
        prop::collection::vec(-5.0..5.0f64, n),
        prop::collection::vec(prop_oneof![-10.0..-1.0f64, 1.0..10.0f64], n),
    )
        .prop_map(move |(mut a, b, diag)| {
            for i in 0..n {
                a[i * n + i] = diag[i];
            }
            LinearSystem::new(n, a, b).unwrap()
        })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn sweep_is_affine(
        system in system_strategy(5),
        x in prop::collection::vec(-10.0..10.0f64, 5),
        y in prop::collection::vec(-10.0..10.0f64, 5),
        alpha in -3.0..3.0f64,
        omega in 0.05..1.95f64,
    ) {
        let op = JacobiOperator::new(&system);
        let s0 = op.sr_sweep(&[0.0; 5], omega).unwrap();
        let sx = op.sr_sweep(&x, omega).unwrap();
        let sy = op.sr_sweep(&y, omega).unwrap();
        let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + alpha * b).collect();
        let sxy = op.sr_sweep(&xy, omega).unwrap();
        let scale = 1.0 + sx.iter().chain(&sy).chain(&s0).map(|v| v.abs()).fold(0.0, f64::max) * (1.0 + alpha.abs());
        for i in 0..5 {
            let lhs = sxy[i] - s0[i];
            let rhs = (sx[i] - s0[i]) + alpha * (sy[i] - s0[i]);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn sweep_matches_dense_operator(system in system_strategy(6), x in prop::collection::vec(-10.0..10.0f64, 6), omega in 0.05..1.95f64) {
        let h = iteration_matrix(&system, omega);
        let op = JacobiOperator::new(&system);
        let v = op.sr_sweep(&[0.0; 6], omega).unwrap();
        let swept = op.sr_sweep(&x, omega).unwrap();
        for i in 0..6 {
            let dense: f64 = (0..6).map(|j| h[i * 6 + j] * x[j]).sum::<f64>() + v[i];
            prop_assert!((dense - swept[i]).abs() <= 1e-10 * (1.0 + dense.abs()));
        }
    }

    #[test]
    fn parallel_sweep_is_bit_identical(seed in 0u64..1000, omega in 0.05..1.95f64) {
        let system = generate(&dd_family(), 75, seed).unwrap();
        let op = JacobiOperator::new(&system);
        let x = hybrid_sr_core::rng::start_vector(seed, 75, -30.0, 30.0);
        prop_assert_eq!(op.sr_sweep(&x, omega).unwrap(), op.sr_sweep_par(&x, omega).unwrap());
    }

    #[test]
    fn exact_solution_is_a_fixed_point(seed in 0u64..1000) {
        let system = generate(&dd_family(), 8, seed).unwrap();
        let exact = direct_solve(&system).unwrap();
        let op = JacobiOperator::new(&system);
        let size = exact.iter().fold(1.0, |m: f64, v| m.max(v.abs()));
        for omega in [0.1, 0.5, 1.0, 1.5, 1.9] {
            let next = op.sr_sweep(&exact, omega).unwrap();
            prop_assert!(max_abs_diff(&next, &exact) <= 1e-12 * size);
        }
    }

    #[test]
    fn two_by_two_spectral_radius(a in system_strategy(2), omega in 0.05..1.95f64) {
        let h = iteration_matrix(&a, omega);
        let (p, q, r, s) = (h[0], h[1], h[2], h[3]);
        let tr = p + s;
        let det = p * s - q * r;
        let disc = tr * tr / 4.0 - det;
        let exact = if disc >= 0.0 {
            (tr / 2.0).abs() + disc.sqrt()
        } else {
            det.sqrt()
        };
        let est = spectral_radius(&a, omega, 1e-10, 100_000).unwrap();
        prop_assert!((est - exact).abs() < 1e-6, "estimate {} vs {}", est, exact);
    }

    #[test]
    fn problem_text_round_trips(system in system_strategy(4)) {
        let text = format_problem(&system, &["property test".to_string()]);
        let back = parse_problem(&text).unwrap();
        prop_assert_eq!(back, system);
    }

    #[test]
    fn adapted_omegas_stay_in_bounds(
        w in (0.0..2.0f64, 0.0..2.0f64),
        e in (0.0..1e6f64, 0.0..1e6f64),
        t in 0u64..100_000,
        seed in any::<u64>(),
        uniform in any::<bool>(),
        ex in 0.01..10.0f64,
        ey in 0.01..10.0f64,
    ) {
        let params = AdaptationParams {
            e_x: ex,
            e_y: ey,
            mode: if uniform { AdaptationMode::Uniform } else { AdaptationMode::TimeVariant },
            ..AdaptationParams::default()
        };
        let mut rng = substream(seed, 2, t, 0);
        let (a, b) = adapt_pair((w.0, e.0), (w.1, e.1), &params, t, &mut rng);
        for v in [a, b] {
            prop_assert!((1e-6..=2.0 - 1e-6).contains(&v) || (e.0 == e.1 && (v == w.0 || v == w.1)));
        }
    }

    #[test]
    fn time_factor_shrinks(t in 0u64..1_000_000, lambda in 10.5..1e4f64) {
        let now = btv_parameter(t, lambda);
        let later = btv_parameter(t + 1, lambda);
        prop_assert!(now > 0.0 && now < 1.0);
        prop_assert!(later <= now);
    }
}

#[test]
fn spectral_radius_matches_dense_eigenvalues() {
    let mut checked = 0;
    for seed in 0..10 {
        let system = generate(&dd_family(), 12, seed).unwrap();
        for omega in [0.3, 0.8, 1.0, 1.4, 1.8] {
            let h = DMatrix::from_row_slice(12, 12, &iteration_matrix(&system, omega));
            let exact = h.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
            if let Ok(est) = spectral_radius(&system, omega, 1e-10, 200_000) {
                assert!(
                    (est - exact).abs() < 1e-6,
                    "seed {seed} omega {omega}: {est} vs {exact}"
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 40, "only {checked} estimates converged");
}

#[test]
fn dominant_systems_contract_and_converge() {
    for seed in 0..20 {
        let system = generate(&dd_family(), 10, 200 + seed).unwrap();
        assert!(system.is_strictly_diagonally_dominant());
        assert!(operator_norm_inf(&system, 1.0) < 1.0);
        let x0 = hybrid_sr_core::rng::start_vector(seed, 10, -30.0, 30.0);
        let r = jacobi_sr_solve(&system, &x0, &SolveConfig::default()).unwrap();
        assert_eq!(r.status, Status::Converged);
    }
}
