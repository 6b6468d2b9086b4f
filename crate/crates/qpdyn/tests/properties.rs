//! Property-based invariants: structural identities that must hold
//! across whole parameter ranges, not just at frozen points.

use proptest::prelude::*;

use qpdyn::diffusion::{self, DiffusionScenario, Rect, SolverState};
use qpdyn::observables::{
    expected_sfq_voltage, gamma_to_xqp, window_average_at, xqp_to_gamma, WindowWeighting,
};
use qpdyn::params::PhysicalConstants;

fn support_grid() -> Vec<f64> {
    (0..30).map(|i| i as f64 * 1e-6).collect()
}

proptest! {
    #[test]
    fn density_and_rate_conversions_invert(
        t1 in 1e-7f64..1e-3,
        gamma0 in 1e3f64..1e6,
    ) {
        let consts = PhysicalConstants::default();
        let x = gamma_to_xqp(t1, gamma0, &consts);
        let gamma = xqp_to_gamma(x, gamma0, &consts);
        let expected = 1.0 / t1;
        prop_assert!(
            (gamma - expected).abs() / expected < 1e-9,
            "round trip gave {gamma:e}, expected {expected:e}"
        );
    }

    #[test]
    fn window_average_is_linear(
        a in prop::collection::vec(-1e-4f64..1e-4, 30),
        b in prop::collection::vec(-1e-4f64..1e-4, 30),
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
        t_avg in 0.0f64..1e-5,
    ) {
        let times = support_grid();
        let eval: Vec<f64> = times.iter().copied().filter(|&t| t >= t_avg).collect();
        let combo: Vec<f64> = a.iter().zip(&b).map(|(&x, &y)| alpha * x + beta * y).collect();

        let wa = window_average_at(&times, &a, &eval, t_avg, WindowWeighting::Uniform).unwrap();
        let wb = window_average_at(&times, &b, &eval, t_avg, WindowWeighting::Uniform).unwrap();
        let wc =
            window_average_at(&times, &combo, &eval, t_avg, WindowWeighting::Uniform).unwrap();

        let scale = alpha.abs() * 1e-4 + beta.abs() * 1e-4 + 1e-30;
        for ((&ca, &cb), &cc) in wa.iter().zip(&wb).zip(&wc) {
            prop_assert!(
                (cc - (alpha * ca + beta * cb)).abs() <= 1e-12 * scale,
                "averaging must be linear: {cc:e} vs {:e}",
                alpha * ca + beta * cb
            );
        }
    }

    #[test]
    fn window_average_preserves_constants_under_both_weightings(
        level in -1e-3f64..1e-3,
        t_avg in 0.0f64..1e-5,
    ) {
        let times = support_grid();
        let values = vec![level; times.len()];
        let eval: Vec<f64> = times.iter().copied().filter(|&t| t >= t_avg).collect();
        for weighting in [WindowWeighting::Uniform, WindowWeighting::Exponential] {
            let averaged =
                window_average_at(&times, &values, &eval, t_avg, weighting).unwrap();
            for &v in &averaged {
                prop_assert!(
                    (v - level).abs() <= 1e-12 * level.abs().max(1e-30),
                    "constant curve must stay constant, got {v:e} for level {level:e}"
                );
            }
        }
    }

    #[test]
    fn locked_voltage_is_homogeneous_in_frequency(
        freq in 1e6f64..1e10,
        factor in 0.1f64..10.0,
    ) {
        let consts = PhysicalConstants::default();
        let direct = expected_sfq_voltage(factor * freq, &consts);
        let scaled = factor * expected_sfq_voltage(freq, &consts);
        prop_assert!((direct - scaled).abs() <= 1e-12 * direct.abs());
    }

    #[test]
    fn stability_cap_quarters_when_cells_halve(
        nx in 50usize..200,
        ny in 25usize..100,
    ) {
        // Only nx sets the cell size; ny follows the footprint.
        let coarse = DiffusionScenario {
            grid_nx: nx,
            grid_ny: ny,
            ..DiffusionScenario::default()
        };
        let fine = DiffusionScenario {
            grid_nx: 2 * nx,
            grid_ny: 2 * ny,
            ..coarse.clone()
        };
        let ratio = diffusion::stable_dt(&coarse) / diffusion::stable_dt(&fine);
        prop_assert!((ratio - 4.0).abs() < 1e-9, "got ratio {ratio}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn free_diffusion_conserves_mass_for_any_deposit_pattern(
        deposits in prop::collection::vec(
            (1usize..39, 1usize..19, 0.01f64..10.0),
            1..6,
        ),
    ) {
        let scenario = DiffusionScenario {
            grid_nx: 40,
            grid_ny: 20,
            recombination_rate: 0.0,
            trapping_rate: 0.0,
            injection_rate: 0.0,
            injection_duration: 1e-9,
            injection_region: Rect {
                x_min: 0.0,
                y_min: 1.0e-3,
                width: 500e-6,
                height: 400e-6,
            },
            simulation_end: 1e-3,
            snapshot_times: vec![],
            ..DiffusionScenario::default()
        };
        let dt = diffusion::stable_dt(&scenario);
        let mut state = SolverState::new(scenario).unwrap();
        for &(ix, iy, amount) in &deposits {
            state.deposit(ix, iy, amount);
        }
        let before = diffusion::total_xqp(&state.field());
        for _ in 0..50 {
            state.step(dt).unwrap();
        }
        let after = diffusion::total_xqp(&state.field());
        prop_assert!(
            (after - before).abs() <= 1e-12 * before,
            "mass drifted from {before:e} to {after:e}"
        );
    }
}
