//! Calibration behavior on synthetic data: recovery from scattered
//! starting points and consistency of the measurement-window option.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qpdyn::calibrate::{
    default_bounds, default_fixed_mask, fit_phonon_model, params_from_array, params_to_array,
    synthesize_data, AveragingSpec, FitProblem, PARAM_NAMES,
};
use qpdyn::observables::{window_average_at, WindowWeighting};
use qpdyn::params::PhononModelParams;
use qpdyn::phonon::{model_curve, uniform_grid};

fn truth() -> PhononModelParams {
    PhononModelParams::default()
}

fn sample_times() -> Vec<f64> {
    (0..20)
        .map(|i| 2.5e-6 + i as f64 * 97.5e-6 / 19.0)
        .collect()
}

#[test]
fn noiseless_recovery_from_scattered_starts() {
    let truth = truth();
    let truth_array = params_to_array(&truth);
    let fixed_mask = default_fixed_mask();
    let data = synthesize_data(&truth, &sample_times(), 0.0, 0).expect("synthesis runs");

    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for attempt in 0..6 {
        let mut start = truth_array;
        for (i, v) in start.iter_mut().enumerate() {
            if !fixed_mask[i] {
                *v *= 1.0 + rng.random_range(-0.3..0.3);
            }
        }
        let problem = FitProblem {
            data: data.clone(),
            initial_params: params_from_array(&start),
            bounds: default_bounds(&truth),
            fixed_mask,
            averaging: None,
        };
        let result = fit_phonon_model(&problem).expect("fit runs");
        assert!(result.converged, "attempt {attempt}: fit did not converge");
        let fitted = params_to_array(&result.params);
        for i in 0..PARAM_NAMES.len() {
            if fixed_mask[i] {
                continue;
            }
            let rel = (fitted[i] - truth_array[i]).abs() / truth_array[i];
            assert!(
                rel < 0.05,
                "attempt {attempt}: {} off by {:.2}%",
                PARAM_NAMES[i],
                100.0 * rel
            );
        }
    }
}

#[test]
fn window_averaged_data_needs_the_averaging_term() {
    // Synthesize data the way the instrument sees it: each point is
    // the model averaged over the window ending at its recovery time.
    let truth = truth();
    let t_avg = 6e-6;
    let times = sample_times();
    let support = uniform_grid(-truth.drive_duration, 110e-6, 2700);
    let curve = model_curve(&truth, &support).expect("curve runs");
    let averaged =
        window_average_at(&support, &curve.values, &times, t_avg, WindowWeighting::Uniform)
            .expect("averaging runs");
    let data: Vec<qpdyn::observables::QpDensityPoint> = times
        .iter()
        .zip(&averaged)
        .map(|(&t, &v)| qpdyn::observables::QpDensityPoint {
            recovery_time: t,
            x_qp: v,
            uncertainty: 0.0,
        })
        .collect();

    // Only the delay and the transfer fraction free: the pair that
    // the window distorts most directly.
    let mut fixed_mask = [true; PARAM_NAMES.len()];
    fixed_mask[2] = false;
    fixed_mask[3] = false;

    let build = |averaging| FitProblem {
        data: data.clone(),
        initial_params: truth,
        bounds: default_bounds(&truth),
        fixed_mask,
        averaging,
    };

    let with_window = fit_phonon_model(&build(Some(AveragingSpec {
        t_avg,
        weighting: WindowWeighting::Uniform,
    })))
    .expect("fit runs");
    assert!(with_window.converged);
    let rel_delay = (with_window.params.propagation_delay - truth.propagation_delay).abs()
        / truth.propagation_delay;
    assert!(
        rel_delay < 0.05,
        "window-aware fit missed the delay by {:.2}%",
        100.0 * rel_delay
    );

    let without_window = fit_phonon_model(&build(None)).expect("fit runs");
    assert!(
        without_window.params.propagation_delay > 1.1 * truth.propagation_delay,
        "ignoring a {t_avg:e} s backward window should push the fitted delay visibly \
         late, got {:e} vs truth {:e}",
        without_window.params.propagation_delay,
        truth.propagation_delay
    );
}

#[test]
fn reported_uncertainty_covers_noiseless_recovery_error() {
    // With clean data the curvature-based sigma should be tiny and the
    // recovered optimum should sit within a few sigma of the truth.
    let truth = truth();
    let data = synthesize_data(&truth, &sample_times(), 0.0, 0).expect("synthesis runs");
    let mut fixed_mask = [true; PARAM_NAMES.len()];
    fixed_mask[2] = false;
    fixed_mask[3] = false;
    let mut start = params_to_array(&truth);
    start[2] *= 1.2;
    start[3] *= 0.8;
    let problem = FitProblem {
        data,
        initial_params: params_from_array(&start),
        bounds: default_bounds(&truth),
        fixed_mask,
        averaging: None,
    };
    let result = fit_phonon_model(&problem).expect("fit runs");
    assert!(result.converged);
    let sigma = result
        .uncertainty
        .expect("clean two-parameter problem has a well-conditioned curvature");
    for i in [2usize, 3] {
        assert!(
            sigma[i].is_finite() && sigma[i] >= 0.0,
            "free parameter sigma must be finite and nonnegative, got {:e}",
            sigma[i]
        );
        assert!(
            sigma[i] < 0.05 * params_to_array(&truth)[i],
            "near-zero-residual data should give a sub-5% sigma, got {:e}",
            sigma[i]
        );
    }
    for i in [0usize, 1, 4, 5] {
        assert_eq!(sigma[i], 0.0, "fixed parameters report zero sigma");
    }
}
