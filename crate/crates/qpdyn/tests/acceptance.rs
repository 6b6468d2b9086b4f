//! Acceptance gate: one test per shipping criterion, each ending in a
//! single "ACCEPTANCE <id> <name>: PASS" line. Tolerances are pinned
//! here and nowhere else; supporting analysis lives in the project
//! notes. Three sub-checks (3: late-time decay rate, 4: noisy
//! recovery, 5c: grid-halving drift) are expected to fail for reasons
//! documented in the assert messages; their sibling checks pass first
//! so a red test still reports everything it verified.

use qpdyn::calibrate::{
    default_bounds, default_fixed_mask, fit_phonon_model, params_to_array, synthesize_data,
    FitProblem, PARAM_NAMES,
};
use qpdyn::diffusion::{self, DiffusionScenario, SolverState};
use qpdyn::observables::{
    compute_c, estimate_timescale, gamma_to_xqp, operating_region_check, window_average,
    window_average_at, PropagationMechanism, WindowWeighting,
};
use qpdyn::params::{GeometryParams, PhononModelParams, PhysicalConstants};
use qpdyn::phonon::{
    model_curve, qubit_density_ode_oracle, source_density, source_density_ode_oracle,
    uniform_grid,
};

fn reference_params() -> PhononModelParams {
    PhononModelParams::default()
}

#[test]
fn acceptance_1_density_extraction_chain() {
    let consts = PhysicalConstants::default();

    // Independent arithmetic route, written out from scratch.
    let hbar = 1.054_571_817e-34;
    let delta = 0.18e-3 * 1.602_176_634e-19;
    let omega = 2.0 * std::f64::consts::PI * 4.462e9;
    let c_oracle = (2.0 * omega * delta / (std::f64::consts::PI.powi(2) * hbar)).sqrt();
    let x_oracle = (1.0 / 1.23e-6 - 1.0 / 6.0e-6) / c_oracle;

    let c = compute_c(&consts);
    let x = gamma_to_xqp(1.23e-6, 1.0 / 6.0e-6, &consts);
    assert!(
        (c - c_oracle).abs() / c_oracle < 1e-12,
        "conversion factor disagrees with the arithmetic oracle: {c:e} vs {c_oracle:e}"
    );
    assert!(
        (x - x_oracle).abs() / x_oracle < 1e-12,
        "extracted density disagrees with the arithmetic oracle: {x:e} vs {x_oracle:e}"
    );
    assert!(
        (1.5e-5..=1.8e-5).contains(&x),
        "extracted density {x:e} outside [1.5e-5, 1.8e-5]"
    );
    println!("ACCEPTANCE 1 density extraction chain: PASS");
}

#[test]
fn acceptance_2_model_vs_ode_oracles() {
    let p = reference_params();
    let dt = 25e-9;

    // Source branch: closed form against RK4 of the rate equation.
    let n_src = ((160e-6 - (-p.drive_duration)) / dt).round() as usize;
    let src_grid = uniform_grid(-p.drive_duration, 160e-6, n_src);
    let src_oracle = source_density_ode_oracle(&p, &src_grid).expect("source oracle runs");
    let src_peak = src_oracle.values.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-12 * src_peak;
    for (&t, &ode) in src_grid.iter().zip(&src_oracle.values) {
        let closed = source_density(t, &p).expect("closed form covers the grid");
        let err = (closed - ode).abs() / ode.abs().max(floor);
        assert!(
            err < 1e-8,
            "source density at t = {t:e} s: closed {closed:e} vs ode {ode:e}, rel {err:e} >= 1e-8"
        );
    }

    // Qubit branch: quadrature against RK4 of the damped balance. The
    // density is identically zero before the onset, so the comparison
    // grid starts there.
    let onset = p.qubit_onset_time();
    let n_qb = ((160e-6 - onset) / dt).round() as usize;
    let qb_grid = uniform_grid(onset, 160e-6, n_qb);
    let qb_oracle = qubit_density_ode_oracle(&p, &qb_grid).expect("qubit oracle runs");
    let quad = model_curve(&p, &qb_grid).expect("quadrature curve runs");
    let qb_peak = qb_oracle.values.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-12 * qb_peak;
    for ((&t, &ode), &q) in qb_grid.iter().zip(&qb_oracle.values).zip(&quad.values) {
        let err = (q - ode).abs() / ode.abs().max(floor);
        assert!(
            err < 1e-6,
            "qubit density at t = {t:e} s: quadrature {q:e} vs ode {ode:e}, rel {err:e} >= 1e-6"
        );
    }
    println!("ACCEPTANCE 2 model vs ODE oracles: PASS");
}

#[test]
fn acceptance_3_curve_shape() {
    let p = reference_params();
    let grid = uniform_grid(0.0, 160e-6, 3200);
    let curve = model_curve(&p, &grid).expect("curve evaluates");

    let (peak_idx, peak) = curve
        .values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &v)| (i, v))
        .unwrap();
    let peak_time = grid[peak_idx];
    let wiggle = 1e-12 * peak;

    for i in 1..=peak_idx {
        assert!(
            curve.values[i] >= curve.values[i - 1] - wiggle,
            "not unimodal: dip before the peak at t = {:e} s",
            grid[i]
        );
    }
    for i in (peak_idx + 1)..curve.values.len() {
        assert!(
            curve.values[i] <= curve.values[i - 1] + wiggle,
            "not unimodal: rise after the peak at t = {:e} s",
            grid[i]
        );
    }
    assert!(
        (5e-6..=14e-6).contains(&peak_time),
        "peak at {peak_time:e} s outside [5e-6, 14e-6]"
    );
    assert!(
        (5e-6..=5e-5).contains(&peak),
        "peak magnitude {peak:e} outside [5e-6, 5e-5]"
    );

    // Late-time decay rate: the most favorable reading is the maximum
    // post-peak local log-slope, taken anywhere on the tail.
    let s_q = p.qubit_trapping_rate;
    let mut max_rate: f64 = 0.0;
    let mut max_rate_t = peak_time;
    for i in (peak_idx + 1)..curve.values.len() {
        let (v0, v1) = (curve.values[i - 1], curve.values[i]);
        if v0 <= 0.0 || v1 <= 0.0 {
            continue;
        }
        let rate = -(v1.ln() - v0.ln()) / (grid[i] - grid[i - 1]);
        if rate > max_rate {
            max_rate = rate;
            max_rate_t = grid[i];
        }
    }
    assert!(
        (0.8 * s_q..=1.2 * s_q).contains(&max_rate),
        "late-time decay rate never reaches the trapping-rate band: max local rate \
         {max_rate:e} 1/s = {:.4} of s_q at t = {max_rate_t:e} s, required within 20% of \
         {s_q:e} 1/s. The tail is held quasi-static by the slowly fading source (local \
         rate ~ g/x - s_q stays near half of s_q), so the curve cannot decay at the bare \
         trapping rate while the source remains on.",
        max_rate / s_q
    );
    println!("ACCEPTANCE 3 curve shape reproduction: PASS");
}

#[test]
fn acceptance_4_calibration_round_trip() {
    let truth = reference_params();
    let grid: Vec<f64> = (0..20)
        .map(|i| 2.5e-6 + i as f64 * 97.5e-6 / 19.0)
        .collect();
    let fixed_mask = default_fixed_mask();

    // Deterministic ±30% starting point, alternating direction.
    let truth_array = params_to_array(&truth);
    let mut start = truth_array;
    for (i, v) in start.iter_mut().enumerate() {
        if !fixed_mask[i] {
            *v *= if i % 2 == 0 { 1.3 } else { 0.7 };
        }
    }
    let initial = qpdyn::calibrate::params_from_array(&start);

    let problem = |data| FitProblem {
        data,
        initial_params: initial,
        bounds: default_bounds(&truth),
        fixed_mask,
        averaging: None,
    };

    // Noiseless half: every free parameter within 5%.
    let clean = synthesize_data(&truth, &grid, 0.0, 0).expect("synthesis runs");
    let result = fit_phonon_model(&problem(clean)).expect("fit runs");
    assert!(result.converged, "noiseless fit did not converge");
    let fitted = params_to_array(&result.params);
    for i in 0..PARAM_NAMES.len() {
        if fixed_mask[i] {
            continue;
        }
        let rel = (fitted[i] - truth_array[i]).abs() / truth_array[i];
        assert!(
            rel < 0.05,
            "noiseless recovery of {} off by {:.2}% (tolerance 5%)",
            PARAM_NAMES[i],
            100.0 * rel
        );
    }

    // Noisy half: sigma = 1e-6 absolute on a curve peaking near
    // 1.4e-5, ten seeds, each free parameter within 15%.
    for seed in 0..10u64 {
        let noisy = synthesize_data(&truth, &grid, 1e-6, seed).expect("synthesis runs");
        let result = fit_phonon_model(&problem(noisy)).expect("fit runs");
        let fitted = params_to_array(&result.params);
        for i in 0..PARAM_NAMES.len() {
            if fixed_mask[i] {
                continue;
            }
            let rel = (fitted[i] - truth_array[i]).abs() / truth_array[i];
            assert!(
                rel < 0.15,
                "seed {seed}: {} off by {:.1}% (tolerance 15%). At this noise level the \
                 20-point data cannot pin five parameters: the Fisher information of the \
                 grid puts the 1-sigma floor for the transfer fraction and the generation \
                 rate above 100%, so misses here reflect the data, not the optimizer \
                 (which reaches a lower objective than the truth).",
                PARAM_NAMES[i],
                100.0 * rel
            );
        }
    }
    println!("ACCEPTANCE 4 calibration round trip: PASS");
}

fn conservation_scenario() -> DiffusionScenario {
    DiffusionScenario {
        grid_nx: 100,
        grid_ny: 50,
        recombination_rate: 0.0,
        trapping_rate: 0.0,
        injection_rate: 0.0,
        // Injection is off; the window only has to be valid.
        injection_duration: 1e-9,
        injection_region: qpdyn::diffusion::Rect {
            x_min: 0.0,
            y_min: 1.1e-3,
            width: 500e-6,
            height: 300e-6,
        },
        simulation_end: 10e-6,
        snapshot_times: vec![],
        ..DiffusionScenario::default()
    }
    .validated()
    .expect("conservation scenario is valid")
}

#[test]
fn acceptance_5a_mass_conservation() {
    let scenario = conservation_scenario();
    let dt = diffusion::stable_dt(&scenario);
    let mut state = SolverState::new(scenario).expect("solver starts");
    state.deposit(30, 20, 1.0);
    state.deposit(31, 20, 0.5);
    state.deposit(70, 30, 2.0);
    let before = diffusion::total_xqp(&state.field());
    for _ in 0..10_000 {
        state.step(dt).expect("step stays stable");
    }
    let after = diffusion::total_xqp(&state.field());
    let drift = (after - before).abs() / before;
    assert!(
        drift < 1e-10,
        "mass drifted by {drift:e} over 10^4 steps (tolerance 1e-10)"
    );
    println!("ACCEPTANCE 5a mass conservation: PASS");
}

#[test]
fn acceptance_5b_point_release_matches_kernel() {
    // Free diffusion from one loaded cell at the domain center; after
    // 10 us the spread (~69 um) dwarfs the cell but not the domain.
    let scenario = DiffusionScenario {
        recombination_rate: 0.0,
        trapping_rate: 0.0,
        injection_rate: 0.0,
        injection_duration: 1e-9,
        simulation_end: 20e-6,
        snapshot_times: vec![],
        ..DiffusionScenario::default()
    }
    .validated()
    .expect("kernel scenario is valid");
    let h = scenario.cell_size();
    let d = scenario.diffusivity;
    let (cx, cy) = (250usize, 125usize);
    let mass = 3.7e-9;

    let mut state = SolverState::new(scenario).expect("solver starts");
    state.advance_to(0.0).expect("reaches the release time");
    state.deposit(cx, cy, mass / (h * h));
    let t = 10e-6;
    state.advance_to(t).expect("marches to the comparison time");

    let field = state.field();
    let (x0, y0) = field.cell_center(cx, cy);
    for k in 0..=10usize {
        let r = k as f64 * h;
        let (x, y) = field.cell_center(cx + k, cy);
        assert!((x - x0 - r).abs() < 1e-12 && (y - y0).abs() < 1e-12);
        let simulated = field.value_at(cx + k, cy);
        let kernel = mass / (4.0 * std::f64::consts::PI * d * t) * (-r * r / (4.0 * d * t)).exp();
        let rel = (simulated - kernel).abs() / kernel;
        assert!(
            rel < 0.02,
            "at r = {r:e} m: simulated {simulated:e} vs kernel {kernel:e}, rel {rel:e} >= 2%"
        );
    }
    println!("ACCEPTANCE 5b point release vs kernel: PASS");
}

#[test]
fn acceptance_5c_grid_halving() {
    let coarse_scenario = DiffusionScenario::default();
    let fine_scenario = DiffusionScenario {
        grid_nx: 2 * coarse_scenario.grid_nx,
        grid_ny: 2 * coarse_scenario.grid_ny,
        ..coarse_scenario.clone()
    }
    .validated()
    .expect("fine scenario is valid");

    let (_, coarse) = diffusion::run(&coarse_scenario).expect("coarse run completes");
    let (_, fine) = diffusion::run(&fine_scenario).expect("fine run completes");
    assert_eq!(coarse.len(), fine.len());

    // Faithful reading: pointwise probe values, compared where the
    // fine run is within three decades of that probe's peak. Lenient
    // reading: the change in each probe's peak value, immune to
    // arrival-lag shifts. Both are reported; the assert uses the
    // faithful one.
    let mut worst: f64 = 0.0;
    let mut worst_at = (0usize, 0.0f64);
    let mut worst_peak: f64 = 0.0;
    for (pi, (c, f)) in coarse.iter().zip(&fine).enumerate() {
        assert_eq!(c.times.len(), f.times.len(), "probe grids diverged");
        let (_, f_peak) = f.peak();
        let (_, c_peak) = c.peak();
        worst_peak = worst_peak.max((c_peak - f_peak).abs() / f_peak);
        let floor = 1e-3 * f_peak;
        for ((&t, &cv), &fv) in c.times.iter().zip(&c.values).zip(&f.values) {
            if fv < floor {
                continue;
            }
            let rel = (cv - fv).abs() / fv;
            if rel > worst {
                worst = rel;
                worst_at = (pi, t);
            }
        }
    }
    assert!(
        worst < 0.01,
        "halving the cell size moves probe values by {:.2}% pointwise (probe {}, \
         t = {:e} s, tolerance 1%); even the lag-insensitive peak values move {:.2}%. \
         The explicit stencil's decay length for a trapped profile carries an \
         O((h/lambda)^2) dispersion error; at the default resolution (h = 10 um, \
         lambda = 34.6 um) the 1 mm probe sits 29 decay lengths out, which compounds \
         that per-length error to the several-percent level in magnitude and shifts \
         the arrival lag, so the steep rise shows tens of percent pointwise. Meeting \
         1% at this distance needs h below about 3.7 um, finer than the pinned \
         default grid.",
        100.0 * worst,
        worst_at.0,
        worst_at.1,
        100.0 * worst_peak
    );
    println!("ACCEPTANCE 5c grid halving: PASS");
}

#[test]
fn acceptance_6_transport_conclusions() {
    let base = DiffusionScenario::default();
    let slow_trap = DiffusionScenario {
        trapping_rate: 1e4,
        ..base.clone()
    }
    .validated()
    .expect("variant scenario is valid");

    let (_, probes) = diffusion::run(&base).expect("default run completes");
    let peaks: Vec<(f64, f64)> = probes.iter().map(|p| p.peak()).collect();
    for pair in peaks.windows(2) {
        assert!(
            pair[1].0 > pair[0].0,
            "peak arrival times not strictly increasing with distance: {:e} then {:e}",
            pair[0].0,
            pair[1].0
        );
    }
    let source_peak = peaks[0].1;
    let far_peak = peaks[peaks.len() - 1].1;
    assert!(
        far_peak <= 1e-3 * source_peak,
        "far-probe peak {far_peak:e} is not 10^3 below the source-cell peak {source_peak:e}"
    );

    let (_, probes_slow) = diffusion::run(&slow_trap).expect("variant run completes");
    for (p_fast, p_slow) in probes.iter().zip(&probes_slow) {
        let slack = 1e-12 * p_slow.peak().1;
        for ((&t, &fast), &slow) in p_fast.times.iter().zip(&p_fast.values).zip(&p_slow.values)
        {
            assert!(
                slow >= fast - slack,
                "weaker trapping should dominate pointwise; at probe ({:e}, {:e}), \
                 t = {t:e}: {slow:e} < {fast:e}",
                p_fast.position.0,
                p_fast.position.1
            );
        }
    }
    println!("ACCEPTANCE 6 transport conclusions: PASS");
}

#[test]
fn acceptance_7_timescale_ordering() {
    let g = GeometryParams::default();
    let photon = estimate_timescale(PropagationMechanism::Photon, &g);
    let phonon = estimate_timescale(PropagationMechanism::PhononMediated, &g);
    let direct = estimate_timescale(PropagationMechanism::DirectDiffusion, &g);

    assert!((photon.transit_time - 2.5e-11).abs() / 2.5e-11 < 1e-9);
    assert!((phonon.transit_time - 1.0e-5).abs() / 1.0e-5 < 1e-9);
    assert!((5.15e-2..=5.25e-2).contains(&direct.transit_time));
    assert!(photon.transit_time < phonon.transit_time);
    assert!(phonon.transit_time < direct.transit_time);

    let lag = PhononModelParams::default().propagation_delay;
    let ratio = phonon.transit_time / lag;
    assert!(
        (0.5..=2.0).contains(&ratio),
        "phonon-mediated transit {:e} s not within a factor 2 of the lag {lag:e} s",
        phonon.transit_time
    );
    println!("ACCEPTANCE 7 timescale ordering: PASS");
}

#[test]
fn acceptance_8_measurement_window() {
    let p = reference_params();
    let support = uniform_grid(-p.drive_duration, 160e-6, 3700);
    let curve = model_curve(&p, &support).expect("curve evaluates");

    // Identity at zero window.
    let unchanged =
        window_average(&support, &curve.values, 0.0, WindowWeighting::Uniform).unwrap();
    assert_eq!(unchanged, curve.values, "t_avg = 0 must be the identity");

    let eval: Vec<f64> = support.iter().copied().filter(|&t| t >= 0.0).collect();
    let peak_of = |values: &[f64]| -> (f64, f64) {
        eval.iter()
            .zip(values)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(&t, &v)| (t, v))
            .unwrap()
    };

    let mut last: Option<(f64, f64)> = None;
    for t_avg in [0.0, 3e-6, 6e-6, 12e-6, 18e-6] {
        let averaged =
            window_average_at(&support, &curve.values, &eval, t_avg, WindowWeighting::Uniform)
                .expect("averaging runs");
        let (pt, pv) = peak_of(&averaged);
        assert!(
            (4e-6..=25e-6).contains(&pt),
            "t_avg = {t_avg:e}: peak time {pt:e} outside [4e-6, 25e-6]"
        );
        if let Some((lt, lv)) = last {
            assert!(
                pv <= lv,
                "peak value must be non-increasing in t_avg: {pv:e} after {lv:e}"
            );
            assert!(
                pt >= lt,
                "peak time must be non-decreasing in t_avg: {pt:e} after {lt:e}"
            );
        }
        last = Some((pt, pv));
    }
    println!("ACCEPTANCE 8 measurement window: PASS");
}

#[test]
fn acceptance_9_converter_voltage() {
    let consts = PhysicalConstants::default();
    let flux_quantum = 2.067_833_848e-15;
    let freqs: Vec<f64> = (0..64)
        .map(|i| 0.2e9 + i as f64 * (6.5e9 - 0.2e9) / 63.0)
        .collect();
    let volts: Vec<f64> = freqs.iter().map(|&f| flux_quantum * f).collect();

    for (&f, &v) in freqs.iter().zip(&volts) {
        assert!(
            operating_region_check(v, f, 0.036, &consts),
            "exact locked voltage failed the band check at f = {f:e} Hz"
        );
    }

    let num: f64 = freqs.iter().zip(&volts).map(|(&f, &v)| f * v).sum();
    let den: f64 = freqs.iter().map(|&f| f * f).sum();
    let slope = num / den;
    assert!(
        (slope - flux_quantum).abs() / flux_quantum < 1e-12,
        "fitted slope {slope:e} differs from the flux quantum"
    );
    let uv_per_ghz = slope * 1e15;
    assert!(
        (2.062..=2.068).contains(&uv_per_ghz),
        "slope {uv_per_ghz:.4} uV/GHz outside [2.062, 2.068]"
    );
    println!("ACCEPTANCE 9 converter voltage: PASS");
}
