//! Qubit-as-sensor observables: T1 extraction from relaxation curves,
//! the conversion between relaxation rate and normalized quasiparticle
//! density, measurement-window averaging, propagation timescale
//! estimates, and the converter voltage check.
//!
//! The density conversion uses x_qp = (Γ − Γ0)/C with
//! C = √(2·ω_q·Δ/(π²·ħ)): an excess relaxation rate over the baseline
//! Γ0 is attributed to quasiparticle tunneling across the qubit
//! junction, making T1 a density probe.

use crate::error::{QpError, Result};
use crate::linalg;
use crate::params::{GeometryParams, PhysicalConstants};

/// Measured |1⟩-population relaxation curve at one recovery time.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationDecayCurve {
    /// Delay between preparation and readout, s; strictly increasing.
    pub delay_times: Vec<f64>,
    /// Excited-state population, dimensionless in [0, 1.05].
    pub p1_values: Vec<f64>,
    /// Optional per-point 1-σ uncertainty on the population.
    pub p1_uncertainty: Option<Vec<f64>>,
}

impl PopulationDecayCurve {
    pub fn validated(self) -> Result<Self> {
        if self.delay_times.len() != self.p1_values.len() {
            return Err(QpError::InvalidInput(format!(
                "delay/population length mismatch: {} vs {}",
                self.delay_times.len(),
                self.p1_values.len()
            )));
        }
        if self.delay_times.len() < 4 {
            return Err(QpError::InvalidInput(format!(
                "need at least 4 samples, got {}",
                self.delay_times.len()
            )));
        }
        if let Some(sig) = &self.p1_uncertainty {
            if sig.len() != self.delay_times.len() {
                return Err(QpError::InvalidInput(
                    "uncertainty length mismatch".into(),
                ));
            }
        }
        for pair in self.delay_times.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(QpError::InvalidInput(
                    "delay times must be strictly increasing".into(),
                ));
            }
        }
        for &p in &self.p1_values {
            if !p.is_finite() || !(-0.05..=1.05).contains(&p) {
                return Err(QpError::InvalidInput(format!(
                    "population {p} outside the physical range"
                )));
            }
        }
        Ok(self)
    }
}

/// One extracted relaxation time at a given recovery time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationSample {
    /// Recovery time between converter shutoff and measurement, s.
    pub recovery_time: f64,
    /// Extracted relaxation time, s; > 0.
    pub t1: f64,
    /// 1-σ uncertainty on t1, s; ≥ 0.
    pub t1_uncertainty: f64,
}

/// One normalized quasiparticle density extracted from a relaxation
/// measurement. Slightly negative values are legitimate noise and are
/// kept unclipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpDensityPoint {
    /// Recovery time, s.
    pub recovery_time: f64,
    /// Normalized quasiparticle density, dimensionless.
    pub x_qp: f64,
    /// 1-σ uncertainty on x_qp, dimensionless.
    pub uncertainty: f64,
}

/// Quasiparticle transport channel between converter and qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropagationMechanism {
    /// Electromagnetic cross-talk at the on-chip light speed.
    Photon,
    /// Quasiparticles diffusing through the superconducting film.
    DirectDiffusion,
    /// Recombination phonons crossing the substrate and breaking
    /// pairs at the far end.
    PhononMediated,
}

impl PropagationMechanism {
    /// Stable machine-readable name used in CSV and JSON output.
    pub fn label(self) -> &'static str {
        match self {
            Self::Photon => "photon",
            Self::DirectDiffusion => "direct_diffusion",
            Self::PhononMediated => "phonon_mediated",
        }
    }
}

/// Estimated converter-to-qubit transit time for one mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimescaleEstimate {
    pub mechanism: PropagationMechanism,
    /// Characteristic transit time, s.
    pub transit_time: f64,
    /// Effective diffusivity behind the estimate, m²/s; absent for the
    /// ballistic photon channel.
    pub effective_diffusivity: Option<f64>,
}

/// Result of fitting P1(t) = A·exp(−t/T1) + B to a decay curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T1Fit {
    /// Relaxation time, s.
    pub t1: f64,
    /// 1-σ uncertainty on t1 from the fit covariance, s.
    pub t1_uncertainty: f64,
    /// Decay amplitude A.
    pub amplitude: f64,
    /// Long-time offset B.
    pub offset: f64,
}

const T1_FIT_MAX_ITER: usize = 200;

/// Fit an exponential relaxation P1(t) = A·exp(−t/T1) + B by damped
/// Gauss-Newton and return T1 with its 1-σ uncertainty.
///
/// Initialization: B from the mean of the last 10% of points, A from
/// the first point minus B, T1 from the 1/e crossing by linear
/// interpolation (falling back to the curve span when the data never
/// drops that far).
pub fn fit_t1(curve: &PopulationDecayCurve) -> Result<T1Fit> {
    let t = &curve.delay_times;
    let p = &curve.p1_values;
    let n = t.len();

    let tail = (n / 10).max(1);
    let offset0 = p[n - tail..].iter().sum::<f64>() / tail as f64;
    let amp0 = p[0] - offset0;
    if amp0 <= 0.0 {
        return Err(QpError::DecayNotObserved);
    }
    let span = t[n - 1] - t[0];
    let target = offset0 + amp0 / std::f64::consts::E;
    let mut tau0 = span;
    for i in 1..n {
        if p[i] <= target && p[i - 1] > target {
            let frac = (p[i - 1] - target) / (p[i - 1] - p[i]);
            tau0 = t[i - 1] + frac * (t[i] - t[i - 1]) - t[0];
            break;
        }
    }
    if tau0 <= 0.0 {
        return Err(QpError::DecayNotObserved);
    }

    // Parameters: (A, B, k) with k = 1/T1; residual r_i = model − data.
    let mut theta = [amp0, offset0, 1.0 / tau0];
    let ssr = |th: &[f64; 3]| -> f64 {
        t.iter()
            .zip(p)
            .map(|(&ti, &pi)| {
                let r = th[0] * (-th[2] * ti).exp() + th[1] - pi;
                r * r
            })
            .sum()
    };
    let mut current = ssr(&theta);
    let mut converged = false;
    for _ in 0..T1_FIT_MAX_ITER {
        // Normal equations JᵀJ·δ = −Jᵀr.
        let mut jtj = vec![vec![0.0; 3]; 3];
        let mut jtr = vec![0.0; 3];
        for (&ti, &pi) in t.iter().zip(p) {
            let e = (-theta[2] * ti).exp();
            let r = theta[0] * e + theta[1] - pi;
            let grad = [e, 1.0, -theta[0] * ti * e];
            for a in 0..3 {
                for b in 0..3 {
                    jtj[a][b] += grad[a] * grad[b];
                }
                jtr[a] -= grad[a] * r;
            }
        }
        let delta = linalg::solve(&mut jtj, &mut jtr)
            .ok_or_else(|| QpError::NonConvergence("singular normal equations".into()))?;

        // Backtracking damping: halve the step until SSR improves.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = [
                theta[0] + lambda * delta[0],
                theta[1] + lambda * delta[1],
                theta[2] + lambda * delta[2],
            ];
            let trial_ssr = ssr(&trial);
            if trial_ssr <= current {
                let step = lambda * delta.iter().map(|d| d * d).sum::<f64>().sqrt();
                let scale = theta.iter().map(|v| v.abs()).sum::<f64>().max(1e-30);
                theta = trial;
                current = trial_ssr;
                accepted = true;
                if step < 1e-12 * scale {
                    converged = true;
                }
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(QpError::NonConvergence(format!(
            "T1 fit did not converge in {T1_FIT_MAX_ITER} iterations"
        )));
    }
    let (amp, off, k) = (theta[0], theta[1], theta[2]);
    if k <= 0.0 || amp <= 0.0 {
        return Err(QpError::DecayNotObserved);
    }

    // 1-σ from the covariance s²·(JᵀJ)⁻¹ of the converged fit.
    let mut jtj = vec![vec![0.0; 3]; 3];
    for &ti in t {
        let e = (-k * ti).exp();
        let grad = [e, 1.0, -amp * ti * e];
        for a in 0..3 {
            for b in 0..3 {
                jtj[a][b] += grad[a] * grad[b];
            }
        }
    }
    let dof = (n - 3).max(1) as f64;
    let sigma2 = current / dof;
    let k_variance = linalg::invert(&jtj).map(|inv| inv[2][2] * sigma2);
    let t1 = 1.0 / k;
    let t1_uncertainty = match k_variance {
        Some(v) if v.is_finite() && v >= 0.0 => v.sqrt() * t1 * t1,
        _ => f64::NAN,
    };
    Ok(T1Fit {
        t1,
        t1_uncertainty,
        amplitude: amp,
        offset: off,
    })
}

/// Conversion factor C = √(2·ω_q·Δ/(π²·ħ)) between normalized density
/// and excess relaxation rate, 1/s.
pub fn compute_c(consts: &PhysicalConstants) -> f64 {
    (2.0 * consts.qubit_angular_freq * consts.delta_gap
        / (std::f64::consts::PI.powi(2) * consts.hbar))
        .sqrt()
}

/// Normalized quasiparticle density from a measured T1 and the
/// baseline relaxation rate: (1/t1 − gamma0)/C. Negative outputs mean
/// the measurement sat below baseline; they are preserved.
pub fn gamma_to_xqp(t1: f64, gamma0: f64, consts: &PhysicalConstants) -> f64 {
    (1.0 / t1 - gamma0) / compute_c(consts)
}

/// Relaxation rate from a normalized density: gamma0 + C·x_qp. Exact
/// inverse of [`gamma_to_xqp`].
pub fn xqp_to_gamma(x_qp: f64, gamma0: f64, consts: &PhysicalConstants) -> f64 {
    gamma0 + compute_c(consts) * x_qp
}

/// Weighting profile across the measurement window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowWeighting {
    /// Plain mean over the window.
    Uniform,
    /// Weight exp(−(t − w0)/t_avg) decaying from the window start w0,
    /// normalized; models relaxation-weighted sensitivity.
    Exponential,
}

/// Average a piecewise-linear trajectory over the measurement window
/// that ends at each requested time: output[i] is the weighted mean
/// of x(t) over [eval_times[i] − t_avg, eval_times[i]].
///
/// The trajectory must cover every requested window; extend it (the
/// model is zero before its onset) rather than asking for windows the
/// data cannot support. t_avg = 0 reduces to sampling the trajectory
/// at eval_times.
pub fn window_average_at(
    traj_times: &[f64],
    traj_values: &[f64],
    eval_times: &[f64],
    t_avg: f64,
    weighting: WindowWeighting,
) -> Result<Vec<f64>> {
    if traj_times.len() != traj_values.len() {
        return Err(QpError::InvalidInput(format!(
            "time/value length mismatch: {} vs {}",
            traj_times.len(),
            traj_values.len()
        )));
    }
    if !(t_avg >= 0.0) {
        return Err(QpError::InvalidParameter {
            field: "t_avg",
            reason: format!("must be ≥ 0, got {t_avg:e}"),
        });
    }
    if traj_times.len() < 2 {
        return Err(QpError::InvalidInput(
            "need at least 2 trajectory samples".into(),
        ));
    }
    for pair in traj_times.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(QpError::InvalidInput(
                "trajectory times must be strictly increasing".into(),
            ));
        }
    }
    let t0 = traj_times[0];
    let t_end = traj_times[traj_times.len() - 1];
    let span_eps = 1e-9 * (t_end - t0).max(t_avg);
    for &t_r in eval_times {
        if !t_r.is_finite() {
            return Err(QpError::InvalidInput(
                "evaluation time is not finite".into(),
            ));
        }
        if t_r - t_avg < t0 - span_eps || t_r > t_end + span_eps {
            return Err(QpError::InvalidInput(format!(
                "averaging window [{:e}, {:e}] leaves the trajectory support [{:e}, {:e}]",
                t_r - t_avg,
                t_r,
                t0,
                t_end
            )));
        }
    }

    // Piecewise-linear read of the trajectory, exact at the samples.
    let interp = |t: f64| -> f64 {
        let i = traj_times.partition_point(|&x| x <= t);
        if i > 0 && traj_times[i - 1] == t {
            return traj_values[i - 1];
        }
        let seg = i.clamp(1, traj_times.len() - 1) - 1;
        let frac = (t - traj_times[seg]) / (traj_times[seg + 1] - traj_times[seg]);
        traj_values[seg] + frac * (traj_values[seg + 1] - traj_values[seg])
    };

    if t_avg == 0.0 {
        return Ok(eval_times
            .iter()
            .map(|&t| interp(t.clamp(t0, t_end)))
            .collect());
    }

    let mut out = Vec::with_capacity(eval_times.len());
    for &t_r in eval_times {
        let t_r = t_r.clamp(t0, t_end);
        let w0 = (t_r - t_avg).clamp(t0, t_r);
        if w0 >= t_r {
            out.push(interp(t_r));
            continue;
        }
        let weight = |t: f64| -> f64 {
            match weighting {
                WindowWeighting::Uniform => 1.0,
                WindowWeighting::Exponential => (-(t - w0) / t_avg).exp(),
            }
        };

        // Trapezoid over the trajectory nodes inside the window plus
        // the two interpolated edges; den normalizes the weight.
        let mut num = 0.0;
        let mut den = 0.0;
        let mut prev_t = w0;
        let mut prev_v = interp(w0);
        let mut prev_w = weight(w0);
        let lo = traj_times.partition_point(|&x| x <= w0);
        let hi = traj_times.partition_point(|&x| x < t_r);
        for i in lo..hi {
            let (t, v) = (traj_times[i], traj_values[i]);
            let w = weight(t);
            let dt = t - prev_t;
            num += 0.5 * dt * (prev_w * prev_v + w * v);
            den += 0.5 * dt * (prev_w + w);
            prev_t = t;
            prev_v = v;
            prev_w = w;
        }
        let v = interp(t_r);
        let w = weight(t_r);
        let dt = t_r - prev_t;
        num += 0.5 * dt * (prev_w * prev_v + w * v);
        den += 0.5 * dt * (prev_w + w);
        out.push(if den > 0.0 { num / den } else { v });
    }
    Ok(out)
}

/// [`window_average_at`] evaluated at the trajectory's own sample
/// times. With t_avg > 0 the earliest samples cannot support their
/// windows, so this errors unless the series starts at least t_avg
/// before the first time of interest; callers wanting output on a
/// shorter grid than the data should use [`window_average_at`].
pub fn window_average(
    times: &[f64],
    values: &[f64],
    t_avg: f64,
    weighting: WindowWeighting,
) -> Result<Vec<f64>> {
    if t_avg == 0.0 {
        if times.len() != values.len() {
            return Err(QpError::InvalidInput(format!(
                "time/value length mismatch: {} vs {}",
                times.len(),
                values.len()
            )));
        }
        return Ok(values.to_vec());
    }
    window_average_at(times, values, times, t_avg, weighting)
}

/// Transit-time estimate for one propagation mechanism over the
/// converter-qubit separation.
pub fn estimate_timescale(
    mechanism: PropagationMechanism,
    geometry: &GeometryParams,
) -> TimescaleEstimate {
    let l = geometry.sfq_qubit_distance;
    let (transit_time, effective_diffusivity) = match mechanism {
        PropagationMechanism::Photon => (l / geometry.photon_speed, None),
        PropagationMechanism::DirectDiffusion => {
            (l * l / geometry.qp_diffusivity, Some(geometry.qp_diffusivity))
        }
        PropagationMechanism::PhononMediated => {
            // Phonons random-walk through the substrate: one thickness
            // per bounce at the sound speed gives D_eff = v_s·d.
            let d_eff = geometry.sound_speed * geometry.substrate_thickness;
            (l * l / d_eff, Some(d_eff))
        }
    };
    TimescaleEstimate {
        mechanism,
        transit_time,
        effective_diffusivity,
    }
}

/// DC voltage the converter must show when locked to the drive:
/// one flux quantum per pulse, V = Φ0·f.
pub fn expected_sfq_voltage(drive_freq: f64, consts: &PhysicalConstants) -> f64 {
    consts.flux_quantum * drive_freq
}

/// Default relative tolerance for the converter operating-region
/// check.
pub const OPERATING_REGION_TOLERANCE: f64 = 0.036;

/// True when the measured converter voltage sits within
/// `tolerance_fraction` of the locked value Φ0·f.
pub fn operating_region_check(
    measured_voltage: f64,
    drive_freq: f64,
    tolerance_fraction: f64,
    consts: &PhysicalConstants,
) -> bool {
    let expected = expected_sfq_voltage(drive_freq, consts);
    (measured_voltage - expected).abs() / expected <= tolerance_fraction
}

/// One evaluated row of a converter operating-region table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingRegionCheck {
    /// Converter drive frequency, Hz.
    pub drive_frequency: f64,
    /// Measured DC voltage, V.
    pub measured_voltage: f64,
    /// Locked-operation voltage Φ0·f, V.
    pub expected_voltage: f64,
    /// |measured − expected| / expected.
    pub deviation_fraction: f64,
    pub within_band: bool,
}

impl OperatingRegionCheck {
    pub fn evaluate(
        measured_voltage: f64,
        drive_freq: f64,
        tolerance_fraction: f64,
        consts: &PhysicalConstants,
    ) -> Self {
        let expected_voltage = expected_sfq_voltage(drive_freq, consts);
        let deviation_fraction = (measured_voltage - expected_voltage).abs() / expected_voltage;
        Self {
            drive_frequency: drive_freq,
            measured_voltage,
            expected_voltage,
            deviation_fraction,
            within_band: deviation_fraction <= tolerance_fraction,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_curve(a: f64, b: f64, t1: f64, n: usize, span: f64) -> PopulationDecayCurve {
        let delay_times: Vec<f64> = (0..n).map(|i| span * i as f64 / (n - 1) as f64).collect();
        let p1_values = delay_times.iter().map(|&t| a * (-t / t1).exp() + b).collect();
        PopulationDecayCurve {
            delay_times,
            p1_values,
            p1_uncertainty: None,
        }
        .validated()
        .unwrap()
    }

    #[test]
    fn fit_recovers_baseline_decay() {
        let fit = fit_t1(&synthetic_curve(1.0, 0.0, 6.0e-6, 50, 30e-6)).unwrap();
        assert!((fit.t1 - 6.0e-6).abs() / 6.0e-6 < 0.01);
    }

    #[test]
    fn fit_recovers_offset_and_amplitude() {
        let fit = fit_t1(&synthetic_curve(0.8, 0.1, 1.23e-6, 50, 30e-6)).unwrap();
        assert!((fit.t1 - 1.23e-6).abs() / 1.23e-6 < 0.01);
        assert!((fit.amplitude - 0.8).abs() / 0.8 < 0.01);
        assert!((fit.offset - 0.1).abs() / 0.1 < 0.01);
    }

    #[test]
    fn constant_curve_is_rejected() {
        let c = PopulationDecayCurve {
            delay_times: vec![0.0, 1e-6, 2e-6, 3e-6],
            p1_values: vec![0.5; 4],
            p1_uncertainty: None,
        }
        .validated()
        .unwrap();
        assert!(matches!(fit_t1(&c), Err(QpError::DecayNotObserved)));
    }

    #[test]
    fn fit_handles_slow_decay_without_one_over_e_crossing() {
        // T1 = 50 µs over a 30 µs span: the curve never reaches A/e.
        let fit = fit_t1(&synthetic_curve(1.0, 0.0, 50e-6, 50, 30e-6)).unwrap();
        assert!((fit.t1 - 50e-6).abs() / 50e-6 < 0.01);
    }

    #[test]
    fn density_conversion_matches_hand_value() {
        let consts = PhysicalConstants::default();
        let c = compute_c(&consts);
        assert!((c - 3.9416060085836525e10).abs() / 3.94e10 < 1e-10);
        let x = gamma_to_xqp(1.23e-6, 1.0 / 6.0e-6, &consts);
        assert!((x - 1.639792160878316e-5).abs() / 1.64e-5 < 1e-10);
    }

    #[test]
    fn conversion_round_trip_is_identity() {
        let consts = PhysicalConstants::default();
        let gamma0 = 1.0 / 6.0e-6;
        for &x in &[0.0, 1e-7, 1.64e-5, 3e-4] {
            let gamma = xqp_to_gamma(x, gamma0, &consts);
            let back = gamma_to_xqp(1.0 / gamma, gamma0, &consts);
            assert!((back - x).abs() <= 1e-12 * x.abs().max(1e-20));
        }
    }

    #[test]
    fn baseline_t1_maps_to_zero_density() {
        let consts = PhysicalConstants::default();
        let x = gamma_to_xqp(6.0e-6, 1.0 / 6.0e-6, &consts);
        assert!(x.abs() < 1e-20);
    }

    #[test]
    fn window_average_zero_width_is_identity() {
        let t: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let v: Vec<f64> = t.iter().map(|&x| (x - 7.0).powi(2)).collect();
        let out = window_average(&t, &v, 0.0, WindowWeighting::Uniform).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn window_average_preserves_constants() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.37).collect();
        let v = vec![2.5; 50];
        let eval: Vec<f64> = t.iter().copied().filter(|&x| x >= 3.0).collect();
        for weighting in [WindowWeighting::Uniform, WindowWeighting::Exponential] {
            let out = window_average_at(&t, &v, &eval, 3.0, weighting).unwrap();
            assert_eq!(out.len(), eval.len());
            for &o in &out {
                assert!((o - 2.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn window_average_linear_ramp_lags_by_half_window() {
        // Mean of a linear ramp over [t−w, t] is the ramp at t − w/2.
        let t: Vec<f64> = (0..200).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().map(|&x| 3.0 * x + 1.0).collect();
        let eval: Vec<f64> = t.iter().copied().filter(|&x| x >= 4.0).collect();
        let out = window_average_at(&t, &v, &eval, 4.0, WindowWeighting::Uniform).unwrap();
        for (&ti, &o) in eval.iter().zip(&out) {
            let expect = 3.0 * (ti - 2.0) + 1.0;
            assert!((o - expect).abs() < 1e-9, "at t={ti}");
        }
    }

    #[test]
    fn window_before_support_is_rejected() {
        let t = vec![0.0, 1.0, 2.0, 3.0];
        let v = vec![1.0, 2.0, 3.0, 4.0];
        assert!(window_average(&t, &v, 1.5, WindowWeighting::Uniform).is_err());
    }

    #[test]
    fn timescale_defaults_reproduce_elimination_argument() {
        let g = GeometryParams::default();
        let photon = estimate_timescale(PropagationMechanism::Photon, &g);
        let direct = estimate_timescale(PropagationMechanism::DirectDiffusion, &g);
        let phonon = estimate_timescale(PropagationMechanism::PhononMediated, &g);
        assert!((photon.transit_time - 2.5e-11).abs() < 1e-22);
        assert!(photon.effective_diffusivity.is_none());
        assert!((direct.transit_time - 5.2083333333e-2).abs() / 5.2e-2 < 1e-9);
        assert!((phonon.transit_time - 1.0e-5).abs() / 1e-5 < 1e-12);
        assert!(photon.transit_time < phonon.transit_time);
        assert!(phonon.transit_time < direct.transit_time);
    }

    #[test]
    fn voltage_check_examples() {
        let consts = PhysicalConstants::default();
        let v1 = expected_sfq_voltage(1e9, &consts);
        assert!((v1 - 2.067833848e-6).abs() / 2.07e-6 < 1e-12);
        assert!(operating_region_check(4.13e-6, 2e9, 0.036, &consts));
        assert!(!operating_region_check(3.9e-6, 2e9, 0.036, &consts));
        let exact = expected_sfq_voltage(3.7e9, &consts);
        assert!(operating_region_check(exact, 3.7e9, 0.036, &consts));
    }
}
