//! Phonon-mediated propagation model: closed-form source density at
//! the converter, delayed pair-breaking generation near the qubit, and
//! the resulting qubit-vicinity density, plus independent ODE oracles
//! for both stages.
//!
//! Source stage: ẋ = g − r·x² while the converter runs (generation
//! balancing quadratic recombination), pure recombination decay after
//! shutoff. Qubit stage: recombination phonons cross the substrate
//! with delay t_p and break pairs at rate α·r·x_src², competing with
//! linear trapping at rate s.
//!
//! Time convention: t = 0 is converter shutoff; the drive runs on
//! [−t_drive, 0).

use crate::error::{QpError, Result};
use crate::params::PhononModelParams;

/// Relative tolerance of the qubit-density quadrature.
pub const QUBIT_QUADRATURE_RTOL: f64 = 1e-8;

const MAX_BISECTION_DEPTH: u32 = 48;

/// Sampled model output over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCurve {
    /// Recovery times, s; strictly increasing.
    pub times: Vec<f64>,
    /// Normalized quasiparticle density at each time.
    pub values: Vec<f64>,
    /// Parameter snapshot the curve was computed from.
    pub params: PhononModelParams,
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(QpError::InvalidInput("empty time grid".into()));
    }
    for pair in times.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(QpError::InvalidInput(
                "time grid must be strictly increasing".into(),
            ));
        }
    }
    Ok(())
}

/// Normalized quasiparticle density at the converter.
///
/// During the drive the density follows the tanh approach to the
/// generation-recombination plateau √(g/r); after shutoff it decays
/// hyperbolically under pure recombination. Continuous at t = 0.
pub fn source_density(t: f64, params: &PhononModelParams) -> Result<f64> {
    let r = params.recombination_rate;
    let g = params.sfq_generation_rate;
    let t_drive = params.drive_duration;
    if t < -t_drive {
        return Err(QpError::InvalidInput(format!(
            "t = {t:e} s is before injection start −{t_drive:e} s"
        )));
    }
    let plateau = (g / r).sqrt();
    let approach_rate = (g * r).sqrt();
    if t < 0.0 {
        Ok(plateau * (approach_rate * (t + t_drive)).tanh())
    } else {
        let shutoff_density = plateau * (approach_rate * t_drive).tanh();
        Ok(1.0 / (r * t + 1.0 / shutoff_density))
    }
}

/// Pair-breaking generation rate near the qubit, 1/s: the source
/// density squared, delayed by the phonon transit and scaled by the
/// transfer fraction. Zero before the first phonons arrive.
pub fn qubit_generation_rate(t: f64, params: &PhononModelParams) -> f64 {
    let shifted = t - params.propagation_delay;
    // Clamp guards the float edge at exactly the onset, where the
    // shifted argument may land fractionally below −t_drive.
    if shifted <= -params.drive_duration {
        return 0.0;
    }
    let x_src = source_density(shifted, params).expect("shifted argument is in range");
    params.transfer_fraction * params.recombination_rate * x_src * x_src
}

/// Integrate f over [a, b] by adaptive trapezoid bisection with
/// Richardson acceptance, splitting first at the supplied interior
/// kink locations. The tolerance is relative to the coarse estimate of
/// ∫|f|, distributed over subintervals by length.
fn adaptive_integral(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    interior_splits: &[f64],
    rtol: f64,
) -> Result<f64> {
    debug_assert!(b >= a);
    if b <= a {
        return Ok(0.0);
    }
    let mut bounds = vec![a];
    for &s in interior_splits {
        if s > a && s < b {
            bounds.push(s);
        }
    }
    bounds.push(b);
    bounds.sort_by(f64::total_cmp);

    // Coarse magnitude scan sets the absolute error budget.
    let mut magnitude = 0.0;
    for seg in bounds.windows(2) {
        let n = 32;
        let h = (seg[1] - seg[0]) / n as f64;
        for i in 0..n {
            let lo = seg[0] + i as f64 * h;
            magnitude += 0.5 * h * (f(lo).abs() + f(lo + h).abs());
        }
    }
    if magnitude == 0.0 {
        return Ok(0.0);
    }
    let budget = rtol * magnitude;
    let total_len = b - a;

    let mut integral = 0.0;
    let mut unresolved = 0.0;
    // Explicit stack of (lo, hi, f(lo), f(hi), depth).
    let mut stack: Vec<(f64, f64, f64, f64, u32)> = bounds
        .windows(2)
        .map(|seg| (seg[0], seg[1], f(seg[0]), f(seg[1]), 0))
        .collect();
    while let Some((lo, hi, flo, fhi, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        let coarse = 0.5 * (hi - lo) * (flo + fhi);
        let fine = 0.25 * (hi - lo) * (flo + 2.0 * fmid + fhi);
        let err = (fine - coarse) / 3.0;
        let local_budget = budget * (hi - lo) / total_len;
        if err.abs() <= local_budget || mid <= lo || mid >= hi {
            integral += fine + err;
        } else if depth >= MAX_BISECTION_DEPTH {
            integral += fine + err;
            unresolved += err.abs();
        } else {
            stack.push((lo, mid, flo, fmid, depth + 1));
            stack.push((mid, hi, fmid, fhi, depth + 1));
        }
    }
    if unresolved > budget {
        return Err(QpError::QuadratureFailure {
            requested_rtol: rtol,
            achieved_rtol: unresolved / magnitude,
        });
    }
    Ok(integral)
}

/// Integral of e^(s·(t − t_end))·g(t) over [lo, hi]; the shifted
/// exponent keeps the integrand ≤ O(g) for any s·t_end.
fn damped_generation_integral(
    lo: f64,
    hi: f64,
    t_end: f64,
    params: &PhononModelParams,
    rtol: f64,
) -> Result<f64> {
    let s = params.qubit_trapping_rate;
    let f = move |t: f64| (s * (t - t_end)).exp() * qubit_generation_rate(t, params);
    // Integrand kinks: converter shutoff seen through the delay, and
    // the shutoff of generation growth at t = 0.
    let splits = [0.0, params.propagation_delay];
    adaptive_integral(&f, lo, hi, &splits, rtol)
}

/// Normalized quasiparticle density near the qubit at recovery time t:
/// the trapping-damped accumulation of the delayed generation,
/// x(t) = ∫ e^(−s·(t−τ))·g(τ) dτ from the phonon onset. Zero at and
/// before the onset.
pub fn qubit_density(t: f64, params: &PhononModelParams) -> Result<f64> {
    let onset = params.qubit_onset_time();
    if t <= onset {
        return Ok(0.0);
    }
    damped_generation_integral(onset, t, t, params, QUBIT_QUADRATURE_RTOL)
}

/// Evaluate the qubit density on a whole grid, reusing the integral
/// between consecutive grid points through the exact decay relation
/// x(t₂) = x(t₁)·e^(−s·(t₂−t₁)) + ∫ over [t₁, t₂].
pub fn model_curve(params: &PhononModelParams, times: &[f64]) -> Result<ModelCurve> {
    check_grid(times)?;
    let onset = params.qubit_onset_time();
    let s = params.qubit_trapping_rate;
    let mut values = Vec::with_capacity(times.len());
    let mut prev_t = onset;
    let mut prev_x = 0.0;
    for &t in times {
        if t <= onset {
            values.push(0.0);
            continue;
        }
        let carried = prev_x * (-s * (t - prev_t)).exp();
        let grown = damped_generation_integral(prev_t, t, t, params, QUBIT_QUADRATURE_RTOL)?;
        prev_x = carried + grown;
        prev_t = t;
        values.push(prev_x);
    }
    Ok(ModelCurve {
        times: times.to_vec(),
        values,
        params: *params,
    })
}

/// RK4 march of dx/dt = f(t, x) across [lo, hi] in one step.
fn rk4_step(f: &dyn Fn(f64, f64) -> f64, t: f64, x: f64, dt: f64) -> f64 {
    let k1 = f(t, x);
    let k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
    let k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
    let k4 = f(t + dt, x + dt * k3);
    x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// March RK4 across [lo, hi], splitting at any interior kink so no
/// stage straddles a non-smooth point of f.
fn rk4_span(f: &dyn Fn(f64, f64) -> f64, lo: f64, hi: f64, x: f64, kinks: &[f64]) -> f64 {
    let mut cuts = vec![lo];
    for &k in kinks {
        if k > lo && k < hi {
            cuts.push(k);
        }
    }
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    let mut x = x;
    for seg in cuts.windows(2) {
        x = rk4_step(f, seg[0], x, seg[1] - seg[0]);
    }
    x
}

fn check_uniform_grid(times: &[f64], dt_cap: f64, context: &str) -> Result<f64> {
    check_grid(times)?;
    if times.len() < 2 {
        return Err(QpError::InvalidInput(format!(
            "{context}: need at least 2 grid points"
        )));
    }
    let dt = times[1] - times[0];
    for pair in times.windows(2) {
        if ((pair[1] - pair[0]) - dt).abs() > 1e-9 * dt {
            return Err(QpError::InvalidInput(format!(
                "{context}: grid must be uniform"
            )));
        }
    }
    if dt > dt_cap {
        return Err(QpError::InvalidInput(format!(
            "{context}: step {dt:e} s too coarse, need ≤ {dt_cap:e} s"
        )));
    }
    Ok(dt)
}

/// Independent oracle for [`source_density`]: RK4 integration of
/// ẋ = g·[drive on] − r·x² from zero at drive start. The grid must
/// start at −drive_duration, be uniform, and resolve the plateau
/// approach (dt ≤ 1/(100·√(g·r))).
pub fn source_density_ode_oracle(
    params: &PhononModelParams,
    times: &[f64],
) -> Result<ModelCurve> {
    let r = params.recombination_rate;
    let g = params.sfq_generation_rate;
    let t_drive = params.drive_duration;
    let dt_cap = 1.0 / (100.0 * (g * r).sqrt());
    let dt = check_uniform_grid(times, dt_cap, "source oracle")?;
    if (times[0] + t_drive).abs() > 1e-6 * dt {
        return Err(QpError::InvalidInput(format!(
            "source oracle: grid must start at drive start −{t_drive:e} s"
        )));
    }

    // The drive switches off at t = 0; integrate each span with the
    // generation term frozen to its piece so no RK4 stage sees the
    // discontinuity.
    let mut values = Vec::with_capacity(times.len());
    let mut x = 0.0;
    values.push(x);
    for pair in times.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi <= 0.0 {
            x = rk4_step(&|_t, x| g - r * x * x, lo, x, hi - lo);
        } else if lo >= 0.0 {
            x = rk4_step(&|_t, x| -r * x * x, lo, x, hi - lo);
        } else {
            x = rk4_step(&|_t, x| g - r * x * x, lo, x, -lo);
            x = rk4_step(&|_t, x| -r * x * x, 0.0, x, hi);
        }
        values.push(x);
    }
    Ok(ModelCurve {
        times: times.to_vec(),
        values,
        params: *params,
    })
}

/// Independent oracle for [`qubit_density`]: RK4 integration of
/// ẋ = g_qubit(t) − s·x from zero at the phonon onset. The grid must
/// start at the onset, be uniform, and satisfy
/// dt ≤ min(t_p, 1/s)/100.
pub fn qubit_density_ode_oracle(
    params: &PhononModelParams,
    times: &[f64],
) -> Result<ModelCurve> {
    let s = params.qubit_trapping_rate;
    let dt_cap = params.propagation_delay.min(1.0 / s) / 100.0;
    if dt_cap <= 0.0 {
        return Err(QpError::InvalidParameter {
            field: "propagation_delay",
            reason: "oracle needs a positive delay to set its step cap".into(),
        });
    }
    let dt = check_uniform_grid(times, dt_cap, "qubit oracle")?;
    let onset = params.qubit_onset_time();
    if (times[0] - onset).abs() > 1e-6 * dt {
        return Err(QpError::InvalidInput(format!(
            "qubit oracle: grid must start at the phonon onset {onset:e} s"
        )));
    }

    let deriv = |t: f64, x: f64| qubit_generation_rate(t, params) - s * x;
    // Derivative kinks at converter shutoff and at the delayed shutoff.
    let kinks = [0.0, params.propagation_delay];
    let mut values = Vec::with_capacity(times.len());
    let mut x = 0.0;
    values.push(x);
    for pair in times.windows(2) {
        x = rk4_span(&deriv, pair[0], pair[1], x, &kinks);
        values.push(x);
    }
    Ok(ModelCurve {
        times: times.to_vec(),
        values,
        params: *params,
    })
}

/// Uniform grid of n+1 points across [lo, hi].
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}
