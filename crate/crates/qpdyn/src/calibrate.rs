//! Nonlinear least-squares calibration of the phonon model against
//! extracted density data, plus synthetic-data generation for
//! round-trip self-tests.
//!
//! The fitter is derivative-free Nelder-Mead over log-transformed free
//! parameters: the model has derivative kinks and its rates span many
//! orders of magnitude, so log space gives uniform scaling and keeps
//! every trial parameter positive. Residuals stay in linear density
//! space because measured densities can sit at or slightly below zero.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{QpError, Result};
use crate::linalg;
use crate::observables::{window_average_at, QpDensityPoint, WindowWeighting};
use crate::params::PhononModelParams;
use crate::phonon::model_curve;

/// Number of model parameters the fitter addresses.
pub const PARAM_COUNT: usize = 6;

/// Parameter names in fit order.
pub const PARAM_NAMES: [&str; PARAM_COUNT] = [
    "recombination_rate",
    "qubit_trapping_rate",
    "propagation_delay",
    "transfer_fraction",
    "sfq_generation_rate",
    "drive_duration",
];

/// Convergence threshold on the simplex diameter in log space.
const SIMPLEX_TOLERANCE: f64 = 1e-6;
/// Iteration cap per Nelder-Mead run.
const MAX_ITERATIONS: usize = 2000;
/// Additional runs from perturbed bests after the first.
const RESTARTS: usize = 3;
/// Fixed stream for the restart perturbations; fits are deterministic.
const RESTART_SEED: u64 = 0x71b0_d14e;

pub fn params_to_array(p: &PhononModelParams) -> [f64; PARAM_COUNT] {
    [
        p.recombination_rate,
        p.qubit_trapping_rate,
        p.propagation_delay,
        p.transfer_fraction,
        p.sfq_generation_rate,
        p.drive_duration,
    ]
}

pub fn params_from_array(a: &[f64; PARAM_COUNT]) -> PhononModelParams {
    PhononModelParams {
        recombination_rate: a[0],
        qubit_trapping_rate: a[1],
        propagation_delay: a[2],
        transfer_fraction: a[3],
        sfq_generation_rate: a[4],
        drive_duration: a[5],
    }
}

/// Measurement-window treatment applied to the model before residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragingSpec {
    /// Window length, s.
    pub t_avg: f64,
    pub weighting: WindowWeighting,
}

/// A calibration task: data, starting point, box bounds, and which
/// parameters stay fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct FitProblem {
    pub data: Vec<QpDensityPoint>,
    pub initial_params: PhononModelParams,
    /// Per-parameter (low, high), in fit order.
    pub bounds: [(f64, f64); PARAM_COUNT],
    /// true = parameter held at its initial value.
    pub fixed_mask: [bool; PARAM_COUNT],
    /// When present, the model is window-averaged before comparison.
    pub averaging: Option<AveragingSpec>,
}

/// Box bounds a multiplicative `factor` both ways around a reference
/// point, with the transfer fraction capped at its physical limit 1.
pub fn bounds_around(
    reference: &PhononModelParams,
    factor: f64,
) -> Result<[(f64, f64); PARAM_COUNT]> {
    if !(factor > 1.0) {
        return Err(QpError::InvalidParameter {
            field: "bound_factor",
            reason: format!("must be > 1, got {factor:e}"),
        });
    }
    let a = params_to_array(reference);
    let mut bounds = [(0.0, 0.0); PARAM_COUNT];
    for (b, &v) in bounds.iter_mut().zip(&a) {
        *b = (v / factor, v * factor);
    }
    bounds[3].1 = bounds[3].1.min(1.0);
    Ok(bounds)
}

/// Wide default box bounds: a factor 10³ both ways around a reference
/// value.
pub fn default_bounds(reference: &PhononModelParams) -> [(f64, f64); PARAM_COUNT] {
    bounds_around(reference, 1e3).expect("fixed factor is valid")
}

/// Mask holding the recombination rate fixed: it is nearly degenerate
/// with the generation rate on the qubit side, so it stays pinned
/// unless the caller frees it.
pub fn default_fixed_mask() -> [bool; PARAM_COUNT] {
    let mut mask = [false; PARAM_COUNT];
    mask[0] = true;
    mask
}

impl FitProblem {
    pub fn validated(self) -> Result<Self> {
        let free = self.fixed_mask.iter().filter(|&&f| !f).count();
        if free == 0 {
            return Err(QpError::InvalidInput(
                "all parameters fixed; nothing to fit".into(),
            ));
        }
        if self.data.len() < free + 1 {
            return Err(QpError::InvalidInput(format!(
                "insufficient data: {} points cannot constrain {free} free parameters",
                self.data.len()
            )));
        }
        let t0 = self.data[0].recovery_time;
        if self.data.iter().all(|d| d.recovery_time == t0) {
            return Err(QpError::InvalidInput(
                "degenerate data: all points share one recovery time".into(),
            ));
        }
        for d in &self.data {
            if !d.recovery_time.is_finite() || !d.x_qp.is_finite() || !(d.uncertainty >= 0.0) {
                return Err(QpError::InvalidInput(format!(
                    "bad data point at t_r = {:e}",
                    d.recovery_time
                )));
            }
        }
        let init = params_to_array(&self.initial_params);
        for i in 0..PARAM_COUNT {
            let (lo, hi) = self.bounds[i];
            let v = init[i];
            if self.fixed_mask[i] {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(QpError::InvalidParameter {
                        field: PARAM_NAMES[i],
                        reason: format!("fixed value must be ≥ 0 and finite, got {v:e}"),
                    });
                }
                continue;
            }
            if !(lo > 0.0 && hi > lo) {
                return Err(QpError::InvalidParameter {
                    field: PARAM_NAMES[i],
                    reason: format!("bounds ({lo:e}, {hi:e}) must satisfy 0 < low < high"),
                });
            }
            if !(v >= lo && v <= hi) {
                return Err(QpError::InvalidParameter {
                    field: PARAM_NAMES[i],
                    reason: format!("initial value {v:e} outside bounds ({lo:e}, {hi:e})"),
                });
            }
        }
        if let Some(avg) = &self.averaging {
            if !(avg.t_avg >= 0.0) || !avg.t_avg.is_finite() {
                return Err(QpError::InvalidParameter {
                    field: "t_avg",
                    reason: format!("must be ≥ 0, got {:e}", avg.t_avg),
                });
            }
        }
        Ok(self)
    }
}

/// Outcome of one calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: PhononModelParams,
    /// Weighted sum of squared residuals at the optimum.
    pub residual_norm: f64,
    /// Objective evaluations consumed across all runs.
    pub iterations: usize,
    pub converged: bool,
    /// 1-σ per-parameter uncertainty in fit order (0 for fixed
    /// entries); absent when the curvature matrix is ill-conditioned.
    pub uncertainty: Option<[f64; PARAM_COUNT]>,
}

/// Evaluate the (optionally window-averaged) model at the data times.
/// `times` must be sorted strictly increasing.
fn model_at(
    params: &PhononModelParams,
    times: &[f64],
    averaging: &Option<AveragingSpec>,
) -> Result<Vec<f64>> {
    match averaging {
        None => Ok(model_curve(params, times)?.values),
        Some(avg) if avg.t_avg == 0.0 => Ok(model_curve(params, times)?.values),
        Some(avg) => {
            // Dense support grid covering every backward window.
            let lo = times[0] - avg.t_avg;
            let hi = times[times.len() - 1];
            let dt = (avg.t_avg / 40.0).min(0.25e-6);
            let n = ((hi - lo) / dt).ceil() as usize + 1;
            let dense: Vec<f64> = (0..=n)
                .map(|i| lo + (hi - lo) * i as f64 / n as f64)
                .collect();
            let curve = model_curve(params, &dense)?;
            window_average_at(&dense, &curve.values, times, avg.t_avg, avg.weighting)
        }
    }
}

struct Objective<'a> {
    times: Vec<f64>,
    /// data index -> index into `times`.
    time_index: Vec<usize>,
    values: Vec<f64>,
    weights: Vec<f64>,
    template: [f64; PARAM_COUNT],
    free: Vec<usize>,
    bounds: &'a [(f64, f64); PARAM_COUNT],
    averaging: Option<AveragingSpec>,
    evaluations: std::cell::Cell<usize>,
}

impl Objective<'_> {
    fn params_from_log(&self, log_free: &[f64]) -> PhononModelParams {
        let mut a = self.template;
        for (&idx, &lv) in self.free.iter().zip(log_free) {
            a[idx] = lv.exp();
        }
        params_from_array(&a)
    }

    fn call(&self, log_free: &[f64]) -> f64 {
        self.evaluations.set(self.evaluations.get() + 1);
        for (&idx, &lv) in self.free.iter().zip(log_free) {
            let v = lv.exp();
            let (lo, hi) = self.bounds[idx];
            if !(v >= lo && v <= hi) {
                return f64::INFINITY;
            }
        }
        let params = self.params_from_log(log_free);
        let model = match model_at(&params, &self.times, &self.averaging) {
            Ok(m) => m,
            Err(_) => return f64::INFINITY,
        };
        let mut ssr = 0.0;
        for ((&ti, &vi), &wi) in self.time_index.iter().zip(&self.values).zip(&self.weights) {
            let r = model[ti] - vi;
            ssr += wi * r * r;
        }
        ssr
    }
}

struct NelderMeadRun {
    best_point: Vec<f64>,
    best_value: f64,
    converged: bool,
}

/// One Nelder-Mead descent from a simplex around `start` with the
/// given per-coordinate initial steps.
fn nelder_mead(obj: &Objective, start: &[f64], steps: &[f64]) -> NelderMeadRun {
    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), obj.call(start)));
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += steps[i];
        let (lo, hi) = obj.bounds[obj.free[i]];
        let (llo, lhi) = (lo.ln(), hi.ln());
        if v[i] >= lhi {
            v[i] = start[i] - steps[i];
        }
        v[i] = v[i].clamp(llo + 1e-12, lhi - 1e-12);
        let f = obj.call(&v);
        simplex.push((v, f));
    }

    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| {
                v.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        if diameter < SIMPLEX_TOLERANCE {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|(v, _)| v[i]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let combine = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = combine(1.0);
        let f_reflected = obj.call(&reflected);
        if f_reflected < simplex[0].1 {
            let expanded = combine(2.0);
            let f_expanded = obj.call(&expanded);
            simplex[dim] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
        } else if f_reflected < simplex[dim - 1].1 {
            simplex[dim] = (reflected, f_reflected);
        } else {
            let contracted = if f_reflected < worst.1 {
                combine(0.5)
            } else {
                combine(-0.5)
            };
            let f_contracted = obj.call(&contracted);
            if f_contracted < worst.1.min(f_reflected) {
                simplex[dim] = (contracted, f_contracted);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    for (x, b) in entry.0.iter_mut().zip(&best) {
                        *x = b + 0.5 * (*x - b);
                    }
                    entry.1 = obj.call(&entry.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    NelderMeadRun {
        best_point: simplex[0].0.clone(),
        best_value: simplex[0].1,
        converged,
    }
}

/// Calibrate the phonon model against the problem's data by weighted
/// least squares (weights 1/σ², σ = 1 where absent). Non-convergence
/// is reported in the result, not as an error.
pub fn fit_phonon_model(problem: &FitProblem) -> Result<FitResult> {
    fit_phonon_model_seeded(problem, RESTART_SEED)
}

/// [`fit_phonon_model`] with a caller-chosen seed for the restart
/// jitter. Identical seed and problem give an identical result.
pub fn fit_phonon_model_seeded(problem: &FitProblem, restart_seed: u64) -> Result<FitResult> {
    let problem = problem.clone().validated()?;

    // Sort data by recovery time, collapsing to unique model times.
    let mut order: Vec<usize> = (0..problem.data.len()).collect();
    order.sort_by(|&a, &b| {
        problem.data[a]
            .recovery_time
            .total_cmp(&problem.data[b].recovery_time)
    });
    let mut times: Vec<f64> = Vec::new();
    let mut time_index = vec![0usize; problem.data.len()];
    let mut values = Vec::with_capacity(problem.data.len());
    let mut weights = Vec::with_capacity(problem.data.len());
    for (rank, &di) in order.iter().enumerate() {
        let d = &problem.data[di];
        if times.last().map(|&t| d.recovery_time > t).unwrap_or(true) {
            times.push(d.recovery_time);
        }
        time_index[rank] = times.len() - 1;
        values.push(d.x_qp);
        let w = if d.uncertainty > 0.0 {
            1.0 / (d.uncertainty * d.uncertainty)
        } else {
            1.0
        };
        weights.push(w);
    }

    let free: Vec<usize> = (0..PARAM_COUNT)
        .filter(|&i| !problem.fixed_mask[i])
        .collect();
    let obj = Objective {
        times,
        time_index,
        values,
        weights,
        template: params_to_array(&problem.initial_params),
        free: free.clone(),
        bounds: &problem.bounds,
        averaging: problem.averaging,
        evaluations: std::cell::Cell::new(0),
    };

    let initial_log: Vec<f64> = free
        .iter()
        .map(|&i| params_to_array(&problem.initial_params)[i].ln())
        .collect();
    let steps = vec![0.05; free.len()];

    let mut rng = ChaCha8Rng::seed_from_u64(restart_seed);
    let jitter = Normal::new(0.0, 0.02).expect("valid normal");
    let mut best = nelder_mead(&obj, &initial_log, &steps);
    let mut converged = best.converged;
    for _ in 0..RESTARTS {
        let start: Vec<f64> = best
            .best_point
            .iter()
            .map(|&v| v + jitter.sample(&mut rng))
            .collect();
        let run = nelder_mead(&obj, &start, &steps);
        if run.best_value <= best.best_value {
            best = run;
            converged = best.converged;
        }
    }

    let params = obj.params_from_log(&best.best_point);
    let uncertainty = parameter_uncertainty(&obj, &best.best_point, best.best_value);
    Ok(FitResult {
        params,
        residual_norm: best.best_value,
        iterations: obj.evaluations.get(),
        converged,
        uncertainty,
    })
}

/// 1-σ parameter uncertainties from the Gauss-Newton curvature at the
/// optimum: s²·(JᵀWJ)⁻¹ with a central-difference Jacobian in log
/// space, mapped back as σ_p = p·σ_log p. None when the curvature
/// matrix is singular.
fn parameter_uncertainty(
    obj: &Objective,
    best_log: &[f64],
    best_ssr: f64,
) -> Option<[f64; PARAM_COUNT]> {
    let dim = best_log.len();
    let n = obj.values.len();
    if n <= dim {
        return None;
    }
    let params = obj.params_from_log(best_log);
    let h = 1e-5;
    let mut jacobian = vec![vec![0.0; dim]; n];
    for k in 0..dim {
        let mut plus = best_log.to_vec();
        plus[k] += h;
        let mut minus = best_log.to_vec();
        minus[k] -= h;
        let mp = model_at(&obj.params_from_log(&plus), &obj.times, &obj.averaging).ok()?;
        let mm = model_at(&obj.params_from_log(&minus), &obj.times, &obj.averaging).ok()?;
        for (row, &ti) in obj.time_index.iter().enumerate() {
            jacobian[row][k] = (mp[ti] - mm[ti]) / (2.0 * h);
        }
    }
    let mut jtwj = vec![vec![0.0; dim]; dim];
    for (row, &w) in jacobian.iter().zip(&obj.weights) {
        for a in 0..dim {
            for b in 0..dim {
                jtwj[a][b] += w * row[a] * row[b];
            }
        }
    }
    let inv = linalg::invert(&jtwj)?;
    let scale = best_ssr / (n - dim) as f64;
    let mut out = [0.0; PARAM_COUNT];
    for (k, &idx) in obj.free.iter().enumerate() {
        let var = inv[k][k] * scale;
        if !var.is_finite() || var < 0.0 {
            return None;
        }
        let p = params_to_array(&params)[idx];
        out[idx] = p * var.sqrt();
    }
    Some(out)
}

/// Model curve plus reproducible Gaussian noise; the per-point
/// uncertainty field carries noise_sigma.
pub fn synthesize_data(
    params: &PhononModelParams,
    times: &[f64],
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<QpDensityPoint>> {
    if !(noise_sigma >= 0.0) {
        return Err(QpError::InvalidParameter {
            field: "noise_sigma",
            reason: format!("must be ≥ 0, got {noise_sigma:e}"),
        });
    }
    let curve = model_curve(params, times)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).expect("valid normal");
    Ok(curve
        .times
        .iter()
        .zip(&curve.values)
        .map(|(&t, &v)| QpDensityPoint {
            recovery_time: t,
            x_qp: v + noise_sigma * noise.sample(&mut rng),
            uncertainty: noise_sigma,
        })
        .collect())
}
