//! C ABI over the qpdyn library: opaque handles, integer status codes,
//! and a thread-local error message. Every function returns
//! `QpdynStatus`; on anything but `Ok` the detail is available from
//! `qpdyn_last_error_message`. Handles are created and released by
//! the matching `_new`/`_free` pair and must not cross those pairs.

use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use qpdyn::calibrate::{
    default_bounds, default_fixed_mask, fit_phonon_model, fit_phonon_model_seeded,
    params_from_array, params_to_array, FitProblem, PARAM_COUNT,
};
use qpdyn::diffusion::{self, DensityField, DiffusionScenario, ProbeTimeSeries};
use qpdyn::observables::{
    self, window_average, PropagationMechanism, QpDensityPoint, WindowWeighting,
};
use qpdyn::params::{GeometryParams, PhononModelParams, PhysicalConstants};
use qpdyn::phonon::model_curve;
use qpdyn::QpError;

/// Result of every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpdynStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Arguments or data violated a documented precondition.
    InvalidInput = 2,
    /// An iterative routine stopped without meeting its tolerance.
    NonConvergence = 3,
    /// The diffusion update diverged.
    Instability = 4,
    /// Adaptive quadrature could not reach its tolerance.
    QuadratureFailure = 5,
    /// Unexpected internal failure (a bug; please report it).
    Internal = 6,
}

/// Propagation channel selector for `qpdyn_transit_time`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpdynMechanism {
    /// Electromagnetic propagation at the on-chip photon speed.
    Photon = 0,
    /// Phonons random-walking through the substrate.
    PhononMediated = 1,
    /// Quasiparticle diffusion along the film.
    DirectDiffusion = 2,
}

/// Physical constants of the device (opaque).
pub struct QpdynConstants(PhysicalConstants);

/// Chip geometry and material speeds (opaque).
pub struct QpdynGeometry(GeometryParams);

/// Phonon-burst model parameters (opaque). Parameters are addressed
/// by fit-order index: 0 recombination_rate (1/s), 1
/// qubit_trapping_rate (1/s), 2 propagation_delay (s), 3
/// transfer_fraction, 4 sfq_generation_rate (1/s), 5
/// drive_duration (s).
pub struct QpdynPhononParams(PhononModelParams);

/// Diffusion scenario under construction (opaque).
pub struct QpdynDiffusionScenario(DiffusionScenario);

/// Finished diffusion run: snapshots and probe series (opaque).
pub struct QpdynDiffusionResult {
    snapshots: Vec<DensityField>,
    probes: Vec<ProbeTimeSeries>,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message.into());
}

fn fail(err: &QpError) -> QpdynStatus {
    set_error(err.to_string());
    match err {
        QpError::NonConvergence(_) => QpdynStatus::NonConvergence,
        QpError::InstabilityDetected { .. } => QpdynStatus::Instability,
        QpError::QuadratureFailure { .. } => QpdynStatus::QuadratureFailure,
        _ => QpdynStatus::InvalidInput,
    }
}

fn invalid(message: impl Into<String>) -> QpdynStatus {
    set_error(message);
    QpdynStatus::InvalidInput
}

fn null_pointer(name: &str) -> QpdynStatus {
    set_error(format!("{name} must not be null"));
    QpdynStatus::NullPointer
}

/// Run `f` with panics converted to `Internal` so unwinding never
/// crosses the C boundary.
fn guard(f: impl FnOnce() -> QpdynStatus) -> QpdynStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            QpdynStatus::Internal
        }
    }
}

/// Copy the last error message into `buf` (NUL-terminated, truncated
/// to `cap`). Returns the full length the message needs, including
/// the terminator; call with a null `buf` or `cap` 0 to size a buffer.
#[no_mangle]
pub extern "C" fn qpdyn_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
        }
        bytes.len() + 1
    })
}

macro_rules! require {
    ($ptr:expr) => {
        if $ptr.is_null() {
            return null_pointer(stringify!($ptr));
        }
    };
}

unsafe fn input_slice<'a>(ptr: *const f64, len: usize) -> &'a [f64] {
    if len == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(ptr, len)
    }
}

/// Allocate the default device constants.
#[no_mangle]
pub extern "C" fn qpdyn_constants_new(out: *mut *mut QpdynConstants) -> QpdynStatus {
    guard(|| {
        require!(out);
        let handle = Box::new(QpdynConstants(PhysicalConstants::default()));
        unsafe { *out = Box::into_raw(handle) };
        QpdynStatus::Ok
    })
}

/// Release a constants handle; null is allowed.
#[no_mangle]
pub extern "C" fn qpdyn_constants_free(handle: *mut QpdynConstants) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Density-to-rate conversion factor C in Γ = Γ0 + C·x_qp, 1/s.
#[no_mangle]
pub extern "C" fn qpdyn_compute_c(
    constants: *const QpdynConstants,
    out: *mut f64,
) -> QpdynStatus {
    guard(|| {
        require!(constants);
        require!(out);
        unsafe { *out = observables::compute_c(&(*constants).0) };
        QpdynStatus::Ok
    })
}

/// Quasiparticle density extracted from a relaxation time `t1_s`
/// against the baseline rate `gamma0_per_s`.
#[no_mangle]
pub extern "C" fn qpdyn_gamma_to_xqp(
    constants: *const QpdynConstants,
    t1_s: f64,
    gamma0_per_s: f64,
    out: *mut f64,
) -> QpdynStatus {
    guard(|| {
        require!(constants);
        require!(out);
        if !(t1_s > 0.0) {
            return invalid(format!("t1_s must be > 0, got {t1_s:e}"));
        }
        unsafe { *out = observables::gamma_to_xqp(t1_s, gamma0_per_s, &(*constants).0) };
        QpdynStatus::Ok
    })
}

/// DC voltage of a converter locked to `drive_freq_hz`: Φ0·f.
#[no_mangle]
pub extern "C" fn qpdyn_expected_sfq_voltage(
    constants: *const QpdynConstants,
    drive_freq_hz: f64,
    out: *mut f64,
) -> QpdynStatus {
    guard(|| {
        require!(constants);
        require!(out);
        if !(drive_freq_hz > 0.0) {
            return invalid(format!("drive_freq_hz must be > 0, got {drive_freq_hz:e}"));
        }
        unsafe { *out = observables::expected_sfq_voltage(drive_freq_hz, &(*constants).0) };
        QpdynStatus::Ok
    })
}

/// Allocate the default chip geometry.
#[no_mangle]
pub extern "C" fn qpdyn_geometry_new(out: *mut *mut QpdynGeometry) -> QpdynStatus {
    guard(|| {
        require!(out);
        let handle = Box::new(QpdynGeometry(GeometryParams::default()));
        unsafe { *out = Box::into_raw(handle) };
        QpdynStatus::Ok
    })
}

/// Release a geometry handle; null is allowed.
#[no_mangle]
pub extern "C" fn qpdyn_geometry_free(handle: *mut QpdynGeometry) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Converter-to-qubit transit time for one propagation mechanism, s.
#[no_mangle]
pub extern "C" fn qpdyn_transit_time(
    geometry: *const QpdynGeometry,
    mechanism: QpdynMechanism,
    out_seconds: *mut f64,
) -> QpdynStatus {
    guard(|| {
        require!(geometry);
        require!(out_seconds);
        let mechanism = match mechanism {
            QpdynMechanism::Photon => PropagationMechanism::Photon,
            QpdynMechanism::PhononMediated => PropagationMechanism::PhononMediated,
            QpdynMechanism::DirectDiffusion => PropagationMechanism::DirectDiffusion,
        };
        let estimate = observables::estimate_timescale(mechanism, unsafe { &(*geometry).0 });
        unsafe { *out_seconds = estimate.transit_time };
        QpdynStatus::Ok
    })
}

/// Allocate phonon model parameters at the library defaults.
#[no_mangle]
pub extern "C" fn qpdyn_phonon_params_new(out: *mut *mut QpdynPhononParams) -> QpdynStatus {
    guard(|| {
        require!(out);
        let handle = Box::new(QpdynPhononParams(PhononModelParams::default()));
        unsafe { *out = Box::into_raw(handle) };
        QpdynStatus::Ok
    })
}

/// Release a phonon parameter handle; null is allowed.
#[no_mangle]
pub extern "C" fn qpdyn_phonon_params_free(handle: *mut QpdynPhononParams) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Read one parameter by fit-order index (see `QpdynPhononParams`).
#[no_mangle]
pub extern "C" fn qpdyn_phonon_params_get(
    params: *const QpdynPhononParams,
    index: u32,
    out: *mut f64,
) -> QpdynStatus {
    guard(|| {
        require!(params);
        require!(out);
        let index = index as usize;
        if index >= PARAM_COUNT {
            return invalid(format!("parameter index {index} out of range 0..{PARAM_COUNT}"));
        }
        unsafe { *out = params_to_array(&(*params).0)[index] };
        QpdynStatus::Ok
    })
}

/// Set one parameter by fit-order index (see `QpdynPhononParams`).
/// The new value set is validated together with the others.
#[no_mangle]
pub extern "C" fn qpdyn_phonon_params_set(
    params: *mut QpdynPhononParams,
    index: u32,
    value: f64,
) -> QpdynStatus {
    guard(|| {
        require!(params);
        let index = index as usize;
        if index >= PARAM_COUNT {
            return invalid(format!("parameter index {index} out of range 0..{PARAM_COUNT}"));
        }
        let mut array = params_to_array(unsafe { &(*params).0 });
        array[index] = value;
        match params_from_array(&array).validated() {
            Ok(updated) => {
                unsafe { (*params).0 = updated };
                QpdynStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Evaluate the phonon-burst qubit density on a strictly increasing
/// time grid. `out_values` must hold `len` doubles.
#[no_mangle]
pub extern "C" fn qpdyn_phonon_curve(
    params: *const QpdynPhononParams,
    times: *const f64,
    len: usize,
    out_values: *mut f64,
) -> QpdynStatus {
    guard(|| {
        require!(params);
        require!(times);
        require!(out_values);
        if len == 0 {
            return invalid("len must be > 0");
        }
        let grid = unsafe { input_slice(times, len) };
        match model_curve(unsafe { &(*params).0 }, grid) {
            Ok(curve) => {
                unsafe {
                    std::ptr::copy_nonoverlapping(curve.values.as_ptr(), out_values, len);
                }
                QpdynStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Backward window average of a sampled trajectory at its own sample
/// times. `exponential_weighting` 0 means uniform weights; nonzero
/// selects exp(−(t−t0)/t_avg). Fails when a window would start before
/// the first sample.
#[no_mangle]
pub extern "C" fn qpdyn_window_average(
    times: *const f64,
    values: *const f64,
    len: usize,
    t_avg_s: f64,
    exponential_weighting: i32,
    out_values: *mut f64,
) -> QpdynStatus {
    guard(|| {
        require!(times);
        require!(values);
        require!(out_values);
        if len == 0 {
            return invalid("len must be > 0");
        }
        let weighting = if exponential_weighting == 0 {
            WindowWeighting::Uniform
        } else {
            WindowWeighting::Exponential
        };
        let t = unsafe { input_slice(times, len) };
        let v = unsafe { input_slice(values, len) };
        match window_average(t, v, t_avg_s, weighting) {
            Ok(averaged) => {
                unsafe {
                    std::ptr::copy_nonoverlapping(averaged.as_ptr(), out_values, len);
                }
                QpdynStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Allocate the default diffusion scenario (reference chip, 500×250
/// grid, converter drive on for 25 µs).
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_scenario_new(
    out: *mut *mut QpdynDiffusionScenario,
) -> QpdynStatus {
    guard(|| {
        require!(out);
        let handle = Box::new(QpdynDiffusionScenario(DiffusionScenario::default()));
        unsafe { *out = Box::into_raw(handle) };
        QpdynStatus::Ok
    })
}

/// Release a scenario handle; null is allowed.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_scenario_free(handle: *mut QpdynDiffusionScenario) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Override the grid resolution. Validation happens at run time.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_scenario_set_grid(
    scenario: *mut QpdynDiffusionScenario,
    nx: usize,
    ny: usize,
) -> QpdynStatus {
    guard(|| {
        require!(scenario);
        unsafe {
            (*scenario).0.grid_nx = nx;
            (*scenario).0.grid_ny = ny;
        }
        QpdynStatus::Ok
    })
}

/// Override the linear trapping rate, 1/s.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_scenario_set_trapping_rate(
    scenario: *mut QpdynDiffusionScenario,
    rate_per_s: f64,
) -> QpdynStatus {
    guard(|| {
        require!(scenario);
        unsafe { (*scenario).0.trapping_rate = rate_per_s };
        QpdynStatus::Ok
    })
}

/// Override the quadratic recombination rate, 1/s.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_scenario_set_recombination_rate(
    scenario: *mut QpdynDiffusionScenario,
    rate_per_s: f64,
) -> QpdynStatus {
    guard(|| {
        require!(scenario);
        unsafe { (*scenario).0.recombination_rate = rate_per_s };
        QpdynStatus::Ok
    })
}

/// Override the injection rate into the drive region, 1/s.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_scenario_set_injection_rate(
    scenario: *mut QpdynDiffusionScenario,
    rate_per_s: f64,
) -> QpdynStatus {
    guard(|| {
        require!(scenario);
        unsafe { (*scenario).0.injection_rate = rate_per_s };
        QpdynStatus::Ok
    })
}

/// Override the end of the simulated window, s.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_scenario_set_simulation_end(
    scenario: *mut QpdynDiffusionScenario,
    end_s: f64,
) -> QpdynStatus {
    guard(|| {
        require!(scenario);
        unsafe { (*scenario).0.simulation_end = end_s };
        QpdynStatus::Ok
    })
}

/// Largest stable explicit time step for the scenario, s.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_stable_dt(
    scenario: *const QpdynDiffusionScenario,
    out_seconds: *mut f64,
) -> QpdynStatus {
    guard(|| {
        require!(scenario);
        require!(out_seconds);
        unsafe { *out_seconds = diffusion::stable_dt(&(*scenario).0) };
        QpdynStatus::Ok
    })
}

/// Run the scenario to completion and hand back a result handle.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_run(
    scenario: *const QpdynDiffusionScenario,
    out: *mut *mut QpdynDiffusionResult,
) -> QpdynStatus {
    guard(|| {
        require!(scenario);
        require!(out);
        match diffusion::run(unsafe { &(*scenario).0 }) {
            Ok((snapshots, probes)) => {
                let handle = Box::new(QpdynDiffusionResult { snapshots, probes });
                unsafe { *out = Box::into_raw(handle) };
                QpdynStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Release a result handle; null is allowed.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_result_free(handle: *mut QpdynDiffusionResult) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Number of probe series in a result.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_probe_count(
    result: *const QpdynDiffusionResult,
    out: *mut usize,
) -> QpdynStatus {
    guard(|| {
        require!(result);
        require!(out);
        unsafe { *out = (*result).probes.len() };
        QpdynStatus::Ok
    })
}

/// Number of samples in probe series `probe`.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_probe_length(
    result: *const QpdynDiffusionResult,
    probe: usize,
    out: *mut usize,
) -> QpdynStatus {
    guard(|| {
        require!(result);
        require!(out);
        let probes = unsafe { &(*result).probes };
        match probes.get(probe) {
            Some(series) => {
                unsafe { *out = series.times.len() };
                QpdynStatus::Ok
            }
            None => invalid(format!("probe index {probe} out of range 0..{}", probes.len())),
        }
    })
}

/// Copy probe series `probe` into caller buffers sized by
/// `qpdyn_diffusion_probe_length`. Either output may be null to
/// skip that column.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_probe_series(
    result: *const QpdynDiffusionResult,
    probe: usize,
    out_times: *mut f64,
    out_values: *mut f64,
) -> QpdynStatus {
    guard(|| {
        require!(result);
        let probes = unsafe { &(*result).probes };
        let Some(series) = probes.get(probe) else {
            return invalid(format!("probe index {probe} out of range 0..{}", probes.len()));
        };
        unsafe {
            if !out_times.is_null() {
                std::ptr::copy_nonoverlapping(
                    series.times.as_ptr(),
                    out_times,
                    series.times.len(),
                );
            }
            if !out_values.is_null() {
                std::ptr::copy_nonoverlapping(
                    series.values.as_ptr(),
                    out_values,
                    series.values.len(),
                );
            }
        }
        QpdynStatus::Ok
    })
}

/// Time and value of the maximum of probe series `probe`.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_probe_peak(
    result: *const QpdynDiffusionResult,
    probe: usize,
    out_time: *mut f64,
    out_value: *mut f64,
) -> QpdynStatus {
    guard(|| {
        require!(result);
        require!(out_time);
        require!(out_value);
        let probes = unsafe { &(*result).probes };
        let Some(series) = probes.get(probe) else {
            return invalid(format!("probe index {probe} out of range 0..{}", probes.len()));
        };
        let (t, v) = series.peak();
        unsafe {
            *out_time = t;
            *out_value = v;
        }
        QpdynStatus::Ok
    })
}

/// Number of captured field snapshots in a result.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_snapshot_count(
    result: *const QpdynDiffusionResult,
    out: *mut usize,
) -> QpdynStatus {
    guard(|| {
        require!(result);
        require!(out);
        unsafe { *out = (*result).snapshots.len() };
        QpdynStatus::Ok
    })
}

/// Shape and capture time of snapshot `snapshot`. Any output pointer
/// may be null to skip it.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_snapshot_info(
    result: *const QpdynDiffusionResult,
    snapshot: usize,
    out_time: *mut f64,
    out_nx: *mut usize,
    out_ny: *mut usize,
    out_cell_size: *mut f64,
) -> QpdynStatus {
    guard(|| {
        require!(result);
        let snapshots = unsafe { &(*result).snapshots };
        let Some(field) = snapshots.get(snapshot) else {
            return invalid(format!(
                "snapshot index {snapshot} out of range 0..{}",
                snapshots.len()
            ));
        };
        unsafe {
            if !out_time.is_null() {
                *out_time = field.time_stamp;
            }
            if !out_nx.is_null() {
                *out_nx = field.nx;
            }
            if !out_ny.is_null() {
                *out_ny = field.ny;
            }
            if !out_cell_size.is_null() {
                *out_cell_size = field.cell_size;
            }
        }
        QpdynStatus::Ok
    })
}

/// Copy snapshot `snapshot` into a caller buffer of nx·ny doubles,
/// row-major with x fastest.
#[no_mangle]
pub extern "C" fn qpdyn_diffusion_snapshot_values(
    result: *const QpdynDiffusionResult,
    snapshot: usize,
    out_values: *mut f64,
) -> QpdynStatus {
    guard(|| {
        require!(result);
        require!(out_values);
        let snapshots = unsafe { &(*result).snapshots };
        let Some(field) = snapshots.get(snapshot) else {
            return invalid(format!(
                "snapshot index {snapshot} out of range 0..{}",
                snapshots.len()
            ));
        };
        unsafe {
            std::ptr::copy_nonoverlapping(
                field.values.as_ptr(),
                out_values,
                field.values.len(),
            );
        }
        QpdynStatus::Ok
    })
}

/// Calibrate the phonon model against measured densities.
///
/// `times`/`x_qp` are `len` samples; `sigma` (nullable) gives 1-σ
/// uncertainties for 1/σ² weighting. `fixed_mask` (nullable) holds 6
/// bytes, nonzero meaning the parameter stays at its value in
/// `initial`; the default frees everything except the recombination
/// rate. `seed` (nullable) overrides the restart-jitter stream; the
/// same seed and inputs always reproduce the same result.
/// `out_sigma` (nullable) receives 6 per-parameter uncertainties
/// (zero for fixed or unavailable). `out_converged` receives 1 when
/// the optimizer met its tolerance. Box bounds are a factor 10³
/// around `initial`.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub extern "C" fn qpdyn_fit_phonon_model(
    initial: *const QpdynPhononParams,
    times: *const f64,
    x_qp: *const f64,
    sigma: *const f64,
    len: usize,
    fixed_mask: *const u8,
    seed: *const u64,
    out_params: *mut *mut QpdynPhononParams,
    out_sigma: *mut f64,
    out_converged: *mut i32,
) -> QpdynStatus {
    guard(|| {
        require!(initial);
        require!(times);
        require!(x_qp);
        require!(out_params);
        require!(out_converged);
        if len == 0 {
            return invalid("len must be > 0");
        }
        let t = unsafe { input_slice(times, len) };
        let v = unsafe { input_slice(x_qp, len) };
        let s = if sigma.is_null() {
            None
        } else {
            Some(unsafe { input_slice(sigma, len) })
        };
        let data: Vec<QpDensityPoint> = (0..len)
            .map(|i| QpDensityPoint {
                recovery_time: t[i],
                x_qp: v[i],
                uncertainty: s.map(|s| s[i]).unwrap_or(0.0),
            })
            .collect();
        let mask = if fixed_mask.is_null() {
            default_fixed_mask()
        } else {
            let bytes = unsafe { std::slice::from_raw_parts(fixed_mask, PARAM_COUNT) };
            let mut mask = [false; PARAM_COUNT];
            for (m, &b) in mask.iter_mut().zip(bytes) {
                *m = b != 0;
            }
            mask
        };
        let initial_params = unsafe { (*initial).0 };
        let problem = FitProblem {
            data,
            initial_params,
            bounds: default_bounds(&initial_params),
            fixed_mask: mask,
            averaging: None,
        };
        let result = if seed.is_null() {
            fit_phonon_model(&problem)
        } else {
            fit_phonon_model_seeded(&problem, unsafe { *seed })
        };
        match result {
            Ok(fit) => {
                unsafe {
                    *out_params = Box::into_raw(Box::new(QpdynPhononParams(fit.params)));
                    *out_converged = i32::from(fit.converged);
                    if !out_sigma.is_null() {
                        let sigmas = fit.uncertainty.unwrap_or([0.0; PARAM_COUNT]);
                        std::ptr::copy_nonoverlapping(sigmas.as_ptr(), out_sigma, PARAM_COUNT);
                    }
                }
                QpdynStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
