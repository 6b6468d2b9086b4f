//! Command-line front end: quasiparticle density extraction, the 2D
//! diffusion scenario, the phonon-mediated injection model, model
//! calibration, propagation timescales, and the converter voltage
//! check. Every command writes its outputs atomically into one
//! directory and finishes with a run manifest.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use qpdyn::calibrate::{
    bounds_around, default_bounds, default_fixed_mask, fit_phonon_model, fit_phonon_model_seeded,
    params_to_array, AveragingSpec, FitProblem, FitResult, PARAM_COUNT, PARAM_NAMES,
};
use qpdyn::config::ScenarioConfig;
use qpdyn::csvio::{self, ExtractInput};
use qpdyn::diffusion;
use qpdyn::error::{QpError, Result};
use qpdyn::manifest::RunManifest;
use qpdyn::observables::{
    compute_c, estimate_timescale, fit_t1, gamma_to_xqp, window_average_at, OperatingRegionCheck,
    PropagationMechanism, QpDensityPoint, OPERATING_REGION_TOLERANCE,
};
use qpdyn::phonon::{model_curve, ModelCurve};

/// Physical units of each fit parameter, in fit order.
const PARAM_UNITS: [&str; PARAM_COUNT] = ["1/s", "1/s", "s", "", "1/s", "s"];

#[derive(Parser)]
#[command(
    name = "qpdyn",
    version,
    about = "Quasiparticle dynamics simulator and calibration toolkit \
             for a converter-qubit chip"
)]
struct Cli {
    /// JSON scenario configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; falls back to the config io.out_dir, then
    /// $QPDYN_OUT_DIR, then ./out.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed for stochastic pieces (fit restart jitter).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Emit a machine-readable JSON summary on stdout.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert measured relaxation data into quasiparticle densities.
    Extract {
        /// CSV of (t_r_seconds, t1_seconds[, sigma]) rows, or of raw
        /// decay curves (t_r_seconds, t_d_seconds, p1) fitted here.
        input: PathBuf,
        /// Baseline relaxation time defining the zero-density rate, s.
        #[arg(long, value_name = "SECONDS")]
        baseline_t1: Option<f64>,
    },
    /// Run the 2D diffusion scenario; write field snapshots and probe
    /// time series.
    Diffuse {
        /// Trapping time constant (reciprocal of the trapping rate), s.
        #[arg(long, value_name = "SECONDS")]
        trapping_time: Option<f64>,
        /// Grid resolution override, e.g. 1000x500.
        #[arg(long, value_name = "NXxNY", value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
    },
    /// Evaluate the phonon-mediated injection model curve.
    Phonon {
        /// Measurement-window length applied to the curve, s.
        #[arg(long, value_name = "SECONDS")]
        t_avg: Option<f64>,
        /// Energy transfer fraction into the qubit cell.
        #[arg(long, value_name = "FRACTION")]
        alpha: Option<f64>,
    },
    /// Fit the phonon model to extracted density data.
    Fit {
        /// CSV of (t_r_seconds, x_qp[, sigma]) rows.
        data: PathBuf,
    },
    /// Compare converter-to-qubit propagation timescales.
    Timescales,
    /// Check converter DC voltages against the locked value Φ0·f.
    SfqCheck {
        /// CSV of (drive_freq_hz, v_avg_volts) rows.
        input: PathBuf,
    },
}

fn parse_grid(text: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = text
        .split_once(|c| c == 'x' || c == 'X')
        .ok_or_else(|| format!("expected NXxNY, got {text:?}"))?;
    let nx = a.trim().parse().map_err(|_| format!("bad grid width {a:?}"))?;
    let ny = b.trim().parse().map_err(|_| format!("bad grid height {b:?}"))?;
    Ok((nx, ny))
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}

/// 2 for numerical failures a retry with different settings might fix,
/// 1 for usage, input, and environment problems.
fn exit_code(err: &QpError) -> i32 {
    match err {
        QpError::NonConvergence(_)
        | QpError::InstabilityDetected { .. }
        | QpError::QuadratureFailure { .. } => 2,
        _ => 1,
    }
}

struct Ctx {
    config: ScenarioConfig,
    out_dir: PathBuf,
    json: bool,
    seed: Option<u64>,
}

impl Ctx {
    fn write_manifest(&self, command: &str, outputs: Vec<String>) -> Result<()> {
        RunManifest::new(command, self.config.sha256(), outputs).write(&self.out_dir)
    }
}

fn run(cli: Cli) -> Result<i32> {
    let mut config = match &cli.config {
        Some(path) => ScenarioConfig::from_path(path)?,
        None => ScenarioConfig::default(),
    };

    // Fold command-line overrides into the configuration first so the
    // manifest hash identifies what actually ran.
    match &cli.command {
        Command::Extract { baseline_t1, .. } => {
            if let Some(t1) = baseline_t1 {
                config.constants.baseline_t1_s = Some(*t1);
            }
        }
        Command::Diffuse {
            trapping_time,
            grid,
        } => {
            if let Some(tt) = trapping_time {
                config.diffusion.trapping_time_s = Some(*tt);
            }
            if let Some((nx, ny)) = grid {
                config.diffusion.grid_nx = Some(*nx);
                config.diffusion.grid_ny = Some(*ny);
            }
        }
        Command::Phonon { t_avg, alpha } => {
            if let Some(t) = t_avg {
                config.phonon.t_avg_s = Some(*t);
            }
            if let Some(a) = alpha {
                config.phonon.transfer_fraction = Some(*a);
            }
        }
        _ => {}
    }

    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.io.out_dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os("QPDYN_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = Ctx {
        config,
        out_dir,
        json: cli.json,
        seed: cli.seed,
    };

    match cli.command {
        Command::Extract { input, .. } => cmd_extract(&ctx, &input),
        Command::Diffuse { .. } => cmd_diffuse(&ctx),
        Command::Phonon { .. } => cmd_phonon(&ctx),
        Command::Fit { data } => cmd_fit(&ctx, &data),
        Command::Timescales => cmd_timescales(&ctx),
        Command::SfqCheck { input } => cmd_sfq_check(&ctx, &input),
    }
}

fn cmd_extract(ctx: &Ctx, input: &Path) -> Result<i32> {
    let consts = ctx.config.physical_constants()?;
    let baseline_t1 = ctx.config.baseline_t1();
    if !(baseline_t1 > 0.0) {
        return Err(QpError::InvalidParameter {
            field: "baseline_t1",
            reason: format!("must be > 0, got {baseline_t1:e}"),
        });
    }
    let c = compute_c(&consts);
    let gamma0 = 1.0 / baseline_t1;

    let points: Vec<QpDensityPoint> = match csvio::read_extract_input(input)? {
        ExtractInput::Samples(samples) => {
            for (k, s) in samples.iter().enumerate() {
                if !(s.t1 > 0.0) || s.t1_uncertainty < 0.0 {
                    return Err(QpError::InvalidInput(format!(
                        "row {}: need t1 > 0 and sigma >= 0",
                        k + 1
                    )));
                }
            }
            samples
                .iter()
                .map(|s| QpDensityPoint {
                    recovery_time: s.recovery_time,
                    x_qp: gamma_to_xqp(s.t1, gamma0, &consts),
                    // 1-σ propagation through x = (1/t1 − γ0)/C.
                    uncertainty: s.t1_uncertainty / (s.t1 * s.t1) / c,
                })
                .collect()
        }
        ExtractInput::RawCurves(curves) => curves
            .into_iter()
            .map(|(t_r, curve)| {
                let fit = fit_t1(&curve.validated()?)?;
                Ok(QpDensityPoint {
                    recovery_time: t_r,
                    x_qp: gamma_to_xqp(fit.t1, gamma0, &consts),
                    uncertainty: fit.t1_uncertainty / (fit.t1 * fit.t1) / c,
                })
            })
            .collect::<Result<_>>()?,
    };

    csvio::write_density_points(&ctx.out_dir.join("xqp.csv"), &points)?;
    ctx.write_manifest("extract", vec!["xqp.csv".into()])?;

    if ctx.json {
        print_json(&json!({
            "c_per_s": c,
            "gamma0_per_s": gamma0,
            "baseline_t1_s": baseline_t1,
            "points": points.len(),
            "output": ctx.out_dir.join("xqp.csv"),
        }));
    } else {
        println!("density conversion factor C = {c:e} 1/s");
        println!("baseline rate gamma0 = {gamma0:e} 1/s (T1 = {baseline_t1:e} s)");
        println!(
            "wrote {} points to {}",
            points.len(),
            ctx.out_dir.join("xqp.csv").display()
        );
    }
    Ok(0)
}

fn cmd_diffuse(ctx: &Ctx) -> Result<i32> {
    let scenario = ctx.config.diffusion_scenario()?;
    let dt = diffusion::stable_dt(&scenario);
    let (snapshots, probes) = diffusion::run(&scenario)?;

    let mut outputs = Vec::new();
    for (i, field) in snapshots.iter().enumerate() {
        let name = format!("snapshot_{i}_t{:e}s.csv", field.time_stamp);
        csvio::write_snapshot(&ctx.out_dir.join(&name), field)?;
        outputs.push(name);
    }
    for (i, probe) in probes.iter().enumerate() {
        let name = format!(
            "probe_{i}_x{:e}m_y{:e}m.csv",
            probe.position.0, probe.position.1
        );
        csvio::write_probe_series(&ctx.out_dir.join(&name), probe)?;
        outputs.push(name);
    }
    ctx.write_manifest("diffuse", outputs.clone())?;

    if ctx.json {
        let peaks: Vec<_> = probes
            .iter()
            .map(|p| {
                let (t, v) = p.peak();
                json!({
                    "x_m": p.position.0,
                    "y_m": p.position.1,
                    "peak_time_s": t,
                    "peak_x_qp": v,
                })
            })
            .collect();
        print_json(&json!({
            "grid": [scenario.grid_nx, scenario.grid_ny],
            "cell_size_m": scenario.cell_size(),
            "stable_dt_s": dt,
            "outputs": outputs,
            "probe_peaks": peaks,
        }));
    } else {
        println!(
            "grid {}x{}, cell {:e} m, stable step {:e} s",
            scenario.grid_nx,
            scenario.grid_ny,
            scenario.cell_size(),
            dt
        );
        for name in &outputs {
            println!("wrote {}", ctx.out_dir.join(name).display());
        }
        for probe in &probes {
            let (t, v) = probe.peak();
            println!(
                "probe ({:e}, {:e}) m: peak {v:e} at t = {t:e} s",
                probe.position.0, probe.position.1
            );
        }
    }
    Ok(0)
}

fn cmd_phonon(ctx: &Ctx) -> Result<i32> {
    let params = ctx.config.phonon_params()?;
    let times = ctx.config.phonon_curve_times(&params)?;
    let t_avg = ctx.config.phonon.t_avg_s.unwrap_or(0.0);
    if t_avg < 0.0 {
        return Err(QpError::InvalidParameter {
            field: "t_avg",
            reason: format!("must be >= 0, got {t_avg:e}"),
        });
    }

    let curve = if t_avg > 0.0 {
        let weighting = ctx.config.phonon_weighting()?;
        // Extend the support grid backward so every averaging window
        // is covered; the model is identically zero before the phonon
        // onset, so the extension costs nothing physical.
        let step = if times.len() >= 2 {
            times[1] - times[0]
        } else {
            t_avg / 40.0
        };
        let lead = (t_avg / step).ceil() as usize + 1;
        let mut support: Vec<f64> = (0..lead)
            .map(|i| times[0] - (lead - i) as f64 * step)
            .collect();
        support.extend_from_slice(&times);
        let full = model_curve(&params, &support)?;
        let values = window_average_at(&full.times, &full.values, &times, t_avg, weighting)?;
        ModelCurve {
            times,
            values,
            params,
        }
    } else {
        model_curve(&params, &times)?
    };

    csvio::write_model_curve(&ctx.out_dir.join("curve.csv"), &curve)?;
    ctx.write_manifest("phonon", vec!["curve.csv".into()])?;

    let (peak_t, peak_v) = curve
        .times
        .iter()
        .zip(&curve.values)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(&t, &v)| (t, v))
        .unwrap_or((0.0, 0.0));
    if ctx.json {
        print_json(&json!({
            "points": curve.times.len(),
            "t_avg_s": t_avg,
            "peak_time_s": peak_t,
            "peak_x_qp": peak_v,
            "output": ctx.out_dir.join("curve.csv"),
        }));
    } else {
        println!(
            "wrote {} points to {}",
            curve.times.len(),
            ctx.out_dir.join("curve.csv").display()
        );
        println!("peak x_qp = {peak_v:e} at t_r = {peak_t:e} s (t_avg = {t_avg:e} s)");
    }
    Ok(0)
}

fn render_fit_report(problem: &FitProblem, result: &FitResult) -> String {
    let values = params_to_array(&result.params);
    let mut text = String::new();
    text.push_str("phonon model fit\n");
    text.push_str(&format!("  converged: {}\n", result.converged));
    text.push_str(&format!("  objective evaluations: {}\n", result.iterations));
    text.push_str(&format!(
        "  weighted residual sum of squares: {:e}\n\n",
        result.residual_norm
    ));
    text.push_str(&format!(
        "  {:<20}  {:<24}  {:<24}  {:<4}  status\n",
        "parameter", "value", "1-sigma", "unit"
    ));
    for i in 0..PARAM_COUNT {
        let sigma = match (&result.uncertainty, problem.fixed_mask[i]) {
            (_, true) => "-".to_string(),
            (Some(u), false) => format!("{:e}", u[i]),
            (None, false) => "n/a".to_string(),
        };
        text.push_str(&format!(
            "  {:<20}  {:<24}  {:<24}  {:<4}  {}\n",
            PARAM_NAMES[i],
            format!("{:e}", values[i]),
            sigma,
            PARAM_UNITS[i],
            if problem.fixed_mask[i] { "fixed" } else { "free" },
        ));
    }
    text
}

fn fit_json(problem: &FitProblem, result: &FitResult) -> serde_json::Value {
    let values = params_to_array(&result.params);
    let mut params = serde_json::Map::new();
    for i in 0..PARAM_COUNT {
        params.insert(
            PARAM_NAMES[i].to_string(),
            json!({
                "value": values[i],
                "sigma": result.uncertainty.as_ref().map(|u| u[i]),
                "unit": PARAM_UNITS[i],
                "fixed": problem.fixed_mask[i],
            }),
        );
    }
    json!({
        "converged": result.converged,
        "evaluations": result.iterations,
        "residual_norm": result.residual_norm,
        "params": params,
    })
}

fn cmd_fit(ctx: &Ctx, data_path: &Path) -> Result<i32> {
    let data = csvio::read_density_points(data_path)?;
    let initial_params = ctx.config.phonon_params()?;
    let bounds = match ctx.config.fit.bound_factor {
        Some(factor) => bounds_around(&initial_params, factor)?,
        None => default_bounds(&initial_params),
    };
    let fixed_mask = match &ctx.config.fit.free_params {
        None => default_fixed_mask(),
        Some(names) => {
            let mut mask = [true; PARAM_COUNT];
            for name in names {
                let idx = PARAM_NAMES
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| QpError::InvalidParameter {
                        field: "free_params",
                        reason: format!(
                            "unknown parameter {name:?}; known: {}",
                            PARAM_NAMES.join(", ")
                        ),
                    })?;
                mask[idx] = false;
            }
            mask
        }
    };
    let t_avg = ctx.config.fit.t_avg_s.unwrap_or(0.0);
    let averaging = if t_avg > 0.0 {
        Some(AveragingSpec {
            t_avg,
            weighting: ctx.config.fit_weighting()?,
        })
    } else {
        None
    };

    let problem = FitProblem {
        data,
        initial_params,
        bounds,
        fixed_mask,
        averaging,
    }
    .validated()?;
    let result = match ctx.seed {
        Some(seed) => fit_phonon_model_seeded(&problem, seed)?,
        None => fit_phonon_model(&problem)?,
    };

    let report = render_fit_report(&problem, &result);
    let json_value = fit_json(&problem, &result);
    csvio::atomic_write(&ctx.out_dir.join("report.txt"), report.as_bytes())?;
    let mut json_text = serde_json::to_string_pretty(&json_value)
        .map_err(|e| QpError::Io(format!("fit.json: {e}")))?;
    json_text.push('\n');
    csvio::atomic_write(&ctx.out_dir.join("fit.json"), json_text.as_bytes())?;
    ctx.write_manifest("fit", vec!["report.txt".into(), "fit.json".into()])?;

    if ctx.json {
        print_json(&json_value);
    } else {
        print!("{report}");
    }
    Ok(if result.converged { 0 } else { 2 })
}

fn cmd_timescales(ctx: &Ctx) -> Result<i32> {
    let geometry = ctx.config.geometry_params()?;
    let phonon = ctx.config.phonon_params()?;
    let estimates = [
        PropagationMechanism::Photon,
        PropagationMechanism::PhononMediated,
        PropagationMechanism::DirectDiffusion,
    ]
    .map(|m| estimate_timescale(m, &geometry));

    csvio::write_timescales(&ctx.out_dir.join("timescales.csv"), &estimates)?;
    ctx.write_manifest("timescales", vec!["timescales.csv".into()])?;

    let phonon_transit = estimates
        .iter()
        .find(|e| e.mechanism == PropagationMechanism::PhononMediated)
        .map(|e| e.transit_time)
        .unwrap_or(f64::NAN);
    let lag = phonon.propagation_delay;
    if ctx.json {
        let rows: Vec<_> = estimates
            .iter()
            .map(|e| {
                json!({
                    "mechanism": e.mechanism.label(),
                    "transit_time_s": e.transit_time,
                    "effective_diffusivity_m2_per_s": e.effective_diffusivity,
                })
            })
            .collect();
        print_json(&json!({
            "timescales": rows,
            "propagation_delay_s": lag,
            "phonon_transit_over_delay": phonon_transit / lag,
        }));
    } else {
        for e in &estimates {
            match e.effective_diffusivity {
                Some(d) => println!(
                    "{:<18} {:e} s (effective diffusivity {d:e} m²/s)",
                    e.mechanism.label(),
                    e.transit_time
                ),
                None => println!("{:<18} {:e} s", e.mechanism.label(), e.transit_time),
            }
        }
        println!(
            "phonon-mediated transit / configured lag t_p = {:e} / {:e} = {:.3}",
            phonon_transit,
            lag,
            phonon_transit / lag
        );
    }
    Ok(0)
}

fn cmd_sfq_check(ctx: &Ctx, input: &Path) -> Result<i32> {
    let consts = ctx.config.physical_constants()?;
    let rows = csvio::read_voltage_table(input)?;
    for (k, &(f, _)) in rows.iter().enumerate() {
        if !(f > 0.0) {
            return Err(QpError::InvalidInput(format!(
                "row {}: drive_freq_hz must be > 0",
                k + 1
            )));
        }
    }
    let checks: Vec<OperatingRegionCheck> = rows
        .iter()
        .map(|&(f, v)| OperatingRegionCheck::evaluate(v, f, OPERATING_REGION_TOLERANCE, &consts))
        .collect();

    // Through-origin least squares; V/Hz scales to µV/GHz by 1e15.
    let num: f64 = rows.iter().map(|&(f, v)| f * v).sum();
    let den: f64 = rows.iter().map(|&(f, _)| f * f).sum();
    let slope = num / den;
    let passed = checks.iter().filter(|c| c.within_band).count();

    csvio::write_sfq_check(&ctx.out_dir.join("sfq_check.csv"), &checks)?;
    ctx.write_manifest("sfq-check", vec!["sfq_check.csv".into()])?;

    if ctx.json {
        let row_values: Vec<_> = checks
            .iter()
            .map(|c| {
                json!({
                    "drive_freq_hz": c.drive_frequency,
                    "v_avg_volts": c.measured_voltage,
                    "v_expected_volts": c.expected_voltage,
                    "deviation_fraction": c.deviation_fraction,
                    "within_band": c.within_band,
                })
            })
            .collect();
        print_json(&json!({
            "rows": row_values,
            "passed": passed,
            "total": checks.len(),
            "slope_v_per_hz": slope,
            "slope_uv_per_ghz": slope * 1e15,
            "tolerance_fraction": OPERATING_REGION_TOLERANCE,
        }));
    } else {
        for c in &checks {
            println!(
                "f = {:e} Hz: measured {:e} V, expected {:e} V, deviation {:.3}% -> {}",
                c.drive_frequency,
                c.measured_voltage,
                c.expected_voltage,
                100.0 * c.deviation_fraction,
                if c.within_band { "pass" } else { "FAIL" }
            );
        }
        println!(
            "{passed}/{} rows within ±{:.1}%; fitted slope {:.4} µV/GHz",
            checks.len(),
            100.0 * OPERATING_REGION_TOLERANCE,
            slope * 1e15
        );
    }
    Ok(0)
}

fn print_json(value: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("json value serializes")
    );
}
