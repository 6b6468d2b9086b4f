//! Explicit finite-difference solver for the 2D quasiparticle
//! reaction-diffusion equation on the chip footprint:
//!
//! ```text
//! ∂x/∂t = D·∇²x − r·x² − s·x + g(position, t)
//! ```
//!
//! Forward-time centered-space (FTCS) update with a 5-point Laplacian,
//! zero-flux boundaries on all four edges, and a rectangular injection
//! region active during the drive window [−t_drive, 0). The scheme is
//! run at 0.4× the diffusive stability limit.
//!
//! Cells are square; the field value for cell (ix, iy) lives at the
//! cell center ((ix + 0.5)·h, (iy + 0.5)·h), row-major in x.

use crate::error::{QpError, Result};
use crate::params::GeometryParams;

/// Axis-aligned rectangle, m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn x_max(&self) -> f64 {
        self.x_min + self.width
    }
    pub fn y_max(&self) -> f64 {
        self.y_min + self.height
    }
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max() && y >= self.y_min && y <= self.y_max()
    }
}

/// Full description of one diffusion run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionScenario {
    pub geometry: GeometryParams,
    /// Cell counts along x and y; cells must come out square.
    pub grid_nx: usize,
    pub grid_ny: usize,
    /// Quasiparticle diffusivity, m²/s.
    pub diffusivity: f64,
    /// Quadratic recombination rate, 1/s.
    pub recombination_rate: f64,
    /// Linear trapping rate, 1/s; uniform over the film.
    pub trapping_rate: f64,
    /// Injection footprint of the converter.
    pub injection_region: Rect,
    /// Generation rate inside the injection region while driving, 1/s.
    pub injection_rate: f64,
    /// Drive duration; injection is active on [−duration, 0).
    pub injection_duration: f64,
    /// Final time of the run, s.
    pub simulation_end: f64,
    /// Readout positions, m.
    pub probe_points: Vec<(f64, f64)>,
    /// Probe sampling interval, s; at most 0.5 µs.
    pub probe_interval: f64,
    /// Times at which the full field is captured, s.
    pub snapshot_times: Vec<f64>,
}

/// Probe sampling interval ceiling, s.
pub const MAX_PROBE_INTERVAL: f64 = 0.5e-6;

impl DiffusionScenario {
    /// Grid spacing, m (square cells).
    pub fn cell_size(&self) -> f64 {
        self.geometry.domain_length_x / self.grid_nx as f64
    }

    pub fn validated(self) -> Result<Self> {
        self.geometry.validated()?;
        if self.grid_nx < 4 || self.grid_ny < 4 {
            return Err(QpError::InvalidParameter {
                field: "grid",
                reason: format!("need at least 4×4 cells, got {}×{}", self.grid_nx, self.grid_ny),
            });
        }
        let hx = self.geometry.domain_length_x / self.grid_nx as f64;
        let hy = self.geometry.domain_length_y / self.grid_ny as f64;
        if (hx - hy).abs() > 1e-9 * hx {
            return Err(QpError::InvalidParameter {
                field: "grid",
                reason: format!("cells must be square: hx = {hx:e} m, hy = {hy:e} m"),
            });
        }
        if !(self.diffusivity > 0.0) {
            return Err(QpError::InvalidParameter {
                field: "diffusivity",
                reason: format!("must be > 0, got {:e}", self.diffusivity),
            });
        }
        for (field, v) in [
            ("recombination_rate", self.recombination_rate),
            ("trapping_rate", self.trapping_rate),
            ("injection_rate", self.injection_rate),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(QpError::InvalidParameter {
                    field,
                    reason: format!("must be ≥ 0 and finite, got {v:e}"),
                });
            }
        }
        if !(self.injection_duration > 0.0) {
            return Err(QpError::InvalidParameter {
                field: "injection_duration",
                reason: "must be > 0".into(),
            });
        }
        if !(self.simulation_end > -self.injection_duration) {
            return Err(QpError::InvalidParameter {
                field: "simulation_end",
                reason: "run must extend past its start".into(),
            });
        }
        if !(self.probe_interval > 0.0 && self.probe_interval <= MAX_PROBE_INTERVAL) {
            return Err(QpError::InvalidParameter {
                field: "probe_interval",
                reason: format!(
                    "must be in (0, {MAX_PROBE_INTERVAL:e}] s, got {:e}",
                    self.probe_interval
                ),
            });
        }
        let rect = &self.injection_region;
        if rect.width <= 0.0
            || rect.height <= 0.0
            || rect.x_min < 0.0
            || rect.y_min < 0.0
            || rect.x_max() > self.geometry.domain_length_x
            || rect.y_max() > self.geometry.domain_length_y
        {
            return Err(QpError::InvalidParameter {
                field: "injection_region",
                reason: "rectangle must lie inside the domain with positive area".into(),
            });
        }
        if rect.width.min(rect.height) < 2.0 * hx * (1.0 - 1e-9) {
            return Err(QpError::InvalidParameter {
                field: "injection_region",
                reason: format!(
                    "grid too coarse: short side {:e} m spans under 2 cells of {hx:e} m",
                    rect.width.min(rect.height)
                ),
            });
        }
        for &(px, py) in &self.probe_points {
            if px < 0.0
                || px > self.geometry.domain_length_x
                || py < 0.0
                || py > self.geometry.domain_length_y
            {
                return Err(QpError::InvalidParameter {
                    field: "probe_points",
                    reason: format!("probe ({px:e}, {py:e}) outside the domain"),
                });
            }
        }
        for &t in &self.snapshot_times {
            if t < -self.injection_duration || t > self.simulation_end {
                return Err(QpError::InvalidParameter {
                    field: "snapshot_times",
                    reason: format!("snapshot at {t:e} s outside the run"),
                });
            }
        }
        Ok(self)
    }
}

impl Default for DiffusionScenario {
    /// Reference run: 5 mm × 2.5 mm footprint at h = 10 µm, trapping
    /// 1/(10 µs), no recombination, 4e4 s⁻¹ injection into a
    /// 100 µm × 40 µm patch at the left-edge midline for 25 µs,
    /// probes on the converter-qubit line at 0/0.1/0.5/1 mm from the
    /// injection center, snapshots at −24.99/52/120 µs.
    fn default() -> Self {
        let geometry = GeometryParams::default();
        let mid_y = geometry.domain_length_y / 2.0;
        let injection_region = Rect {
            x_min: 0.0,
            y_min: mid_y - 20e-6,
            width: 100e-6,
            height: 40e-6,
        };
        let center_x = injection_region.x_min + injection_region.width / 2.0;
        Self {
            geometry,
            grid_nx: 500,
            grid_ny: 250,
            diffusivity: geometry.qp_diffusivity,
            recombination_rate: 0.0,
            trapping_rate: 1.0 / 10e-6,
            injection_region,
            injection_rate: 4e4,
            injection_duration: 25e-6,
            simulation_end: 120e-6,
            probe_points: [0.0, 0.1e-3, 0.5e-3, 1.0e-3]
                .iter()
                .map(|d| (center_x + d, mid_y))
                .collect(),
            probe_interval: MAX_PROBE_INTERVAL,
            snapshot_times: vec![-24.99e-6, 52e-6, 120e-6],
        }
    }
}

/// Largest allowed explicit step: 0.4 × h²/(4·D).
pub fn stable_dt(scenario: &DiffusionScenario) -> f64 {
    let h = scenario.cell_size();
    0.4 * h * h / (4.0 * scenario.diffusivity)
}

/// One captured field.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    /// Capture time, s.
    pub time_stamp: f64,
    pub nx: usize,
    pub ny: usize,
    /// Grid spacing, m.
    pub cell_size: f64,
    /// Row-major in x: values[iy·nx + ix].
    pub values: Vec<f64>,
}

impl DensityField {
    pub fn value_at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    /// Physical coordinates of a cell center, m.
    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            (ix as f64 + 0.5) * self.cell_size,
            (iy as f64 + 0.5) * self.cell_size,
        )
    }
}

/// Domain integral of the field: Σ values × h².
pub fn total_xqp(field: &DensityField) -> f64 {
    let cell_area = field.cell_size * field.cell_size;
    field.values.iter().sum::<f64>() * cell_area
}

/// Sampled density history at one probe position.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTimeSeries {
    /// Probe position, m.
    pub position: (f64, f64),
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ProbeTimeSeries {
    /// (time, value) of the series maximum.
    pub fn peak(&self) -> (f64, f64) {
        let mut best = (self.times[0], self.values[0]);
        for (&t, &v) in self.times.iter().zip(&self.values) {
            if v > best.1 {
                best = (t, v);
            }
        }
        best
    }
}

/// Owned solver state: the current field, its time, and the scenario.
#[derive(Debug, Clone)]
pub struct SolverState {
    scenario: DiffusionScenario,
    h: f64,
    time: f64,
    values: Vec<f64>,
    scratch: Vec<f64>,
    /// Cell-index bounds of the injection region (inclusive), from
    /// cell-center-in-rectangle membership.
    injection_ix: (usize, usize),
    injection_iy: (usize, usize),
}

fn center_index_range(lo: f64, hi: f64, h: f64, n: usize) -> (usize, usize) {
    // First and last cell whose center falls inside [lo, hi].
    let first = ((lo / h - 0.5).ceil().max(0.0)) as usize;
    let last = ((hi / h - 0.5).floor()).min(n as f64 - 1.0).max(0.0) as usize;
    (first, last)
}

impl SolverState {
    /// Zero field at the start of the drive window.
    pub fn new(scenario: DiffusionScenario) -> Result<Self> {
        let scenario = scenario.validated()?;
        let h = scenario.cell_size();
        let n = scenario.grid_nx * scenario.grid_ny;
        let rect = scenario.injection_region;
        let injection_ix = center_index_range(rect.x_min, rect.x_max(), h, scenario.grid_nx);
        let injection_iy = center_index_range(rect.y_min, rect.y_max(), h, scenario.grid_ny);
        Ok(Self {
            time: -scenario.injection_duration,
            values: vec![0.0; n],
            scratch: vec![0.0; n],
            injection_ix,
            injection_iy,
            h,
            scenario,
        })
    }

    pub fn scenario(&self) -> &DiffusionScenario {
        &self.scenario
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Add density to one cell; test and oracle hook for point
    /// releases.
    pub fn deposit(&mut self, ix: usize, iy: usize, amount: f64) {
        self.values[iy * self.scenario.grid_nx + ix] += amount;
    }

    /// Snapshot of the current field.
    pub fn field(&self) -> DensityField {
        DensityField {
            time_stamp: self.time,
            nx: self.scenario.grid_nx,
            ny: self.scenario.grid_ny,
            cell_size: self.h,
            values: self.values.clone(),
        }
    }

    /// Field value at a physical position by bilinear interpolation
    /// between the four surrounding cell centers (clamped at edges).
    /// Interpolation keeps the readout at the same physical point
    /// across grid resolutions, which containing-cell readout does
    /// not.
    pub fn value_at_position(&self, x: f64, y: f64) -> f64 {
        let nx = self.scenario.grid_nx;
        let ny = self.scenario.grid_ny;
        let fx = (x / self.h - 0.5).clamp(0.0, (nx - 1) as f64);
        let fy = (y / self.h - 0.5).clamp(0.0, (ny - 1) as f64);
        let ix = (fx as usize).min(nx - 2);
        let iy = (fy as usize).min(ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let v = |i: usize, j: usize| self.values[j * nx + i];
        (1.0 - tx) * (1.0 - ty) * v(ix, iy)
            + tx * (1.0 - ty) * v(ix + 1, iy)
            + (1.0 - tx) * ty * v(ix, iy + 1)
            + tx * ty * v(ix + 1, iy + 1)
    }

    fn injecting(&self) -> bool {
        self.time >= -self.scenario.injection_duration && self.time < 0.0
    }

    /// Advance one explicit step. The generation term is evaluated at
    /// the step's start time, consistent with the forward-Euler
    /// update.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let cap = stable_dt(&self.scenario);
        if !(dt > 0.0 && dt <= cap * (1.0 + 1e-12)) {
            return Err(QpError::InvalidParameter {
                field: "dt",
                reason: format!("step {dt:e} s outside (0, {cap:e}] s"),
            });
        }
        let nx = self.scenario.grid_nx;
        let ny = self.scenario.grid_ny;
        let lambda = self.scenario.diffusivity * dt / (self.h * self.h);
        let r = self.scenario.recombination_rate;
        let s = self.scenario.trapping_rate;

        for iy in 0..ny {
            let row = iy * nx;
            let up = if iy + 1 < ny { row + nx } else { row };
            let down = if iy > 0 { row - nx } else { row };
            for ix in 0..nx {
                let c = self.values[row + ix];
                let left = self.values[row + if ix > 0 { ix - 1 } else { ix }];
                let right = self.values[row + if ix + 1 < nx { ix + 1 } else { ix }];
                let lap = left + right + self.values[up + ix] + self.values[down + ix] - 4.0 * c;
                self.scratch[row + ix] = c + lambda * lap - dt * (r * c * c + s * c);
            }
        }
        if self.injecting() {
            let add = self.scenario.injection_rate * dt;
            for iy in self.injection_iy.0..=self.injection_iy.1 {
                for ix in self.injection_ix.0..=self.injection_ix.1 {
                    self.scratch[iy * nx + ix] += add;
                }
            }
        }
        // A stable explicit step keeps a nonnegative field nonnegative
        // up to rounding, so clearly negative values mean divergence
        // just as surely as non-finite ones.
        for iy in 0..ny {
            for ix in 0..nx {
                let v = self.scratch[iy * nx + ix];
                if !v.is_finite() || v < -1e-9 {
                    return Err(QpError::InstabilityDetected {
                        cell: (ix, iy),
                        time: self.time,
                    });
                }
            }
        }
        std::mem::swap(&mut self.values, &mut self.scratch);
        self.time += dt;
        Ok(())
    }

    /// March to the given time with full stability-limited steps, the
    /// last one shortened to land exactly.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        let dt = stable_dt(&self.scenario);
        loop {
            let remaining = target - self.time;
            if remaining <= 1e-9 * dt {
                break;
            }
            self.step(remaining.min(dt))?;
        }
        self.time = target;
        Ok(())
    }
}

/// Run a scenario from a zero field at drive start: captures the
/// requested snapshots and samples every probe on the regular probe
/// grid (plus the final time).
pub fn run(scenario: &DiffusionScenario) -> Result<(Vec<DensityField>, Vec<ProbeTimeSeries>)> {
    let mut state = SolverState::new(scenario.clone())?;
    let start = -scenario.injection_duration;
    let end = scenario.simulation_end;

    let mut probe_times = Vec::new();
    let mut k = 0usize;
    loop {
        let t = start + k as f64 * scenario.probe_interval;
        if t > end + 1e-15 * end.abs().max(scenario.probe_interval) {
            break;
        }
        probe_times.push(t);
        k += 1;
    }
    if probe_times.last().map(|&t| (end - t).abs() > 1e-12 * scenario.probe_interval) == Some(true)
    {
        probe_times.push(end);
    }

    let mut events: Vec<f64> = probe_times.clone();
    events.extend_from_slice(&scenario.snapshot_times);
    events.push(0.0);
    events.push(end);
    events.sort_by(f64::total_cmp);
    events.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * scenario.probe_interval);

    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * scenario.probe_interval;
    let mut snapshots = Vec::new();
    let mut probes: Vec<ProbeTimeSeries> = scenario
        .probe_points
        .iter()
        .map(|&position| ProbeTimeSeries {
            position,
            times: Vec::new(),
            values: Vec::new(),
        })
        .collect();

    let record = |state: &SolverState,
                      snapshots: &mut Vec<DensityField>,
                      probes: &mut Vec<ProbeTimeSeries>| {
        let t = state.time();
        if probe_times.iter().any(|&pt| close(pt, t)) {
            for series in probes.iter_mut() {
                series.times.push(t);
                series
                    .values
                    .push(state.value_at_position(series.position.0, series.position.1));
            }
        }
        if scenario.snapshot_times.iter().any(|&st| close(st, t)) {
            snapshots.push(state.field());
        }
    };

    if events.first().map(|&t| close(t, start)) != Some(true) {
        events.insert(0, start);
    }
    record(&state, &mut snapshots, &mut probes);
    for &target in events.iter().skip(1) {
        if target < start {
            continue;
        }
        state.advance_to(target)?;
        record(&state, &mut snapshots, &mut probes);
    }
    Ok((snapshots, probes))
}
