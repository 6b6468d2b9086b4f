//! CSV readers and writers for the command-line tools.
//!
//! Every writer goes through an atomic temp-file-and-rename so an
//! interrupted run never leaves a truncated file where a previous
//! result used to be. Floats are written in scientific notation with
//! '.' as the decimal separator; every file carries a header row with
//! SI units embedded in the column names.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::diffusion::{DensityField, ProbeTimeSeries};
use crate::error::{QpError, Result};
use crate::observables::{
    OperatingRegionCheck, PopulationDecayCurve, QpDensityPoint, RelaxationSample,
    TimescaleEstimate,
};
use crate::phonon::ModelCurve;

/// Writes `bytes` to `path` via a same-directory temp file and rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |e: std::io::Error| QpError::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut file = fs::File::create(&tmp).map_err(io_err)?;
        file.write_all(bytes).map_err(io_err)?;
        file.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

fn fmt(value: f64) -> String {
    format!("{value:e}")
}

fn write_rows(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    atomic_write(path, text.as_bytes())
}

/// Columns: t_seconds, x_qp.
pub fn write_model_curve(path: &Path, curve: &ModelCurve) -> Result<()> {
    write_rows(
        path,
        "t_seconds,x_qp",
        curve
            .times
            .iter()
            .zip(&curve.values)
            .map(|(&t, &v)| format!("{},{}", fmt(t), fmt(v))),
    )
}

/// Columns: t_seconds, x_qp.
pub fn write_probe_series(path: &Path, series: &ProbeTimeSeries) -> Result<()> {
    write_rows(
        path,
        "t_seconds,x_qp",
        series
            .times
            .iter()
            .zip(&series.values)
            .map(|(&t, &v)| format!("{},{}", fmt(t), fmt(v))),
    )
}

/// Columns: x_m, y_m, x_qp; one row per cell, x fastest.
pub fn write_snapshot(path: &Path, field: &DensityField) -> Result<()> {
    let mut text = String::with_capacity(field.values.len() * 24);
    text.push_str("x_m,y_m,x_qp\n");
    for iy in 0..field.ny {
        for ix in 0..field.nx {
            let (x, y) = field.cell_center(ix, iy);
            text.push_str(&fmt(x));
            text.push(',');
            text.push_str(&fmt(y));
            text.push(',');
            text.push_str(&fmt(field.value_at(ix, iy)));
            text.push('\n');
        }
    }
    atomic_write(path, text.as_bytes())
}

/// Columns: t_r_seconds, x_qp, sigma_x_qp.
pub fn write_density_points(path: &Path, points: &[QpDensityPoint]) -> Result<()> {
    write_rows(
        path,
        "t_r_seconds,x_qp,sigma_x_qp",
        points.iter().map(|p| {
            format!(
                "{},{},{}",
                fmt(p.recovery_time),
                fmt(p.x_qp),
                fmt(p.uncertainty)
            )
        }),
    )
}

/// Columns: mechanism, transit_time_seconds,
/// effective_diffusivity_m2_per_s (blank for ballistic channels).
pub fn write_timescales(path: &Path, estimates: &[TimescaleEstimate]) -> Result<()> {
    write_rows(
        path,
        "mechanism,transit_time_seconds,effective_diffusivity_m2_per_s",
        estimates.iter().map(|e| {
            format!(
                "{},{},{}",
                e.mechanism.label(),
                fmt(e.transit_time),
                e.effective_diffusivity.map(fmt).unwrap_or_default()
            )
        }),
    )
}

/// Columns: drive_freq_hz, v_avg_volts, v_expected_volts,
/// deviation_fraction, within_band.
pub fn write_sfq_check(path: &Path, rows: &[OperatingRegionCheck]) -> Result<()> {
    write_rows(
        path,
        "drive_freq_hz,v_avg_volts,v_expected_volts,deviation_fraction,within_band",
        rows.iter().map(|r| {
            format!(
                "{},{},{},{},{}",
                fmt(r.drive_frequency),
                fmt(r.measured_voltage),
                fmt(r.expected_voltage),
                fmt(r.deviation_fraction),
                r.within_band
            )
        }),
    )
}

/// Input accepted by the density-extraction command, distinguished by
/// the CSV header.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtractInput {
    /// Rows of already-fitted relaxation times.
    Samples(Vec<RelaxationSample>),
    /// Raw decay curves, one per recovery time, to be fitted here.
    RawCurves(Vec<(f64, PopulationDecayCurve)>),
}

struct CsvTable {
    headers: Vec<String>,
    /// (1-based line number, fields)
    rows: Vec<(usize, Vec<String>)>,
}

fn read_table(path: &Path) -> Result<CsvTable> {
    let file = fs::File::open(path).map_err(|e| QpError::Io(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(file);
    let headers: Vec<String> = match reader.headers() {
        Ok(h) => h.iter().map(|s| s.to_string()).collect(),
        Err(e) => {
            return Err(QpError::Malformed {
                line: Some(1),
                reason: e.to_string(),
            })
        }
    };
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| QpError::Malformed {
            line: e.position().map(|p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        rows.push((line, record.iter().map(|s| s.to_string()).collect()));
    }
    if rows.is_empty() {
        return Err(QpError::Malformed {
            line: None,
            reason: "no data rows".into(),
        });
    }
    Ok(CsvTable { headers, rows })
}

fn parse_field(table_row: &(usize, Vec<String>), column: usize, name: &str) -> Result<f64> {
    let (line, fields) = table_row;
    let text = fields.get(column).ok_or_else(|| QpError::Malformed {
        line: Some(*line),
        reason: format!("missing column {name}"),
    })?;
    text.parse::<f64>().map_err(|_| QpError::Malformed {
        line: Some(*line),
        reason: format!("column {name}: cannot parse {text:?} as a number"),
    })
}

fn expect_headers(table: &CsvTable, required: &[&str]) -> Result<()> {
    let got: Vec<&str> = table.headers.iter().map(|s| s.as_str()).collect();
    if got.len() < required.len() || got[..required.len()] != *required {
        return Err(QpError::Malformed {
            line: Some(1),
            reason: format!("expected header {:?}, got {:?}", required.join(","), got.join(",")),
        });
    }
    Ok(())
}

/// Reads extraction input, auto-detecting the layout from the header:
/// either `t_r_seconds,t1_seconds[,sigma…]` or raw decay triplets
/// `t_r_seconds,t_d_seconds,p1` grouped by recovery time.
pub fn read_extract_input(path: &Path) -> Result<ExtractInput> {
    let table = read_table(path)?;
    let second = table.headers.get(1).map(|s| s.as_str()).unwrap_or("");
    if second == "t1_seconds" {
        let has_sigma = table
            .headers
            .get(2)
            .map(|s| s.starts_with("sigma"))
            .unwrap_or(false);
        let mut samples = Vec::with_capacity(table.rows.len());
        for row in &table.rows {
            samples.push(RelaxationSample {
                recovery_time: parse_field(row, 0, "t_r_seconds")?,
                t1: parse_field(row, 1, "t1_seconds")?,
                t1_uncertainty: if has_sigma {
                    parse_field(row, 2, "sigma")?
                } else {
                    0.0
                },
            });
        }
        return Ok(ExtractInput::Samples(samples));
    }
    if second == "t_d_seconds" {
        expect_headers(&table, &["t_r_seconds", "t_d_seconds", "p1"])?;
        let mut curves: Vec<(f64, PopulationDecayCurve)> = Vec::new();
        for row in &table.rows {
            let t_r = parse_field(row, 0, "t_r_seconds")?;
            let t_d = parse_field(row, 1, "t_d_seconds")?;
            let p1 = parse_field(row, 2, "p1")?;
            match curves.last_mut() {
                Some((current, curve)) if *current == t_r => {
                    curve.delay_times.push(t_d);
                    curve.p1_values.push(p1);
                }
                _ => curves.push((
                    t_r,
                    PopulationDecayCurve {
                        delay_times: vec![t_d],
                        p1_values: vec![p1],
                        p1_uncertainty: None,
                    },
                )),
            }
        }
        return Ok(ExtractInput::RawCurves(curves));
    }
    Err(QpError::Malformed {
        line: Some(1),
        reason: format!(
            "expected header t_r_seconds,t1_seconds[,sigma] or t_r_seconds,t_d_seconds,p1, got {:?}",
            table.headers.join(",")
        ),
    })
}

/// Reads density points for fitting: `t_r_seconds,x_qp[,sigma…]`.
pub fn read_density_points(path: &Path) -> Result<Vec<QpDensityPoint>> {
    let table = read_table(path)?;
    expect_headers(&table, &["t_r_seconds", "x_qp"])?;
    let has_sigma = table
        .headers
        .get(2)
        .map(|s| s.starts_with("sigma"))
        .unwrap_or(false);
    let mut points = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        points.push(QpDensityPoint {
            recovery_time: parse_field(row, 0, "t_r_seconds")?,
            x_qp: parse_field(row, 1, "x_qp")?,
            uncertainty: if has_sigma {
                parse_field(row, 2, "sigma")?
            } else {
                0.0
            },
        });
    }
    Ok(points)
}

/// Reads converter voltage calibration rows: `drive_freq_hz,v_avg_volts`.
pub fn read_voltage_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    let table = read_table(path)?;
    expect_headers(&table, &["drive_freq_hz", "v_avg_volts"])?;
    let mut rows = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        rows.push((
            parse_field(row, 0, "drive_freq_hz")?,
            parse_field(row, 1, "v_avg_volts")?,
        ));
    }
    Ok(rows)
}
