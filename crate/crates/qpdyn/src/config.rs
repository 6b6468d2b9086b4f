//! JSON scenario configuration: every field optional with the
//! reference-device defaults, unknown keys rejected, and a canonical
//! hash over the effective (defaults-resolved) configuration for run
//! manifests.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diffusion::{DiffusionScenario, Rect, MAX_PROBE_INTERVAL};
use crate::error::{QpError, Result};
use crate::observables::WindowWeighting;
use crate::params::{GeometryParams, PhononModelParams, PhysicalConstants};

/// The only schema this build reads.
pub const SCHEMA_VERSION: u32 = 1;

/// Default qubit baseline relaxation time, s.
pub const DEFAULT_BASELINE_T1: f64 = 6.0e-6;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    pub delta_gap_mev: Option<f64>,
    pub qubit_frequency_hz: Option<f64>,
    pub hbar: Option<f64>,
    pub flux_quantum_wb: Option<f64>,
    /// Baseline T1 defining Γ0 for density extraction, s.
    pub baseline_t1_s: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub domain_length_x_m: Option<f64>,
    pub domain_length_y_m: Option<f64>,
    pub sfq_qubit_distance_m: Option<f64>,
    pub substrate_thickness_m: Option<f64>,
    pub sound_speed_m_per_s: Option<f64>,
    pub photon_speed_m_per_s: Option<f64>,
    pub qp_diffusivity_m2_per_s: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionConfig {
    pub grid_nx: Option<usize>,
    pub grid_ny: Option<usize>,
    /// Trapping expressed as a time constant 1/s_rate, s.
    pub trapping_time_s: Option<f64>,
    pub recombination_rate_per_s: Option<f64>,
    pub injection_rate_per_s: Option<f64>,
    pub injection_x_m: Option<f64>,
    pub injection_y_m: Option<f64>,
    pub injection_width_m: Option<f64>,
    pub injection_height_m: Option<f64>,
    pub drive_duration_s: Option<f64>,
    pub simulation_end_s: Option<f64>,
    /// Probe distances from the injection-region center along the
    /// converter-qubit line, m.
    pub probe_distances_m: Option<Vec<f64>>,
    pub probe_interval_s: Option<f64>,
    pub snapshot_times_s: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhononConfig {
    pub recombination_time_s: Option<f64>,
    pub qubit_trapping_time_s: Option<f64>,
    pub propagation_delay_s: Option<f64>,
    pub transfer_fraction: Option<f64>,
    pub sfq_generation_rate_per_s: Option<f64>,
    pub drive_duration_s: Option<f64>,
    pub curve_start_s: Option<f64>,
    pub curve_end_s: Option<f64>,
    pub curve_step_s: Option<f64>,
    /// Measurement window applied to the emitted curve, s.
    pub t_avg_s: Option<f64>,
    /// "uniform" or "exponential".
    pub weighting: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Names of parameters left free; the rest stay at their initial
    /// values. Default frees everything except the recombination
    /// rate.
    pub free_params: Option<Vec<String>>,
    /// Half-width of the default bounds box as a multiplicative
    /// factor.
    pub bound_factor: Option<f64>,
    /// Measurement window applied to the model during fitting, s.
    pub t_avg_s: Option<f64>,
    pub weighting: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    pub out_dir: Option<String>,
}

/// Root configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Must equal [`SCHEMA_VERSION`].
    pub schema_version: u32,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub diffusion: DiffusionConfig,
    #[serde(default)]
    pub phonon: PhononConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub io: IoConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            constants: ConstantsConfig::default(),
            geometry: GeometryConfig::default(),
            diffusion: DiffusionConfig::default(),
            phonon: PhononConfig::default(),
            fit: FitConfig::default(),
            io: IoConfig::default(),
        }
    }
}

fn parse_weighting(name: &Option<String>) -> Result<WindowWeighting> {
    match name.as_deref() {
        None | Some("uniform") => Ok(WindowWeighting::Uniform),
        Some("exponential") => Ok(WindowWeighting::Exponential),
        Some(other) => Err(QpError::InvalidParameter {
            field: "weighting",
            reason: format!("unknown weighting {other:?}; use uniform or exponential"),
        }),
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ScenarioConfig = serde_json::from_str(text).map_err(|e| QpError::Malformed {
            line: Some(e.line()),
            reason: e.to_string(),
        })?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(QpError::InvalidParameter {
                field: "schema_version",
                reason: format!(
                    "unsupported version {}, this build reads {SCHEMA_VERSION}",
                    config.schema_version
                ),
            });
        }
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QpError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn physical_constants(&self) -> Result<PhysicalConstants> {
        let defaults = PhysicalConstants::default();
        let c = &self.constants;
        PhysicalConstants {
            hbar: c.hbar.unwrap_or(defaults.hbar),
            flux_quantum: c.flux_quantum_wb.unwrap_or(defaults.flux_quantum),
            delta_gap: c
                .delta_gap_mev
                .map(crate::params::mev_to_joules)
                .unwrap_or(defaults.delta_gap),
            qubit_angular_freq: c
                .qubit_frequency_hz
                .map(|f| 2.0 * std::f64::consts::PI * f)
                .unwrap_or(defaults.qubit_angular_freq),
        }
        .validated()
    }

    pub fn baseline_t1(&self) -> f64 {
        self.constants.baseline_t1_s.unwrap_or(DEFAULT_BASELINE_T1)
    }

    pub fn geometry_params(&self) -> Result<GeometryParams> {
        let defaults = GeometryParams::default();
        let g = &self.geometry;
        GeometryParams {
            domain_length_x: g.domain_length_x_m.unwrap_or(defaults.domain_length_x),
            domain_length_y: g.domain_length_y_m.unwrap_or(defaults.domain_length_y),
            sfq_qubit_distance: g
                .sfq_qubit_distance_m
                .unwrap_or(defaults.sfq_qubit_distance),
            substrate_thickness: g
                .substrate_thickness_m
                .unwrap_or(defaults.substrate_thickness),
            sound_speed: g.sound_speed_m_per_s.unwrap_or(defaults.sound_speed),
            photon_speed: g.photon_speed_m_per_s.unwrap_or(defaults.photon_speed),
            qp_diffusivity: g
                .qp_diffusivity_m2_per_s
                .unwrap_or(defaults.qp_diffusivity),
        }
        .validated()
    }

    pub fn diffusion_scenario(&self) -> Result<DiffusionScenario> {
        let geometry = self.geometry_params()?;
        let defaults = DiffusionScenario::default();
        let d = &self.diffusion;
        let mid_y = geometry.domain_length_y / 2.0;
        let injection_region = Rect {
            x_min: d.injection_x_m.unwrap_or(0.0),
            y_min: d.injection_y_m.unwrap_or(mid_y - 20e-6),
            width: d.injection_width_m.unwrap_or(100e-6),
            height: d.injection_height_m.unwrap_or(40e-6),
        };
        let center_x = injection_region.x_min + injection_region.width / 2.0;
        let distances = d
            .probe_distances_m
            .clone()
            .unwrap_or_else(|| vec![0.0, 0.1e-3, 0.5e-3, 1.0e-3]);
        let trapping_rate = match d.trapping_time_s {
            Some(t) if t > 0.0 => 1.0 / t,
            Some(t) => {
                return Err(QpError::InvalidParameter {
                    field: "trapping_time_s",
                    reason: format!("must be > 0, got {t:e}"),
                })
            }
            None => defaults.trapping_rate,
        };
        DiffusionScenario {
            geometry,
            grid_nx: d.grid_nx.unwrap_or(defaults.grid_nx),
            grid_ny: d.grid_ny.unwrap_or(defaults.grid_ny),
            diffusivity: geometry.qp_diffusivity,
            recombination_rate: d
                .recombination_rate_per_s
                .unwrap_or(defaults.recombination_rate),
            trapping_rate,
            injection_region,
            injection_rate: d.injection_rate_per_s.unwrap_or(defaults.injection_rate),
            injection_duration: d.drive_duration_s.unwrap_or(defaults.injection_duration),
            simulation_end: d.simulation_end_s.unwrap_or(defaults.simulation_end),
            probe_points: distances.iter().map(|&dd| (center_x + dd, mid_y)).collect(),
            probe_interval: d.probe_interval_s.unwrap_or(MAX_PROBE_INTERVAL),
            snapshot_times: d
                .snapshot_times_s
                .clone()
                .unwrap_or(defaults.snapshot_times),
        }
        .validated()
    }

    pub fn phonon_params(&self) -> Result<PhononModelParams> {
        let defaults = PhononModelParams::default();
        let p = &self.phonon;
        let rate_from_time = |time: Option<f64>, fallback: f64, field: &'static str| match time {
            Some(t) if t > 0.0 => Ok(1.0 / t),
            Some(t) => Err(QpError::InvalidParameter {
                field,
                reason: format!("must be > 0, got {t:e}"),
            }),
            None => Ok(fallback),
        };
        PhononModelParams {
            recombination_rate: rate_from_time(
                p.recombination_time_s,
                defaults.recombination_rate,
                "recombination_time_s",
            )?,
            qubit_trapping_rate: rate_from_time(
                p.qubit_trapping_time_s,
                defaults.qubit_trapping_rate,
                "qubit_trapping_time_s",
            )?,
            propagation_delay: p.propagation_delay_s.unwrap_or(defaults.propagation_delay),
            transfer_fraction: p.transfer_fraction.unwrap_or(defaults.transfer_fraction),
            sfq_generation_rate: p
                .sfq_generation_rate_per_s
                .unwrap_or(defaults.sfq_generation_rate),
            drive_duration: p.drive_duration_s.unwrap_or(defaults.drive_duration),
        }
        .validated()
    }

    /// Grid for the emitted phonon curve; defaults to
    /// [−drive_duration, 160 µs] at 0.1 µs.
    pub fn phonon_curve_times(&self, params: &PhononModelParams) -> Result<Vec<f64>> {
        let start = self.phonon.curve_start_s.unwrap_or(-params.drive_duration);
        let end = self.phonon.curve_end_s.unwrap_or(160e-6);
        let step = self.phonon.curve_step_s.unwrap_or(0.1e-6);
        if !(step > 0.0) || end <= start {
            return Err(QpError::InvalidParameter {
                field: "curve grid",
                reason: format!("need start < end and step > 0, got [{start:e}, {end:e}] at {step:e}"),
            });
        }
        let n = ((end - start) / step).round() as usize;
        Ok((0..=n).map(|i| start + i as f64 * step).collect())
    }

    pub fn phonon_weighting(&self) -> Result<WindowWeighting> {
        parse_weighting(&self.phonon.weighting)
    }

    pub fn fit_weighting(&self) -> Result<WindowWeighting> {
        parse_weighting(&self.fit.weighting)
    }

    /// SHA-256 over the canonical (sorted-key) JSON of this
    /// configuration.
    pub fn sha256(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        let mut out = String::with_capacity(64);
        for byte in digest {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_rejected_for_missing_version() {
        assert!(ScenarioConfig::from_json("{}").is_err());
    }

    #[test]
    fn minimal_config_resolves_to_defaults() {
        let config = ScenarioConfig::from_json(r#"{"schema_version": 1}"#).unwrap();
        assert_eq!(config, ScenarioConfig::default());
        let scenario = config.diffusion_scenario().unwrap();
        assert_eq!(scenario, DiffusionScenario::default());
        let params = config.phonon_params().unwrap();
        assert_eq!(params, PhononModelParams::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ScenarioConfig::from_json(r#"{"schema_version": 1, "typo_section": {}}"#)
            .unwrap_err();
        match err {
            QpError::Malformed { .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
        assert!(ScenarioConfig::from_json(
            r#"{"schema_version": 1, "phonon": {"alpha": 0.5}}"#
        )
        .is_err());
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        assert!(ScenarioConfig::from_json(r#"{"schema_version": 2}"#).is_err());
    }

    #[test]
    fn time_constant_overrides_convert_to_rates() {
        let config = ScenarioConfig::from_json(
            r#"{"schema_version": 1,
                "diffusion": {"trapping_time_s": 100e-6},
                "phonon": {"qubit_trapping_time_s": 5e-6}}"#,
        )
        .unwrap();
        let scenario = config.diffusion_scenario().unwrap();
        assert!((scenario.trapping_rate - 1e4).abs() < 1e-9);
        let params = config.phonon_params().unwrap();
        assert!((params.qubit_trapping_rate - 2e5).abs() < 1e-6);
    }

    #[test]
    fn hash_is_stable_and_key_order_independent() {
        let a = ScenarioConfig::from_json(
            r#"{"schema_version": 1, "phonon": {"transfer_fraction": 0.01, "propagation_delay_s": 8e-6}}"#,
        )
        .unwrap();
        let b = ScenarioConfig::from_json(
            r#"{"phonon": {"propagation_delay_s": 8e-6, "transfer_fraction": 0.01}, "schema_version": 1}"#,
        )
        .unwrap();
        assert_eq!(a.sha256(), b.sha256());
        assert_eq!(a.sha256().len(), 64);
        let c = ScenarioConfig::default();
        assert_ne!(a.sha256(), c.sha256());
    }

    #[test]
    fn bad_weighting_name_is_rejected() {
        let config = ScenarioConfig::from_json(
            r#"{"schema_version": 1, "phonon": {"weighting": "quadratic"}}"#,
        )
        .unwrap();
        assert!(config.phonon_weighting().is_err());
    }
}
