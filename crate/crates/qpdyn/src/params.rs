//! Physical constants, device geometry, and model parameter containers.
//!
//! Everything is stored in SI base units (seconds, meters, joules,
//! rad/s). Constructors accept the conventional lab units (meV, GHz,
//! ns/µs) and convert at the boundary so the numerics never mix unit
//! systems.

use crate::error::{QpError, Result};

/// Reduced Planck constant, J·s (CODATA 2018).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Magnetic flux quantum h/2e, Wb (CODATA 2018).
pub const FLUX_QUANTUM: f64 = 2.067_833_848e-15;

/// Elementary charge, C (CODATA 2018, exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Convert an energy in meV to joules.
pub fn mev_to_joules(mev: f64) -> f64 {
    mev * 1e-3 * ELEMENTARY_CHARGE
}

/// Convert an energy in joules to meV.
pub fn joules_to_mev(joules: f64) -> f64 {
    joules / (1e-3 * ELEMENTARY_CHARGE)
}

fn require_positive(field: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(QpError::InvalidParameter {
            field,
            reason: format!("must be strictly positive and finite, got {value:e}"),
        });
    }
    Ok(())
}

/// Fundamental constants plus the two device energies entering the
/// relaxation-rate/density conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Magnetic flux quantum, Wb.
    pub flux_quantum: f64,
    /// Superconducting gap of the junction electrodes, J.
    pub delta_gap: f64,
    /// Qubit angular eigenfrequency, rad/s.
    pub qubit_angular_freq: f64,
}

impl PhysicalConstants {
    /// Build from lab units: gap in meV, qubit frequency in Hz.
    pub fn from_lab_units(delta_gap_mev: f64, qubit_freq_hz: f64) -> Result<Self> {
        Self {
            hbar: HBAR,
            flux_quantum: FLUX_QUANTUM,
            delta_gap: mev_to_joules(delta_gap_mev),
            qubit_angular_freq: 2.0 * std::f64::consts::PI * qubit_freq_hz,
        }
        .validated()
    }

    /// Gap energy back in meV.
    pub fn delta_gap_mev(&self) -> f64 {
        joules_to_mev(self.delta_gap)
    }

    pub fn validated(self) -> Result<Self> {
        require_positive("hbar", self.hbar)?;
        require_positive("flux_quantum", self.flux_quantum)?;
        require_positive("delta_gap", self.delta_gap)?;
        require_positive("qubit_angular_freq", self.qubit_angular_freq)?;
        Ok(self)
    }
}

impl Default for PhysicalConstants {
    /// Reference device: 0.18 meV gap, 4.462 GHz qubit.
    fn default() -> Self {
        Self::from_lab_units(0.18, 4.462e9).expect("default constants are valid")
    }
}

/// Chip geometry and material transport properties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryParams {
    /// Device footprint along x, m.
    pub domain_length_x: f64,
    /// Device footprint along y, m.
    pub domain_length_y: f64,
    /// Separation between the SFQ converter and the qubit, m.
    pub sfq_qubit_distance: f64,
    /// Substrate thickness, m.
    pub substrate_thickness: f64,
    /// Speed of sound in the substrate, m/s.
    pub sound_speed: f64,
    /// Electromagnetic propagation speed on chip, m/s.
    pub photon_speed: f64,
    /// Quasiparticle diffusivity in the film, m²/s.
    pub qp_diffusivity: f64,
}

impl GeometryParams {
    pub fn validated(self) -> Result<Self> {
        require_positive("domain_length_x", self.domain_length_x)?;
        require_positive("domain_length_y", self.domain_length_y)?;
        require_positive("sfq_qubit_distance", self.sfq_qubit_distance)?;
        require_positive("substrate_thickness", self.substrate_thickness)?;
        require_positive("sound_speed", self.sound_speed)?;
        require_positive("photon_speed", self.photon_speed)?;
        require_positive("qp_diffusivity", self.qp_diffusivity)?;
        if self.sfq_qubit_distance > self.domain_length_x {
            return Err(QpError::InvalidParameter {
                field: "sfq_qubit_distance",
                reason: format!(
                    "must fit inside the domain: {:e} m > domain_length_x {:e} m",
                    self.sfq_qubit_distance, self.domain_length_x
                ),
            });
        }
        Ok(self)
    }
}

impl Default for GeometryParams {
    /// Reference device: 5 mm × 2.5 mm footprint, 2.5 mm converter-qubit
    /// separation, 0.625 mm Si substrate.
    fn default() -> Self {
        Self {
            domain_length_x: 5e-3,
            domain_length_y: 2.5e-3,
            sfq_qubit_distance: 2.5e-3,
            substrate_thickness: 0.625e-3,
            sound_speed: 1e3,
            photon_speed: 1e8,
            qp_diffusivity: 1.2e-4,
        }
    }
}

/// Parameters of the phonon-mediated propagation model: local source
/// dynamics at the SFQ converter plus delayed generation and trapping
/// at the qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononModelParams {
    /// Quasiparticle recombination rate at the source, 1/s.
    pub recombination_rate: f64,
    /// Trapping rate in the qubit vicinity, 1/s.
    pub qubit_trapping_rate: f64,
    /// Phonon propagation delay from converter to qubit, s.
    pub propagation_delay: f64,
    /// Fraction of released phonons that break pairs near the qubit.
    pub transfer_fraction: f64,
    /// Generation rate while the converter is driven, 1/s.
    pub sfq_generation_rate: f64,
    /// Duration of the converter drive, s.
    pub drive_duration: f64,
}

impl PhononModelParams {
    pub fn validated(self) -> Result<Self> {
        require_positive("recombination_rate", self.recombination_rate)?;
        require_positive("qubit_trapping_rate", self.qubit_trapping_rate)?;
        require_positive("sfq_generation_rate", self.sfq_generation_rate)?;
        require_positive("drive_duration", self.drive_duration)?;
        if !self.propagation_delay.is_finite() || self.propagation_delay < 0.0 {
            return Err(QpError::InvalidParameter {
                field: "propagation_delay",
                reason: format!("must be ≥ 0, got {:e}", self.propagation_delay),
            });
        }
        // Zero is allowed: a decoupled qubit is a useful degenerate
        // case for fits and null checks.
        if !self.transfer_fraction.is_finite()
            || self.transfer_fraction < 0.0
            || self.transfer_fraction > 1.0
        {
            return Err(QpError::InvalidParameter {
                field: "transfer_fraction",
                reason: format!("out of [0, 1], got {:e}", self.transfer_fraction),
            });
        }
        Ok(self)
    }

    /// Earliest instant at which phonon-generated quasiparticles can
    /// appear near the qubit: drive start plus propagation delay.
    pub fn qubit_onset_time(&self) -> f64 {
        -self.drive_duration + self.propagation_delay
    }
}

impl Default for PhononModelParams {
    /// Calibration for the reference device: recombination 1/(42 ns),
    /// qubit trapping 1/(9.1 µs), delay 7.9 µs, transfer fraction
    /// 1.04e-2, generation 2.16e2 s⁻¹, drive 25 µs.
    fn default() -> Self {
        Self {
            recombination_rate: 1.0 / 42e-9,
            qubit_trapping_rate: 1.0 / 9.1e-6,
            propagation_delay: 7.9e-6,
            transfer_fraction: 1.04e-2,
            sfq_generation_rate: 2.16e2,
            drive_duration: 25e-6,
        }
    }
}
