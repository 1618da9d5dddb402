//! Physical parameters and the conversion between oscillator units and SI.
//!
//! Everything inside the solver is dimensionless: lengths in units of the
//! transverse oscillator length `a⊥`, times in `1/ω⊥` and energies in `ħω⊥`.
//! Conversions happen only when reading configuration or writing results.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// How the configured transverse frequency is turned into a time unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeConvention {
    /// The frequency value is used directly as an angular rate, so
    /// `1/ω⊥ = 1/512 s ≈ 1.953 ms` for the sodium parameters.
    #[default]
    AngularRate,
    /// The frequency is a cyclic frequency in Hz and `ω⊥ = 2π f`.
    CyclicHertz,
}

impl TimeConvention {
    pub fn name(self) -> &'static str {
        match self {
            TimeConvention::AngularRate => "angular",
            TimeConvention::CyclicHertz => "hertz",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "angular" => Some(TimeConvention::AngularRate),
            "hertz" => Some(TimeConvention::CyclicHertz),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    pub atom_count: f64,
    /// kg
    pub atom_mass: f64,
    /// Either rad/s or Hz, see [`TimeConvention`].
    pub transverse_frequency: f64,
    /// m
    pub scattering_length: f64,
    /// Explicit oscillator length in m. Derived from mass and frequency when absent.
    pub oscillator_length: Option<f64>,
    /// Explicit dimensionless coupling. Derived from the other fields when absent.
    pub coupling: Option<f64>,
    pub time_convention: TimeConvention,
}

impl Default for PhysicalParams {
    /// ²³Na, N = 10⁴, ω⊥ = 512, a⊥ = 2.318 μm, a_s = 2.75 nm.
    fn default() -> Self {
        PhysicalParams {
            atom_count: 10_000.0,
            atom_mass: 3.816e-26,
            transverse_frequency: 512.0,
            scattering_length: 2.75e-9,
            oscillator_length: Some(2.318e-6),
            coupling: None,
            time_convention: TimeConvention::AngularRate,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("atom_count", self.atom_count, self.atom_count >= 0.0),
            ("atom_mass", self.atom_mass, self.atom_mass > 0.0),
            (
                "transverse_frequency",
                self.transverse_frequency,
                self.transverse_frequency > 0.0,
            ),
            (
                "scattering_length",
                self.scattering_length,
                self.scattering_length >= 0.0,
            ),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(Error::Config(format!("physical.{name} = {value} is not valid")));
            }
        }
        if let Some(l) = self.oscillator_length {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Config(format!(
                    "physical.oscillator_length = {l} must be positive"
                )));
            }
        }
        Ok(())
    }

    /// Angular frequency in rad/s under the configured convention.
    pub fn angular_frequency(&self) -> f64 {
        match self.time_convention {
            TimeConvention::AngularRate => self.transverse_frequency,
            TimeConvention::CyclicHertz => 2.0 * PI * self.transverse_frequency,
        }
    }

    /// `a⊥` in metres.
    pub fn oscillator_length(&self) -> f64 {
        self.oscillator_length
            .unwrap_or_else(|| (HBAR / (self.atom_mass * self.angular_frequency())).sqrt())
    }

    /// The coupling used by the solver: the override if present, else the
    /// value implied by the atom number and scattering length.
    pub fn coupling(&self) -> Result<f64> {
        match self.coupling {
            Some(g) => Ok(g),
            None => coupling_from_params(self),
        }
    }

    /// Milliseconds per dimensionless time unit.
    pub fn time_unit_ms(&self) -> f64 {
        1e3 / self.angular_frequency()
    }

    /// Micrometres per dimensionless length unit.
    pub fn length_unit_um(&self) -> f64 {
        self.oscillator_length() * 1e6
    }

    pub fn to_physical_time(&self, t: f64) -> f64 {
        t * self.time_unit_ms()
    }

    pub fn to_physical_length(&self, x: f64) -> f64 {
        x * self.length_unit_um()
    }

    pub fn from_physical_time(&self, t_ms: f64) -> f64 {
        t_ms / self.time_unit_ms()
    }
}

/// Dimensionless 2D coupling `g = 2√π N a_s / a⊥`.
pub fn coupling_from_params(p: &PhysicalParams) -> Result<f64> {
    if p.atom_count < 0.0 || p.scattering_length < 0.0 {
        return Err(Error::Config(
            "atom count and scattering length must be non-negative".into(),
        ));
    }
    if p.atom_mass <= 0.0 || p.transverse_frequency <= 0.0 {
        return Err(Error::Config(
            "atom mass and transverse frequency must be positive".into(),
        ));
    }
    let a_perp = p.oscillator_length();
    if !(a_perp > 0.0) {
        return Err(Error::Config("oscillator length must be positive".into()));
    }
    Ok(2.0 * PI.sqrt() * p.atom_count * p.scattering_length / a_perp)
}
