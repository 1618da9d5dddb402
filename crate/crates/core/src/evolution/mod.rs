//! Split-step Fourier propagation of the dispersion-managed 2D GPE
//!
//! `i ∂ψ/∂t = [−(α/2)∂²ₓ − (β/2)∂²ᵧ + g|ψ|² + V] ψ`
//!
//! in real and imaginary time.

mod dynamics;
mod ground;
mod initial;
mod stepper;

pub use dynamics::{evolve_with_schedule, EvolutionFailure, EvolutionOutput, Snapshot};
pub use ground::{ground_state_itp, GroundState};
pub use initial::{make_initial_state, InitialState};
pub use stepper::{split_step, EnergyTerms, SplitStepper};

use crate::error::{Error, Result};

/// Kinetic coefficients along x (`alpha`) and y (`beta`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPair {
    pub alpha: f64,
    pub beta: f64,
}

impl DispersionPair {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::Parameter(format!(
                "dispersion coefficients must be positive (alpha = {alpha}, beta = {beta})"
            )));
        }
        Ok(DispersionPair { alpha, beta })
    }

    pub fn unity() -> Self {
        DispersionPair { alpha: 1.0, beta: 1.0 }
    }

    /// `(1, 1 − ε²)`: the pair under which an ε-ellipse maps onto a circle.
    pub fn managed(eccentricity: f64) -> Self {
        DispersionPair {
            alpha: 1.0,
            beta: 1.0 - eccentricity * eccentricity,
        }
    }
}

impl Default for DispersionPair {
    fn default() -> Self {
        Self::unity()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Real,
    Imaginary,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Real => "real",
            Mode::Imaginary => "imaginary",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub mode: Mode,
    pub coupling: f64,
    pub record_stride: usize,
    pub snapshot_times: Vec<f64>,
    pub convergence_tol: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: 0.005,
            n_steps: 16384,
            mode: Mode::Real,
            coupling: 2.0,
            record_stride: 100,
            snapshot_times: Vec::new(),
            convergence_tol: 1e-10,
        }
    }
}

impl EvolutionConfig {
    pub fn real(dt: f64, n_steps: usize, coupling: f64) -> Self {
        EvolutionConfig {
            dt,
            n_steps,
            coupling,
            ..Default::default()
        }
    }

    pub fn imaginary(dt: f64, max_steps: usize, coupling: f64, tol: f64) -> Self {
        EvolutionConfig {
            dt,
            n_steps: max_steps,
            mode: Mode::Imaginary,
            coupling,
            convergence_tol: tol,
            ..Default::default()
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn t_final(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::Config("evolution.n_steps must be at least 1".into()));
        }
        self.validate_allowing_empty()
    }

    /// Like [`EvolutionConfig::validate`] but accepts `n_steps = 0`, which
    /// real-time runs treat as "record the initial state only".
    pub(crate) fn validate_allowing_empty(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("evolution.dt = {} must be positive", self.dt)));
        }
        if self.record_stride == 0 {
            return Err(Error::Config("evolution.record_stride must be at least 1".into()));
        }
        if self.mode == Mode::Imaginary && !(self.convergence_tol > 0.0) {
            return Err(Error::Config(format!(
                "evolution.convergence_tol = {} must be positive in imaginary mode",
                self.convergence_tol
            )));
        }
        if !self.coupling.is_finite() {
            return Err(Error::Config("coupling must be finite".into()));
        }
        Ok(())
    }
}

/// Observables sampled during a run. All vectors have the same length.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    pub norm: Vec<f64>,
    pub energy: Vec<f64>,
    pub chemical_potential: Vec<f64>,
    pub width_x: Vec<f64>,
    pub width_y: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn push(&mut self, t: f64, survival: f64, norm: f64, energy: f64, mu: f64, wx: f64, wy: f64) {
        self.times.push(t);
        self.survival.push(survival);
        self.norm.push(norm);
        self.energy.push(energy);
        self.chemical_potential.push(mu);
        self.width_x.push(wx);
        self.width_y.push(wy);
    }
}
