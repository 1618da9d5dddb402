//! Trapping potentials: the elliptical Gaussian ring waveguide, isotropic
//! harmonic traps, and piecewise-constant schedules that switch between them.

use crate::error::{Error, Result};
use crate::evolution::DispersionPair;
use crate::field::{ensure_same_grid, RealField2D};
use crate::grid::GridSpec;
use std::sync::Arc;

/// Elliptical ring waveguide `V0 {1 − exp[−(ρ − a)²/γ²]}` with the
/// elliptical radius `ρ = sqrt(x² + y²/(1−ε²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideParams {
    pub depth: f64,
    pub width: f64,
    pub semi_major: f64,
    pub eccentricity: f64,
}

impl Default for WaveguideParams {
    fn default() -> Self {
        WaveguideParams {
            depth: 50.0,
            width: 1.0,
            semi_major: 10.0,
            eccentricity: 0.0,
        }
    }
}

impl WaveguideParams {
    pub fn new(depth: f64, width: f64, semi_major: f64, eccentricity: f64) -> Result<Self> {
        let w = WaveguideParams {
            depth,
            width,
            semi_major,
            eccentricity,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn circular(semi_major: f64) -> Self {
        WaveguideParams {
            semi_major,
            ..Default::default()
        }
    }

    pub fn with_eccentricity(self, eccentricity: f64) -> Self {
        WaveguideParams { eccentricity, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.depth > 0.0) {
            return Err(Error::Parameter(format!(
                "waveguide depth {} must be positive",
                self.depth
            )));
        }
        if !(self.width > 0.0) {
            return Err(Error::Parameter(format!(
                "waveguide width {} must be positive",
                self.width
            )));
        }
        if !(self.semi_major > 0.0) {
            return Err(Error::Parameter(format!(
                "semi-major axis {} must be positive",
                self.semi_major
            )));
        }
        if !(0.0..1.0).contains(&self.eccentricity) {
            return Err(Error::Parameter(format!(
                "eccentricity {} must lie in [0, 1)",
                self.eccentricity
            )));
        }
        Ok(())
    }

    /// `sqrt(1 − ε²)`, the ratio of the minor to the major semi-axis.
    pub fn axis_ratio(&self) -> f64 {
        (1.0 - self.eccentricity * self.eccentricity).sqrt()
    }

    pub fn semi_minor(&self) -> f64 {
        self.semi_major * self.axis_ratio()
    }

    /// `sqrt(x² + y²/(1−ε²))`.
    pub fn elliptic_radius(&self, x: f64, y: f64) -> f64 {
        let s2 = 1.0 - self.eccentricity * self.eccentricity;
        (x * x + y * y / s2).sqrt()
    }

    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        let d = self.elliptic_radius(x, y) - self.semi_major;
        // 1 - exp(-u) via exp_m1 keeps the ring minimum exactly zero.
        -self.depth * (-(d * d) / (self.width * self.width)).exp_m1()
    }

    /// Width parameter of the Gaussian ring ground-state ansatz, `(γ²/V0)^{1/4}`.
    pub fn channel_width(&self) -> f64 {
        (self.width * self.width / self.depth).powf(0.25)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicParams {
    pub frequency: f64,
}

impl HarmonicParams {
    pub fn new(frequency: f64) -> Result<Self> {
        if !(frequency > 0.0) {
            return Err(Error::Parameter(format!(
                "harmonic frequency {frequency} must be positive"
            )));
        }
        Ok(HarmonicParams { frequency })
    }
}

pub fn elliptic_ring_potential(grid: &Arc<GridSpec>, w: &WaveguideParams) -> Result<RealField2D> {
    w.validate()?;
    let (xlo, xhi) = grid.extent_x();
    let (ylo, yhi) = grid.extent_y();
    let reach = w.semi_major + 2.0 * w.width;
    if xlo > -reach || xhi < reach || ylo > -w.semi_minor() - 2.0 * w.width || yhi < w.semi_minor() + 2.0 * w.width {
        log::warn!(
            "grid [{xlo}, {xhi}]x[{ylo}, {yhi}] barely contains the ring (a = {}, b = {})",
            w.semi_major,
            w.semi_minor()
        );
    }
    Ok(RealField2D::from_fn(grid.clone(), |x, y| w.value_at(x, y)))
}

/// `½ ω² (x² + y²)`.
pub fn harmonic_potential(grid: &Arc<GridSpec>, h: &HarmonicParams) -> RealField2D {
    let w2 = h.frequency * h.frequency;
    RealField2D::from_fn(grid.clone(), |x, y| 0.5 * w2 * (x * x + y * y))
}

#[derive(Debug, Clone)]
pub struct ScheduleSegment {
    pub start: f64,
    pub potential: Arc<RealField2D>,
    /// Dispersion pair taking effect with this segment; `None` keeps the
    /// one already in use.
    pub dispersion: Option<DispersionPair>,
}

/// Potentials that hold on `[t_k, t_{k+1})`; the last one holds until `t_final`.
#[derive(Debug, Clone)]
pub struct TrapSchedule {
    segments: Vec<ScheduleSegment>,
    t_final: f64,
}

impl TrapSchedule {
    pub fn constant(potential: RealField2D, t_final: f64) -> Self {
        TrapSchedule {
            segments: vec![ScheduleSegment {
                start: 0.0,
                potential: Arc::new(potential),
                dispersion: None,
            }],
            t_final,
        }
    }

    pub fn new(segments: Vec<(f64, RealField2D)>, t_final: f64) -> Result<Self> {
        let Some(first) = segments.first() else {
            return Err(Error::Config("a trap schedule needs at least one segment".into()));
        };
        if first.0 != 0.0 {
            return Err(Error::Config(format!(
                "the first schedule segment must start at t = 0, not {}",
                first.0
            )));
        }
        for pair in segments.windows(2) {
            if !(pair[1].0 > pair[0].0) {
                return Err(Error::Config(format!(
                    "schedule switch times must increase strictly ({} then {})",
                    pair[0].0, pair[1].0
                )));
            }
            ensure_same_grid(pair[0].1.grid(), pair[1].1.grid())?;
        }
        let last = segments.last().map(|s| s.0).unwrap_or(0.0);
        if t_final < last {
            return Err(Error::Config(format!(
                "schedule ends at {t_final} before its last switch at {last}"
            )));
        }
        Ok(TrapSchedule {
            segments: segments
                .into_iter()
                .map(|(start, p)| ScheduleSegment {
                    start,
                    potential: Arc::new(p),
                    dispersion: None,
                })
                .collect(),
            t_final,
        })
    }

    /// Switch the dispersion pair to `disp` when segment `index` begins.
    pub fn with_dispersion(mut self, index: usize, disp: DispersionPair) -> Result<Self> {
        DispersionPair::new(disp.alpha, disp.beta)?;
        let n = self.segments.len();
        let seg = self
            .segments
            .get_mut(index)
            .ok_or_else(|| Error::Config(format!("schedule has {n} segments, no segment {index}")))?;
        seg.dispersion = Some(disp);
        Ok(self)
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn segments(&self) -> &[ScheduleSegment] {
        &self.segments
    }

    pub fn grid(&self) -> &GridSpec {
        self.segments[0].potential.grid()
    }

    /// Index of the segment active at `t`.
    pub fn segment_index(&self, t: f64) -> Result<usize> {
        if t < 0.0 || t > self.t_final || t.is_nan() {
            return Err(Error::Range(format!(
                "t = {t} outside schedule coverage [0, {}]",
                self.t_final
            )));
        }
        Ok(self.segments.iter().rposition(|s| s.start <= t).unwrap_or(0))
    }

    pub fn potential_at(&self, t: f64) -> Result<&Arc<RealField2D>> {
        Ok(&self.segments[self.segment_index(t)?].potential)
    }
}

pub fn potential_at(schedule: &TrapSchedule, t: f64) -> Result<&Arc<RealField2D>> {
    schedule.potential_at(t)
}
