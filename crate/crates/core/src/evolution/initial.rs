use crate::error::{Error, Result};
use crate::field::ComplexField2D;
use crate::grid::GridSpec;
use crate::observables::ring_profile;
use crate::potentials::WaveguideParams;
use num_complex::Complex64;
use std::sync::Arc;

/// Initial wavefunctions. Widths are amplitude widths `d` in
/// `exp(−q²/(2d²))`; the density RMS width is `d/√2`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// Two identical Gaussians on the major axis at `(±a, 0)`, or on the
    /// minor axis at `(0, ±b)` when `rotated` is set.
    BinaryPeaks {
        waveguide: WaveguideParams,
        /// Across the channel.
        transverse_width: f64,
        /// Along the channel.
        azimuthal_width: f64,
        rotated: bool,
    },
    /// Gaussian ring profile following the ellipse.
    RingAnsatz { waveguide: WaveguideParams },
    GaussianPacket {
        center: (f64, f64),
        width_x: f64,
        width_y: f64,
    },
}

impl InitialState {
    /// Binary peaks whose cross-channel width matches the ring ansatz and
    /// whose along-channel width is one oscillator length.
    pub fn binary_peaks(waveguide: WaveguideParams) -> Self {
        InitialState::BinaryPeaks {
            waveguide,
            transverse_width: waveguide.channel_width(),
            azimuthal_width: 1.0,
            rotated: false,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            InitialState::BinaryPeaks { .. } => "binary_peaks",
            InitialState::RingAnsatz { .. } => "ring_ansatz",
            InitialState::GaussianPacket { .. } => "gaussian_packet",
        }
    }
}

fn gaussian(x: f64, y: f64, cx: f64, cy: f64, wx: f64, wy: f64) -> f64 {
    (-(x - cx).powi(2) / (2.0 * wx * wx) - (y - cy).powi(2) / (2.0 * wy * wy)).exp()
}

fn check_inside(grid: &GridSpec, cx: f64, cy: f64, wx: f64, wy: f64) -> Result<()> {
    let (xlo, xhi) = grid.extent_x();
    let (ylo, yhi) = grid.extent_y();
    if cx - 3.0 * wx < xlo || cx + 3.0 * wx > xhi || cy - 3.0 * wy < ylo || cy + 3.0 * wy > yhi {
        return Err(Error::Parameter(format!(
            "packet at ({cx}, {cy}) with widths ({wx}, {wy}) does not fit in [{xlo}, {xhi}]x[{ylo}, {yhi}]"
        )));
    }
    for (w, d, axis) in [(wx, grid.dx, "x"), (wy, grid.dy, "y")] {
        if !(w > 0.0) {
            return Err(Error::Parameter(format!("packet width {w} must be positive")));
        }
        if w < 3.0 * d {
            log::warn!("packet width {w} along {axis} spans fewer than three grid cells ({d})");
        }
    }
    Ok(())
}

pub fn make_initial_state(grid: &Arc<GridSpec>, kind: &InitialState) -> Result<ComplexField2D> {
    let field = match *kind {
        InitialState::BinaryPeaks {
            waveguide,
            transverse_width,
            azimuthal_width,
            rotated,
        } => {
            waveguide.validate()?;
            let (c, wx, wy) = if rotated {
                (
                    (0.0, waveguide.semi_minor()),
                    azimuthal_width,
                    transverse_width * waveguide.axis_ratio(),
                )
            } else {
                ((waveguide.semi_major, 0.0), transverse_width, azimuthal_width)
            };
            check_inside(grid, c.0, c.1, wx, wy)?;
            check_inside(grid, -c.0, -c.1, wx, wy)?;
            ComplexField2D::from_fn(grid.clone(), |x, y| {
                Complex64::new(
                    gaussian(x, y, c.0, c.1, wx, wy) + gaussian(x, y, -c.0, -c.1, wx, wy),
                    0.0,
                )
            })
        }
        InitialState::RingAnsatz { waveguide } => {
            waveguide.validate()?;
            ComplexField2D::from_fn(grid.clone(), |x, y| Complex64::new(ring_profile(&waveguide, x, y), 0.0))
        }
        InitialState::GaussianPacket {
            center,
            width_x,
            width_y,
        } => {
            check_inside(grid, center.0, center.1, width_x, width_y)?;
            ComplexField2D::from_fn(grid.clone(), |x, y| {
                Complex64::new(gaussian(x, y, center.0, center.1, width_x, width_y), 0.0)
            })
        }
    };
    field.normalized()
}
