//! Closed-form references for free propagation and for the map between
//! circular and dispersion-managed elliptical dynamics.

use crate::error::{Error, Result};
use crate::evolution::{DispersionPair, Snapshot};
use crate::field::{Axis, ComplexField2D};
use crate::grid::GridSpec;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// A free Gaussian `exp(−(s − s₀)²/(2d²))` in each direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeGaussianPacket {
    /// Amplitude width `d`.
    pub d: f64,
    pub center: (f64, f64),
}

impl FreeGaussianPacket {
    pub fn new(d: f64, center: (f64, f64)) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Parameter(format!("packet width {d} must be positive")));
        }
        Ok(FreeGaussianPacket { d, center })
    }

    /// RMS width of the density, `d/√2`.
    pub fn w0(&self) -> f64 {
        self.d / 2f64.sqrt()
    }

    /// Exact free evolution under `i∂ₜψ = −(α/2)∂²ₓψ − (β/2)∂²ᵧψ`.
    pub fn field_at(&self, grid: &Arc<GridSpec>, t: f64, disp: DispersionPair) -> ComplexField2D {
        let d2 = self.d * self.d;
        let axis = |s: f64, c: f64, coeff: f64| {
            let q = Complex64::new(1.0, coeff * t / d2);
            (1.0 / (PI * d2)).powf(0.25) / q.sqrt() * (-(s - c).powi(2) / (2.0 * d2 * q)).exp()
        };
        ComplexField2D::from_fn(grid.clone(), |x, y| {
            axis(x, self.center.0, disp.alpha) * axis(y, self.center.1, disp.beta)
        })
    }
}

/// `w_t² = w₀² + t²/(4w₀²)`.
pub fn free_width(t: f64, w0: f64) -> f64 {
    w0 * w0 + t * t / (4.0 * w0 * w0)
}

fn check_eccentricity(eccentricity: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eccentricity) {
        return Err(Error::Parameter(format!(
            "eccentricity {eccentricity} must lie in [0, 1)"
        )));
    }
    Ok(1.0 - eccentricity * eccentricity)
}

/// Managed-dispersion widths `(w_a,t², w_b,t²)` with
/// `w_b,t² = [w_a0² + t²/(4w_a0²)]/(1 − ε²)` and `w_a,t² = (1 − ε²)·w_b,t²`.
pub fn managed_width_ratio(eccentricity: f64, t: f64, wa0: f64) -> Result<(f64, f64)> {
    let s2 = check_eccentricity(eccentricity)?;
    let wb2 = free_width(t, wa0) / s2;
    Ok((s2 * wb2, wb2))
}

/// Without dispersion management:
/// `w_b,t² = [w_a0² + t²(1 − ε²)²/(4w_a0²)]/(1 − ε²)`.
pub fn unmanaged_width(eccentricity: f64, t: f64, wa0: f64) -> Result<f64> {
    let s2 = check_eccentricity(eccentricity)?;
    Ok((wa0 * wa0 + t * t * s2 * s2 / (4.0 * wa0 * wa0)) / s2)
}

/// Bilinear interpolation of `f` at `(x, y)`. Points outside the sampled
/// rectangle are a range error.
pub fn interpolate(f: &ComplexField2D, x: f64, y: f64) -> Result<Complex64> {
    let g = f.grid();
    let u = (x - g.x0) / g.dx;
    let v = (y - g.y0) / g.dy;
    let slack = 1e-9;
    let (umax, vmax) = ((g.nx - 1) as f64, (g.ny - 1) as f64);
    if u < -slack || v < -slack || u > umax + slack || v > vmax + slack {
        return Err(Error::Range(format!("point ({x}, {y}) lies outside the source grid")));
    }
    let u = u.clamp(0.0, umax);
    let v = v.clamp(0.0, vmax);
    let i = (u.floor() as usize).min(g.nx - 2);
    let j = (v.floor() as usize).min(g.ny - 2);
    let (fu, fv) = (u - i as f64, v - j as f64);
    Ok(f.at(i, j) * ((1.0 - fu) * (1.0 - fv))
        + f.at(i + 1, j) * (fu * (1.0 - fv))
        + f.at(i, j + 1) * ((1.0 - fu) * fv)
        + f.at(i + 1, j + 1) * (fu * fv))
}

/// `ψ(x, y) = ψ_c(x, y/σ)/√σ`, `σ = sqrt(1 − ε²)`, sampled on `target`.
pub fn circle_to_ellipse(
    circular: &ComplexField2D,
    eccentricity: f64,
    target: &Arc<GridSpec>,
) -> Result<ComplexField2D> {
    let sigma = check_eccentricity(eccentricity)?.sqrt();
    remap(circular, target, 1.0 / sigma, 1.0 / sigma.sqrt())
}

/// Inverse of [`circle_to_ellipse`]: `ψ_c(x, Y) = √σ ψ(x, σY)`.
pub fn ellipse_to_circle(
    elliptic: &ComplexField2D,
    eccentricity: f64,
    target: &Arc<GridSpec>,
) -> Result<ComplexField2D> {
    let sigma = check_eccentricity(eccentricity)?.sqrt();
    remap(elliptic, target, sigma, sigma.sqrt())
}

fn remap(src: &ComplexField2D, target: &Arc<GridSpec>, y_factor: f64, amp: f64) -> Result<ComplexField2D> {
    let mut values = Vec::with_capacity(target.len());
    for &x in &target.x {
        for &y in &target.y {
            values.push(interpolate(src, x, y * y_factor)? * amp);
        }
    }
    ComplexField2D::new(target.clone(), values)
}

/// Predicted DM-elliptical snapshots from a circular run.
pub fn rescaled_circular_reference(
    circular: &[Snapshot],
    eccentricity: f64,
    target: &Arc<GridSpec>,
) -> Result<Vec<Snapshot>> {
    circular
        .iter()
        .map(|s| {
            Ok(Snapshot {
                requested: s.requested,
                time: s.time,
                step: s.step,
                field: circle_to_ellipse(&s.field, eccentricity, target)?,
            })
        })
        .collect()
}

/// RMS spread of `|ψ|²` along `axis` inside the box `|x − cx| ≤ hx, |y − cy| ≤ hy`.
pub fn windowed_width(f: &ComplexField2D, center: (f64, f64), half: (f64, f64), axis: Axis) -> Result<f64> {
    let g = f.grid();
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for i in 0..g.nx {
        let x = g.x[i];
        if (x - center.0).abs() > half.0 {
            continue;
        }
        for j in 0..g.ny {
            let y = g.y[j];
            if (y - center.1).abs() > half.1 {
                continue;
            }
            let w = f.at(i, j).norm_sqr();
            let q = match axis {
                Axis::X => x,
                Axis::Y => y,
            };
            m0 += w;
            m1 += w * q;
            m2 += w * q * q;
        }
    }
    if !(m0 > 0.0) {
        return Err(Error::DegenerateField(format!(
            "no weight in the window around ({}, {})",
            center.0, center.1
        )));
    }
    let mean = m1 / m0;
    Ok((m2 / m0 - mean * mean).max(0.0).sqrt())
}
