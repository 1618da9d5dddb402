use crate::error::{Error, Result};
use crate::field::RealField2D;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// A fringe peak must exceed this fraction of the zero-frequency magnitude
/// of the windowed profile. Hann sidelobes sit near 0.027.
pub const SPECTRAL_FLOOR: f64 = 0.035;

const ZERO_PAD: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct InterferencePattern {
    pub density: RealField2D,
    /// Fringe period along x, in grid length units.
    pub period_u: f64,
    /// Fringe period along y.
    pub period_v: f64,
}

/// Period of the strongest non-zero spatial frequency in a uniformly
/// sampled profile.
///
/// The profile is Hann-windowed and zero-padded eightfold. The search starts
/// past the first spectral minimum so the zero-frequency lobe (the envelope)
/// is never picked; the winning bin is refined with a parabola through the
/// log-magnitudes of its neighbours.
pub fn dominant_period(profile: &[f64], spacing: f64) -> Result<f64> {
    let n = profile.len();
    if n < 8 {
        return Err(Error::Detection(format!("profile of {n} samples is too short")));
    }
    let m = n * ZERO_PAD;
    let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); m];
    for (k, &p) in profile.iter().enumerate() {
        let hann = 0.5 - 0.5 * (2.0 * PI * k as f64 / n as f64).cos();
        buf[k] = Complex64::new(p * hann, 0.0);
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let mag: Vec<f64> = buf[..m / 2].iter().map(|c| c.norm()).collect();
    let dc = mag[0];
    if !(dc > 0.0) {
        return Err(Error::Detection("profile has no weight".into()));
    }
    let mut start = 1;
    while start + 1 < mag.len() && mag[start + 1] < mag[start] {
        start += 1;
    }
    let (best, &peak) = mag[start..]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, v)| (k + start, v))
        .ok_or_else(|| Error::Detection("empty spectrum".into()))?;
    if peak < SPECTRAL_FLOOR * dc || best == start || best + 1 >= mag.len() {
        return Err(Error::Detection(format!(
            "no fringe peak above the noise floor (peak/dc = {:.3e})",
            peak / dc
        )));
    }
    let (l, c, r) = (mag[best - 1].ln(), mag[best].ln(), mag[best + 1].ln());
    let denom = l - 2.0 * c + r;
    let shift = if denom < 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
    let bin = best as f64 + shift.clamp(-0.5, 0.5);
    Ok(m as f64 * spacing / bin)
}

/// Fringe periods of a 2D pattern from its two axis-integrated profiles.
pub fn fringe_periods(density: &RealField2D) -> Result<InterferencePattern> {
    let g = density.grid();
    let mut px = vec![0.0; g.nx];
    let mut py = vec![0.0; g.ny];
    for (i, sx) in px.iter_mut().enumerate() {
        for (j, sy) in py.iter_mut().enumerate() {
            let v = density.at(i, j);
            *sx += v * g.dy;
            *sy += v * g.dx;
        }
    }
    let period_u = dominant_period(&px, g.dx)?;
    let period_v = dominant_period(&py, g.dy)?;
    if period_u < 2.0 * g.dx || period_v < 2.0 * g.dy {
        return Err(Error::Detection(format!(
            "periods ({period_u}, {period_v}) fall below the grid Nyquist limit"
        )));
    }
    Ok(InterferencePattern {
        density: density.clone(),
        period_u,
        period_v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    #[test]
    fn synthetic_lattice() {
        let g = Arc::new(make_grid(256, 256, 0.2, 0.2).unwrap());
        let d = RealField2D::from_fn(g, |x, y| {
            (1.0 + (2.0 * PI * x / 3.0).cos()) * (1.0 + (2.0 * PI * y / 7.0).cos())
        });
        let p = fringe_periods(&d).unwrap();
        assert_relative_eq!(p.period_u, 3.0, max_relative = 5e-3);
        assert_relative_eq!(p.period_v, 7.0, max_relative = 5e-3);
    }

    #[test]
    fn fringes_under_an_envelope() {
        let g = Arc::new(make_grid(256, 256, 0.1, 0.1).unwrap());
        let d = RealField2D::from_fn(g, |x, y| {
            let env = (-(x * x + y * y) / 30.0).exp();
            env * (1.0 + 0.8 * (2.0 * PI * x / 1.25).cos()) * (1.0 + 0.8 * (2.0 * PI * y / 2.9).cos())
        });
        let p = fringe_periods(&d).unwrap();
        assert_relative_eq!(p.period_u, 1.25, max_relative = 1e-2);
        assert_relative_eq!(p.period_v, 2.9, max_relative = 1e-2);
    }

    #[test]
    fn featureless_density_has_no_fringes() {
        let g = Arc::new(make_grid(128, 128, 0.2, 0.2).unwrap());
        let d = RealField2D::from_fn(g.clone(), |_, _| 1.0);
        assert!(matches!(fringe_periods(&d), Err(Error::Detection(_))));
        let blob = RealField2D::from_fn(g, |x, y| (-(x * x + y * y) / 4.0).exp());
        assert!(matches!(fringe_periods(&blob), Err(Error::Detection(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]
            #[test]
            fn periods_scale_with_pattern(s in 0.6f64..1.6) {
                let g = Arc::new(make_grid(256, 256, 0.2, 0.2).unwrap());
                let pattern = |scale: f64| RealField2D::from_fn(g.clone(), move |x, y| {
                    let (x, y) = (x / scale, y / scale);
                    (-(x * x + y * y) / 60.0).exp()
                        * (1.0 + (2.0 * PI * x / 2.0).cos())
                        * (1.0 + (2.0 * PI * y / 3.3).cos())
                });
                let base = fringe_periods(&pattern(1.0)).unwrap();
                let scaled = fringe_periods(&pattern(s)).unwrap();
                prop_assert!((scaled.period_u / base.period_u / s - 1.0).abs() < 1.5e-2);
                prop_assert!((scaled.period_v / base.period_v / s - 1.0).abs() < 1.5e-2);
            }
        }
    }
}
