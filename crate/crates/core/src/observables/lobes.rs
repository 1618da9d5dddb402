use crate::error::Result;
use crate::field::ComplexField2D;
use crate::potentials::WaveguideParams;
use std::f64::consts::PI;

/// Settings for counting condensate fragments around the ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LobeCounter {
    pub bins: usize,
    /// Fraction of the largest bin a peak must exceed.
    pub threshold: f64,
    /// Minimum prominence of a peak, as a fraction of the largest bin.
    pub prominence: f64,
    /// Annulus in units of the elliptical radius normalized to the ring.
    pub inner: f64,
    pub outer: f64,
}

impl Default for LobeCounter {
    fn default() -> Self {
        LobeCounter {
            bins: 256,
            threshold: 0.2,
            prominence: 0.1,
            inner: 0.5,
            outer: 1.5,
        }
    }
}

const RADIAL_SAMPLES: usize = 48;

/// Below this fraction of the norm inside the annulus there is nothing to count.
const MIN_ANNULUS_WEIGHT: f64 = 1e-3;

fn density_at(f: &ComplexField2D, x: f64, y: f64) -> f64 {
    let g = f.grid();
    let u = (x - g.x0) / g.dx;
    let v = (y - g.y0) / g.dy;
    if u < 0.0 || v < 0.0 || u >= (g.nx - 1) as f64 || v >= (g.ny - 1) as f64 {
        return 0.0;
    }
    let (i, j) = (u as usize, v as usize);
    let (fu, fv) = (u - i as f64, v - j as f64);
    f.at(i, j).norm_sqr() * (1.0 - fu) * (1.0 - fv)
        + f.at(i + 1, j).norm_sqr() * fu * (1.0 - fv)
        + f.at(i, j + 1).norm_sqr() * (1.0 - fu) * fv
        + f.at(i + 1, j + 1).norm_sqr() * fu * fv
}

/// Weight of `|ψ|²` in equal wedges of the elliptical angle φ, where
/// `x = r a cos φ`, `y = r b sin φ` and `inner ≤ r ≤ outer`. Wedge `k`
/// is centred on `φ = 2π(k + ½)/n`; the density is interpolated along the
/// central ray.
pub fn angular_density(f: &ComplexField2D, w: &WaveguideParams, counter: &LobeCounter) -> Vec<f64> {
    let (a, b) = (w.semi_major, w.semi_minor());
    let n = counter.bins.max(4);
    let dphi = 2.0 * PI / n as f64;
    let dr = (counter.outer - counter.inner) / RADIAL_SAMPLES as f64;
    (0..n)
        .map(|k| {
            let phi = (k as f64 + 0.5) * dphi;
            let (c, s) = (phi.cos(), phi.sin());
            (0..RADIAL_SAMPLES)
                .map(|m| {
                    let r = counter.inner + (m as f64 + 0.5) * dr;
                    density_at(f, r * a * c, r * b * s) * r
                })
                .sum::<f64>()
                * a
                * b
                * dr
                * dphi
        })
        .collect()
}

/// Local maxima of a periodic sequence that clear both the height
/// threshold and the prominence threshold.
fn count_peaks(rho: &[f64], threshold: f64, prominence: f64) -> usize {
    let n = rho.len();
    let top = rho.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) {
        return 0;
    }
    let at = |k: isize| rho[k.rem_euclid(n as isize) as usize];
    let mut count = 0;
    for k in 0..n as isize {
        let h = at(k);
        // plateaus count once, at their left edge
        if !(h > at(k - 1) && h >= at(k + 1)) || h < threshold * top {
            continue;
        }
        let mut base = f64::NEG_INFINITY;
        for dir in [-1isize, 1] {
            let mut lowest = h;
            let mut s = 1;
            while s < n as isize {
                let v = at(k + dir * s);
                if v > h || (dir == -1 && v == h) {
                    break;
                }
                lowest = lowest.min(v);
                s += 1;
            }
            base = base.max(lowest);
        }
        // the global maximum never meets a higher point; its base is the
        // deepest valley on the way around
        if h - base >= prominence * top || (base == h && h == top) {
            count += 1;
        }
    }
    count
}

/// Number of separated fragments of `f` around the waveguide.
pub fn count_fr_lobes(f: &ComplexField2D, w: &WaveguideParams, counter: &LobeCounter) -> Result<usize> {
    w.validate()?;
    let rho = angular_density(f, w, counter);
    let total = f.norm_sq();
    if !(rho.iter().sum::<f64>() >= MIN_ANNULUS_WEIGHT * total) {
        return Ok(0);
    }
    Ok(count_peaks(&rho, counter.threshold, counter.prominence))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{make_initial_state, InitialState};
    use crate::grid::make_grid;
    use num_complex::Complex64;
    use std::sync::Arc;

    fn lobes_at(angles: &[f64], w: &WaveguideParams) -> ComplexField2D {
        let g = Arc::new(make_grid(128, 128, 0.25, 0.25).unwrap());
        let (a, b) = (w.semi_major, w.semi_minor());
        ComplexField2D::from_fn(g, |x, y| {
            let s: f64 = angles
                .iter()
                .map(|t| {
                    let (cx, cy) = (a * t.cos(), b * t.sin());
                    (-((x - cx).powi(2) + (y - cy).powi(2)) / 1.0).exp()
                })
                .sum();
            Complex64::new(s, 0.0)
        })
        .normalized()
        .unwrap()
    }

    #[test]
    fn binary_peaks_have_two_lobes() {
        let w = WaveguideParams::default();
        let g = Arc::new(make_grid(128, 128, 0.25, 0.25).unwrap());
        let f = make_initial_state(&g, &InitialState::binary_peaks(w)).unwrap();
        assert_eq!(count_fr_lobes(&f, &w, &LobeCounter::default()).unwrap(), 2);
    }

    #[test]
    fn four_lobes_on_ellipse() {
        let w = WaveguideParams::default().with_eccentricity(0.75);
        let f = lobes_at(&[0.0, PI / 2.0, PI, 1.5 * PI], &w);
        assert_eq!(count_fr_lobes(&f, &w, &LobeCounter::default()).unwrap(), 4);
    }

    #[test]
    fn invariant_under_phase_and_scale() {
        let w = WaveguideParams::default();
        let mut f = lobes_at(&[0.3, 2.0, 4.1], &w);
        let c = LobeCounter::default();
        let n0 = count_fr_lobes(&f, &w, &c).unwrap();
        f.scale(Complex64::from_polar(3.7, 1.1));
        assert_eq!(count_fr_lobes(&f, &w, &c).unwrap(), n0);
        assert_eq!(n0, 3);
    }

    #[test]
    fn empty_annulus_has_no_lobes() {
        let w = WaveguideParams::default();
        let g = Arc::new(make_grid(128, 128, 0.25, 0.25).unwrap());
        let f = ComplexField2D::from_fn(g, |x, y| Complex64::new((-(x * x + y * y)).exp(), 0.0));
        assert_eq!(count_fr_lobes(&f, &w, &LobeCounter::default()).unwrap(), 0);
    }

    #[test]
    fn peak_counting_rules() {
        assert_eq!(count_peaks(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0], 0.2, 0.1), 3);
        // shallow ripple on one lobe is not a second peak
        assert_eq!(count_peaks(&[0.0, 0.9, 0.85, 1.0, 0.2, 0.0], 0.2, 0.1), 1);
        // plateau
        assert_eq!(count_peaks(&[0.0, 1.0, 1.0, 0.0], 0.2, 0.1), 1);
        assert_eq!(count_peaks(&[1.0; 8], 0.2, 0.1), 0);
        assert_eq!(count_peaks(&[0.0; 8], 0.2, 0.1), 0);
    }
}
