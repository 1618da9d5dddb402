use crate::error::{Error, Result};
use crate::evolution::{DispersionPair, TimeSeries};
use crate::potentials::WaveguideParams;
use std::f64::consts::PI;

/// A reduced fraction `p/q` in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrFraction {
    p: u32,
    q: u32,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl FrFraction {
    /// Non-coprime input is reduced (with a warning).
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 || p > q {
            return Err(Error::Parameter(format!("fraction {p}/{q} must lie in (0, 1]")));
        }
        let d = gcd(p, q);
        if d != 1 {
            log::warn!("fraction {p}/{q} is not reduced; using {}/{}", p / d, q / d);
        }
        Ok(FrFraction { p: p / d, q: q / d })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// 1/8, 1/6, 1/4, 1/2, 1/1.
    pub fn snapshot_set() -> Vec<FrFraction> {
        [(1, 8), (1, 6), (1, 4), (1, 2), (1, 1)]
            .into_iter()
            .map(|(p, q)| FrFraction { p, q })
            .collect()
    }
}

/// `a ∫₀^{2π} sqrt(1 − ε² sin²φ) dφ`.
///
/// The integrand is smooth and periodic, so the trapezoid rule converges
/// geometrically; the node count doubles until successive estimates agree
/// to 1e-14 relative.
pub fn ellipse_circumference(a: f64, eccentricity: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eccentricity) {
        return Err(Error::Parameter(format!(
            "eccentricity {eccentricity} must lie in [0, 1)"
        )));
    }
    if !(a > 0.0) {
        return Err(Error::Parameter(format!("semi-major axis {a} must be positive")));
    }
    let e2 = eccentricity * eccentricity;
    let f = |phi: f64| (1.0 - e2 * phi.sin().powi(2)).sqrt();
    // Quarter period suffices by symmetry; nodes at φ = k·(π/2)/n.
    let mut n = 8usize;
    let h = |n: usize| 0.5 * PI / n as f64;
    let mut sum = 0.5 * (f(0.0) + f(0.5 * PI)) + (1..n).map(|k| f(k as f64 * h(n))).sum::<f64>();
    let mut estimate = sum * h(n);
    for _ in 0..24 {
        let fresh: f64 = (0..n).map(|k| f((2 * k + 1) as f64 * h(2 * n))).sum();
        sum += fresh;
        n *= 2;
        let next = sum * h(n);
        if (next - estimate).abs() <= 1e-14 * next {
            return Ok(4.0 * a * next);
        }
        estimate = next;
    }
    Ok(4.0 * a * estimate)
}

/// `T_r = C² / (4π)`.
pub fn revival_time_predict(circumference: f64) -> Result<f64> {
    if !(circumference > 0.0) {
        return Err(Error::Parameter(format!(
            "circumference {circumference} must be positive"
        )));
    }
    Ok(circumference * circumference / (4.0 * PI))
}

/// Predicted revival time of binary peaks in a waveguide under the given
/// dispersion. With `β/α = 1 − ε²` the dynamics is that of the circle of
/// radius `a`; otherwise the ellipse circumference sets the scale.
pub fn predicted_revival_time(w: &WaveguideParams, disp: DispersionPair) -> Result<f64> {
    let managed = DispersionPair::managed(w.eccentricity);
    let is_managed = w.eccentricity > 0.0 && ((disp.beta / disp.alpha) - managed.beta).abs() < 1e-9;
    let c = if is_managed {
        2.0 * PI * w.semi_major
    } else {
        ellipse_circumference(w.semi_major, w.eccentricity)?
    };
    revival_time_predict(c)
}

/// `(p/q)·T_r` for each fraction.
pub fn fr_times(revival_time: f64, fractions: &[FrFraction]) -> Vec<f64> {
    fractions.iter().map(|f| f.value() * revival_time).collect()
}

/// Default detection window `[0.5 T, 1.3 T]` around a predicted revival.
pub fn revival_window(predicted: f64) -> (f64, f64) {
    (0.5 * predicted, 1.3 * predicted)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalEstimate {
    pub time: f64,
    /// Interpolated peak value of S.
    pub survival: f64,
    /// Index of the largest sample inside the window.
    pub index: usize,
}

/// Location of the largest survival value inside `window`, refined by a
/// parabola through the maximal sample and its two neighbours.
pub fn measure_revival_time(ts: &TimeSeries, window: (f64, f64)) -> Result<RevivalEstimate> {
    let (lo, hi) = window;
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::Detection(format!(
            "revival window [{lo}, {hi}] must be non-empty and exclude t = 0"
        )));
    }
    let inside: Vec<usize> = (0..ts.len())
        .filter(|&k| ts.times[k] >= lo && ts.times[k] <= hi)
        .collect();
    if inside.len() < 3 {
        return Err(Error::Detection(format!(
            "only {} samples in revival window [{lo}, {hi}]",
            inside.len()
        )));
    }
    let best = *inside
        .iter()
        .max_by(|&&a, &&b| ts.survival[a].total_cmp(&ts.survival[b]))
        .expect("non-empty");
    if best == inside[0] || best == *inside.last().expect("non-empty") {
        return Err(Error::Detection(format!(
            "survival is monotone over [{lo}, {hi}]; the maximum sits on the window edge"
        )));
    }
    let (t0, t1, t2) = (ts.times[best - 1], ts.times[best], ts.times[best + 1]);
    let (s0, s1, s2) = (ts.survival[best - 1], ts.survival[best], ts.survival[best + 1]);
    // Vertex of the parabola through three (possibly unevenly spaced) points.
    let d0 = (s1 - s0) / (t1 - t0);
    let d1 = (s2 - s1) / (t2 - t1);
    let curvature = (d1 - d0) / (t2 - t0);
    let (time, peak) = if curvature < 0.0 {
        let tv = 0.5 * (t0 + t1) - d0 / (2.0 * curvature);
        let tv = tv.clamp(t0, t2);
        let sv = s0 + d0 * (tv - t0) + curvature * (tv - t0) * (tv - t1);
        (tv, sv.max(s1))
    } else {
        (t1, s1)
    };
    Ok(RevivalEstimate {
        time,
        survival: peak,
        index: best,
    })
}
