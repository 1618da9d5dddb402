//! Uniform, centred 2D grids and their conjugate wavenumber grids.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// A uniform grid with `nx × ny` points. Field samples are stored row-major
/// with `x` as the slow index: sample `(i, j)` lives at `i * ny + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub x0: f64,
    pub y0: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub kx: Vec<f64>,
    pub ky: Vec<f64>,
}

/// Wavenumbers `2π n / (N d)` in standard DFT order (`0, 1, …, N/2−1, −N/2, …, −1`).
pub fn dft_wavenumbers(n: usize, d: f64) -> Vec<f64> {
    let span = n as f64 * d;
    (0..n)
        .map(|i| {
            let signed = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
            2.0 * PI * signed as f64 / span
        })
        .collect()
}

pub fn make_grid(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<GridSpec> {
    for (name, n) in [("nx", nx), ("ny", ny)] {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid.{name} = {n} must be a power of two and at least 2"
            )));
        }
    }
    for (name, d) in [("dx", dx), ("dy", dy)] {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Config(format!("grid.{name} = {d} must be positive")));
        }
    }
    let x0 = -(nx as f64) * dx / 2.0;
    let y0 = -(ny as f64) * dy / 2.0;
    Ok(GridSpec {
        nx,
        ny,
        dx,
        dy,
        x0,
        y0,
        x: (0..nx).map(|i| x0 + i as f64 * dx).collect(),
        y: (0..ny).map(|j| y0 + j as f64 * dy).collect(),
        kx: dft_wavenumbers(nx, dx),
        ky: dft_wavenumbers(ny, dy),
    })
}

impl GridSpec {
    /// 512 × 512 points at spacing 0.1.
    pub fn paper_preset() -> Self {
        make_grid(512, 512, 0.1, 0.1).expect("valid preset")
    }

    /// 256 × 256 points at spacing 0.2, same physical extent as the paper preset.
    pub fn ci_preset() -> Self {
        make_grid(256, 256, 0.2, 0.2).expect("valid preset")
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Grids are interchangeable when shape and geometry agree exactly.
    pub fn same_as(&self, other: &GridSpec) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.dx == other.dx
            && self.dy == other.dy
            && self.x0 == other.x0
            && self.y0 == other.y0
    }

    pub fn extent_x(&self) -> (f64, f64) {
        (self.x0, self.x0 + (self.nx - 1) as f64 * self.dx)
    }

    pub fn extent_y(&self) -> (f64, f64) {
        (self.y0, self.y0 + (self.ny - 1) as f64 * self.dy)
    }

    /// Index of the sample row/column that sits on the coordinate origin.
    /// On an even centred grid this is `n/2` exactly.
    pub fn origin_index(&self) -> (usize, usize) {
        (self.nx / 2, self.ny / 2)
    }

    /// Evaluate `f(x, y)` at every grid node.
    pub fn sample<T>(&self, mut f: impl FnMut(f64, f64) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        for &x in &self.x {
            for &y in &self.y {
                out.push(f(x, y));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn paper_grid_extent() {
        let g = make_grid(512, 512, 0.1, 0.1).unwrap();
        let (lo, hi) = g.extent_x();
        assert_abs_diff_eq!(lo, -25.6, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 25.5, epsilon = 1e-9);
        assert_abs_diff_eq!(g.nx as f64 * g.dx, 51.2, epsilon = 1e-12);
        assert_eq!(g.x[256], 0.0);
    }

    #[test]
    fn small_wavenumbers() {
        let g = make_grid(4, 4, 1.0, 1.0).unwrap();
        let expect = [0.0, PI / 2.0, -PI, -PI / 2.0];
        for (k, e) in g.kx.iter().zip(expect) {
            assert_abs_diff_eq!(*k, e, epsilon = 1e-15);
        }
        let g = make_grid(2, 2, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(g.kx[0], 0.0);
        assert_abs_diff_eq!(g.kx[1], -2.0 * PI, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(make_grid(6, 8, 0.1, 0.1).is_err());
        assert!(make_grid(1, 8, 0.1, 0.1).is_err());
        assert!(make_grid(8, 8, 0.0, 0.1).is_err());
        assert!(make_grid(8, 8, 0.1, -0.3).is_err());
    }

    #[test]
    fn wavenumbers_odd_symmetric_except_nyquist() {
        let g = make_grid(64, 32, 0.3, 0.7).unwrap();
        for ks in [&g.kx, &g.ky] {
            let n = ks.len();
            for i in 1..n {
                if i == n / 2 {
                    continue;
                }
                assert_abs_diff_eq!(ks[i], -ks[n - i], epsilon = 1e-12);
            }
        }
    }
}
