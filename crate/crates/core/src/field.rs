//! Complex and real fields sampled on a [`GridSpec`].

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use num_complex::Complex64;
use std::sync::Arc;

/// Tolerance on `|norm² − 1|` for operations that require a unit-norm field.
pub const UNIT_NORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    grid: Arc<GridSpec>,
    values: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealField2D {
    grid: Arc<GridSpec>,
    values: Vec<f64>,
}

fn check_len(grid: &GridSpec, len: usize) -> Result<()> {
    if grid.len() != len {
        return Err(Error::GridMismatch(format!(
            "{} samples supplied for a {}x{} grid",
            len, grid.nx, grid.ny
        )));
    }
    Ok(())
}

pub(crate) fn ensure_same_grid(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "{}x{} (dx={}, dy={}) vs {}x{} (dx={}, dy={})",
            a.nx, a.ny, a.dx, a.dy, b.nx, b.ny, b.dx, b.dy
        )))
    }
}

impl ComplexField2D {
    pub fn new(grid: Arc<GridSpec>, values: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        Ok(ComplexField2D { grid, values })
    }

    pub fn zeros(grid: Arc<GridSpec>) -> Self {
        let n = grid.len();
        ComplexField2D {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_fn(grid: Arc<GridSpec>, f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let values = grid.sample(f);
        ComplexField2D { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[self.grid.index(i, j)]
    }

    /// `Σ|ψ|² dx dy`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn density(&self) -> RealField2D {
        RealField2D {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.norm_sqr()).collect(),
        }
    }

    pub fn scale(&mut self, s: Complex64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `Σ conj(self)·other dx dy`.
    pub fn inner(&self, other: &ComplexField2D) -> Result<Complex64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.cell_area())
    }

    pub fn require_unit_norm(&self, what: &str) -> Result<()> {
        let n = self.norm_sq();
        if (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::Precondition(format!(
                "{what} requires a unit-norm field (norm² = {n})"
            )));
        }
        Ok(())
    }

    /// Rescale to unit norm. Relative phases are untouched.
    pub fn normalized(&self) -> Result<ComplexField2D> {
        let mut out = self.clone();
        out.normalize_in_place()?;
        Ok(out)
    }

    pub fn normalize_in_place(&mut self) -> Result<()> {
        let n = self.norm_sq();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::DegenerateField(format!(
                "cannot normalize a field with norm² = {n}"
            )));
        }
        let s = 1.0 / n.sqrt();
        for v in &mut self.values {
            *v *= s;
        }
        Ok(())
    }

    /// Root-mean-square spread along `axis`, weighted by `|ψ|²`.
    pub fn second_moment_width(&self, axis: Axis) -> Result<f64> {
        self.require_unit_norm("second_moment_width")?;
        Ok(self.density().moment_width(axis))
    }

    /// Max `|ψ_a − ψ_b|` over all samples.
    pub fn max_abs_diff(&self, other: &ComplexField2D) -> Result<f64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// Convenience wrapper around [`ComplexField2D::normalized`].
pub fn normalize(f: &ComplexField2D) -> Result<ComplexField2D> {
    f.normalized()
}

/// Convenience wrapper around [`ComplexField2D::second_moment_width`].
pub fn second_moment_width(f: &ComplexField2D, axis: Axis) -> Result<f64> {
    f.second_moment_width(axis)
}

impl RealField2D {
    pub fn new(grid: Arc<GridSpec>, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        Ok(RealField2D { grid, values })
    }

    pub fn from_fn(grid: Arc<GridSpec>, f: impl FnMut(f64, f64) -> f64) -> Self {
        let values = grid.sample(f);
        RealField2D { grid, values }
    }

    pub fn zeros(grid: Arc<GridSpec>) -> Self {
        let n = grid.len();
        RealField2D {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Σ f dx dy`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn max_abs_diff(&self, other: &RealField2D) -> Result<f64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Treating the field as a (not necessarily normalized) weight, the RMS
    /// spread of the coordinate along `axis`.
    pub fn moment_width(&self, axis: Axis) -> f64 {
        let g = &self.grid;
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for i in 0..g.nx {
            for j in 0..g.ny {
                let w = self.values[g.index(i, j)];
                let q = match axis {
                    Axis::X => g.x[i],
                    Axis::Y => g.y[j],
                };
                m0 += w;
                m1 += w * q;
                m2 += w * q * q;
            }
        }
        let mean = m1 / m0;
        (m2 / m0 - mean * mean).max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn gaussian(grid: Arc<GridSpec>, cx: f64) -> ComplexField2D {
        ComplexField2D::from_fn(grid, |x, y| {
            Complex64::new((-((x - cx).powi(2) + y * y) / 2.0).exp() / PI.sqrt(), 0.0)
        })
    }

    #[test]
    fn gaussian_width_and_translation() {
        let g = Arc::new(make_grid(128, 128, 0.1, 0.1).unwrap());
        let f = gaussian(g.clone(), 0.0);
        assert_abs_diff_eq!(f.norm_sq(), 1.0, epsilon = 1e-12);
        let w = f.second_moment_width(Axis::X).unwrap();
        assert_abs_diff_eq!(w, 1.0 / 2f64.sqrt(), epsilon = 1e-10);
        let shifted = gaussian(g, 1.3);
        assert_abs_diff_eq!(shifted.second_moment_width(Axis::X).unwrap(), w, epsilon = 1e-10);
        assert_abs_diff_eq!(shifted.second_moment_width(Axis::Y).unwrap(), w, epsilon = 1e-10);
    }

    #[test]
    fn width_requires_unit_norm() {
        let g = Arc::new(make_grid(32, 32, 0.2, 0.2).unwrap());
        let mut f = gaussian(g, 0.0);
        f.scale(Complex64::new(2.0, 0.0));
        assert!(matches!(f.second_moment_width(Axis::X), Err(Error::Precondition(_))));
    }

    #[test]
    fn constant_field_normalizes_to_inverse_sqrt_area() {
        let g = Arc::new(make_grid(16, 8, 0.5, 0.25).unwrap());
        let area: f64 = 16.0 * 0.5 * 8.0 * 0.25;
        let f = ComplexField2D::from_fn(g, |_, _| Complex64::new(3.0, -1.0));
        let n = f.normalized().unwrap();
        let expect = Complex64::new(3.0, -1.0) / Complex64::new(10f64.sqrt(), 0.0) / area.sqrt();
        for v in n.values() {
            assert_abs_diff_eq!((v - expect).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_field_is_degenerate() {
        let g = Arc::new(make_grid(8, 8, 0.5, 0.5).unwrap());
        let f = ComplexField2D::zeros(g);
        assert!(matches!(f.normalized(), Err(Error::DegenerateField(_))));
    }

    #[test]
    fn inner_product_rejects_other_grids() {
        let a = ComplexField2D::zeros(Arc::new(make_grid(8, 8, 0.5, 0.5).unwrap()));
        let b = ComplexField2D::zeros(Arc::new(make_grid(8, 8, 0.25, 0.5).unwrap()));
        assert!(matches!(a.inner(&b), Err(Error::GridMismatch(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn normalize_is_idempotent(seed in proptest::collection::vec(-5.0f64..5.0, 2 * 64)) {
                let g = Arc::new(make_grid(8, 8, 0.3, 0.4).unwrap());
                let vals: Vec<Complex64> = seed.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
                prop_assume!(vals.iter().any(|v| v.norm() > 1e-3));
                let f = ComplexField2D::new(g, vals).unwrap();
                let once = f.normalized().unwrap();
                let twice = once.normalized().unwrap();
                prop_assert!((once.norm_sq() - 1.0).abs() < 1e-12);
                prop_assert!(once.max_abs_diff(&twice).unwrap() < 1e-14);
            }
        }
    }
}
