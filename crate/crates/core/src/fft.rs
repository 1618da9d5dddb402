//! 2D FFT built from rustfft 1D plans.
//!
//! The spectral layout used by the stepper is *transposed*: after
//! [`Fft2::forward_t`] the coefficient for `(kx[i], ky[j])` sits at
//! `j * nx + i`. Skipping the transpose back saves two passes per step.
//! Transforms are unnormalized in both directions.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

const BLOCK: usize = 16;

pub struct Fft2 {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish()
    }
}

/// `dst[j * rows + i] = src[i * cols + j]` for a `rows × cols` source.
pub fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    debug_assert_eq!(src.len(), rows * cols);
    debug_assert_eq!(dst.len(), rows * cols);
    for ib in (0..rows).step_by(BLOCK) {
        for jb in (0..cols).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(rows) {
                for j in jb..(jb + BLOCK).min(cols) {
                    dst[j * rows + i] = src[i * cols + j];
                }
            }
        }
    }
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd_x = planner.plan_fft_forward(nx);
        let inv_x = planner.plan_fft_inverse(nx);
        let fwd_y = planner.plan_fft_forward(ny);
        let inv_y = planner.plan_fft_inverse(ny);
        let scratch_len = [&fwd_x, &inv_x, &fwd_y, &inv_y]
            .iter()
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Fft2 {
            nx,
            ny,
            fwd_x,
            inv_x,
            fwd_y,
            inv_y,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Forward transform of `data` (natural layout) into `spec` (transposed
    /// layout). `data` is used as workspace and left holding partial results.
    pub fn forward_t(&mut self, data: &mut [Complex64], spec: &mut [Complex64]) {
        self.fwd_y.process_with_scratch(data, &mut self.scratch);
        transpose(data, spec, self.nx, self.ny);
        self.fwd_x.process_with_scratch(spec, &mut self.scratch);
    }

    /// Inverse of [`Fft2::forward_t`], scaled by `nx·ny`. `spec` is clobbered.
    pub fn inverse_t(&mut self, spec: &mut [Complex64], data: &mut [Complex64]) {
        self.inv_x.process_with_scratch(spec, &mut self.scratch);
        transpose(spec, data, self.ny, self.nx);
        self.inv_y.process_with_scratch(data, &mut self.scratch);
    }

    /// Forward transform in natural layout: `out[i*ny+j]` holds `(kx[i], ky[j])`.
    pub fn forward(&mut self, data: &[Complex64]) -> Vec<Complex64> {
        let mut a = data.to_vec();
        let mut b = vec![Complex64::new(0.0, 0.0); a.len()];
        self.forward_t(&mut a, &mut b);
        transpose(&b, &mut a, self.ny, self.nx);
        a
    }

    /// Normalized inverse of [`Fft2::forward`].
    pub fn inverse(&mut self, spec: &[Complex64]) -> Vec<Complex64> {
        let mut a = vec![Complex64::new(0.0, 0.0); spec.len()];
        transpose(spec, &mut a, self.nx, self.ny);
        let mut out = vec![Complex64::new(0.0, 0.0); spec.len()];
        self.inverse_t(&mut a, &mut out);
        let s = 1.0 / self.len() as f64;
        for v in &mut out {
            *v *= s;
        }
        out
    }
}
