//! Shared setup for the solver benchmarks.

use atomtronics_core::evolution::{make_initial_state, InitialState, Mode, SplitStepper};
use atomtronics_core::{elliptic_ring_potential, make_grid, ComplexField2D, DispersionPair, WaveguideParams};
use num_complex::Complex64;
use std::sync::Arc;

/// Ring state and real-time stepper on an `n × n` grid with spacing 0.2.
pub fn ring_case(n: usize, eccentricity: f64, dt: f64) -> (ComplexField2D, SplitStepper) {
    let sigma = (1.0 - eccentricity * eccentricity).sqrt();
    let grid = Arc::new(make_grid(n, n, 0.2, 0.2 * sigma).expect("grid"));
    let w = WaveguideParams::new(50.0, 1.0, 10.0, eccentricity).expect("waveguide");
    let v = Arc::new(elliptic_ring_potential(&grid, &w).expect("potential"));
    let psi = make_initial_state(&grid, &InitialState::binary_peaks(w.with_eccentricity(eccentricity))).expect("state");
    let disp = DispersionPair::managed(eccentricity);
    let stepper = SplitStepper::new(v, disp, 2.0, dt, Mode::Real).expect("stepper");
    (psi, stepper)
}

/// Deterministic non-trivial data for transform benchmarks.
pub fn signal(len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|i| {
            let t = i as f64 * 0.37;
            Complex64::new(t.sin(), (1.3 * t).cos())
        })
        .collect()
}
