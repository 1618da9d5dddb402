use atomtronics_core::evolution::{InitialState, Mode};
use atomtronics_core::oracles::{circle_to_ellipse, managed_width_ratio};
use atomtronics_core::{
    elliptic_ring_potential, make_grid, make_initial_state, Axis, ComplexField2D, DispersionPair, RealField2D,
    SplitStepper, WaveguideParams,
};
use std::sync::Arc;

fn run(psi: &ComplexField2D, v: RealField2D, disp: DispersionPair, g: f64, dt: f64, n: usize) -> ComplexField2D {
    let mut out = psi.clone();
    SplitStepper::new(Arc::new(v), disp, g, dt, Mode::Real)
        .unwrap()
        .advance(&mut out, n)
        .unwrap();
    out
}

/// Ellipse run vs stretched circle run on grids whose y nodes correspond.
fn residuals(eccentricity: f64, g_ellipse: f64, g_circle: f64, t: f64) -> f64 {
    let sigma = (1.0 - eccentricity * eccentricity).sqrt();
    let circle = Arc::new(make_grid(128, 128, 0.2, 0.2).unwrap());
    let ellipse = Arc::new(make_grid(128, 128, 0.2, 0.2 * sigma).unwrap());
    let w = WaveguideParams::default();
    let fc = make_initial_state(&circle, &InitialState::binary_peaks(w)).unwrap();
    let fe = circle_to_ellipse(&fc, eccentricity, &ellipse).unwrap();
    let dt = 0.02;
    let n = (t / dt).round() as usize;
    let ct = run(
        &fc,
        elliptic_ring_potential(&circle, &w).unwrap(),
        DispersionPair::unity(),
        g_circle,
        dt,
        n,
    );
    let we = w.with_eccentricity(eccentricity);
    let et = run(
        &fe,
        elliptic_ring_potential(&ellipse, &we).unwrap(),
        DispersionPair::managed(eccentricity),
        g_ellipse,
        dt,
        n,
    );
    let mapped = circle_to_ellipse(&ct, eccentricity, &ellipse).unwrap();
    et.density().max_abs_diff(&mapped.density()).unwrap() / et.density().max()
}

#[test]
fn linear_managed_ellipse_is_stretched_circle() {
    for e in [0.25, 0.75, 0.9] {
        let r = residuals(e, 0.0, 0.0, 10.0);
        assert!(r < 1e-10, "eccentricity {e}: {r}");
    }
}

#[test]
fn interacting_equivalence_needs_scaled_coupling() {
    let e: f64 = 0.75;
    let sigma = (1.0 - e * e).sqrt();
    let corrected = residuals(e, 2.0, 2.0 / sigma, 10.0);
    let plain = residuals(e, 2.0, 2.0, 10.0);
    assert!(corrected < 1e-10, "{corrected}");
    assert!(plain > 1e3 * corrected.max(1e-14), "{plain}");
}

#[test]
fn managed_free_widths_keep_eccentric_ratio() {
    let e: f64 = 0.75;
    let sigma = (1.0 - e * e).sqrt();
    let grid = Arc::new(make_grid(256, 256, 0.25, 0.25 * sigma).unwrap());
    let d = 2f64.sqrt();
    let f0 = ComplexField2D::from_fn(grid.clone(), |x, y| {
        (-(x * x) / (2.0 * d * d) - y * y / (2.0 * d * d * sigma * sigma))
            .exp()
            .into()
    })
    .normalized()
    .unwrap();
    let zero = RealField2D::zeros(grid.clone());
    let ft = run(&f0, zero, DispersionPair::managed(e), 0.0, 0.1, 40);
    let (wa2, wb2) = managed_width_ratio(e, 4.0, 1.0).unwrap();
    let wx = ft.second_moment_width(Axis::X).unwrap();
    let wy = ft.second_moment_width(Axis::Y).unwrap();
    assert!(((wy * wy) / (wx * wx) - wa2 / wb2).abs() < 1e-6);
    assert!((wx * wx - wb2 * sigma * sigma).abs() / (wx * wx) < 1e-6);
}
