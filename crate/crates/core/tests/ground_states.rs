use atomtronics_core::evolution::EvolutionConfig;
use atomtronics_core::observables::{cross_section_density, expected_uniform_state};
use atomtronics_core::{
    elliptic_ring_potential, ground_state_itp, make_grid, overlap_lambda, Axis, DispersionPair, WaveguideParams,
};
use std::sync::Arc;

fn ground(eccentricity: f64, disp: DispersionPair) -> (f64, f64, f64, Vec<f64>) {
    let grid = Arc::new(make_grid(128, 128, 0.2, 0.2).unwrap());
    let w = WaveguideParams::default().with_eccentricity(eccentricity);
    let v = Arc::new(elliptic_ring_potential(&grid, &w).unwrap());
    let seed = expected_uniform_state(&grid, &w).unwrap();
    let cfg = EvolutionConfig::imaginary(0.01, 50_000, 2.0, 1e-9).with_stride(50);
    let gs = ground_state_itp(&v, disp, &cfg, &seed).unwrap();
    let lambda = overlap_lambda(&seed, &gs.field).unwrap();
    let px = cross_section_density(&gs.field, Axis::X).max();
    let py = cross_section_density(&gs.field, Axis::Y).max();
    (lambda, px, py, gs.energy_history)
}

#[test]
fn circular_ring_ground_state_is_uniform() {
    let (lambda, px, py, history) = ground(0.0, DispersionPair::unity());
    assert!(lambda > 0.98, "{lambda}");
    assert!((px - py).abs() / px < 0.02);
    for pair in history.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-12, "{pair:?}");
    }
}

#[test]
fn unmanaged_ellipse_localizes_on_major_axis() {
    let (_, px, py, _) = ground(0.9, DispersionPair::unity());
    assert!(py < 0.05 * px, "{py} vs {px}");
}

#[test]
fn managed_ellipse_spreads_around_ring() {
    let (lambda, px, py, _) = ground(0.5, DispersionPair::managed(0.5));
    assert!(lambda > 0.98, "{lambda}");
    assert!((px - py).abs() / px < 0.1, "{py} vs {px}");
}
