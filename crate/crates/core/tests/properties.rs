use atomtronics_core::evolution::Mode;
use atomtronics_core::oracles::{circle_to_ellipse, ellipse_to_circle};
use atomtronics_core::{make_grid, survival, ComplexField2D, DispersionPair, RealField2D, SplitStepper};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::Arc;

fn packet(grid: &Arc<atomtronics_core::GridSpec>, cx: f64, cy: f64, k: f64) -> ComplexField2D {
    ComplexField2D::from_fn(grid.clone(), |x, y| {
        let r2 = (x - cx).powi(2) + (y - cy).powi(2);
        Complex64::from_polar((-r2 / 2.0).exp(), k * x)
    })
    .normalized()
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn real_steps_conserve_norm(
        cx in -2.0f64..2.0, cy in -2.0f64..2.0, k in -2.0f64..2.0,
        beta in 0.1f64..1.0, g in 0.0f64..5.0, dt in 0.001f64..0.05,
    ) {
        let grid = Arc::new(make_grid(32, 32, 0.4, 0.4).unwrap());
        let v = Arc::new(RealField2D::from_fn(grid.clone(), |x, y| 0.5 * (x * x + y * y)));
        let mut psi = packet(&grid, cx, cy, k);
        let mut s = SplitStepper::new(v, DispersionPair::new(1.0, beta).unwrap(), g, dt, Mode::Real).unwrap();
        s.advance(&mut psi, 20).unwrap();
        prop_assert!((psi.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn survival_is_a_probability(cx in -2.0f64..2.0, cy in -2.0f64..2.0, k in -3.0f64..3.0) {
        let grid = Arc::new(make_grid(32, 32, 0.4, 0.4).unwrap());
        let a = packet(&grid, 0.0, 0.0, 0.0);
        let b = packet(&grid, cx, cy, k);
        let s = survival(&a, &b).unwrap();
        prop_assert!((-1e-14..=1.0 + 1e-12).contains(&s));
        prop_assert!((survival(&b, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aligned_rescaling_round_trips(e in 0.0f64..0.95, cx in -2.0f64..2.0, cy in -2.0f64..2.0) {
        let sigma = (1.0 - e * e).sqrt();
        let circle = Arc::new(make_grid(32, 32, 0.4, 0.4).unwrap());
        let ellipse = Arc::new(make_grid(32, 32, 0.4, 0.4 * sigma).unwrap());
        let f = packet(&circle, cx, cy, 1.0);
        let fe = circle_to_ellipse(&f, e, &ellipse).unwrap();
        prop_assert!((fe.norm_sq() - 1.0).abs() < 1e-12);
        let back = ellipse_to_circle(&fe, e, &circle).unwrap();
        prop_assert!(back.max_abs_diff(&f).unwrap() < 1e-12);
    }
}
