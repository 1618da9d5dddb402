//! Checks of the solver against closed-form results.

use anyhow::Result;
use atomtronics_core::evolution::{
    ground_state_itp, make_initial_state, EvolutionConfig, InitialState, Mode, SplitStepper,
};
use atomtronics_core::observables::predicted_revival_time;
use atomtronics_core::oracles::{
    circle_to_ellipse, ellipse_to_circle, free_width, managed_width_ratio, FreeGaussianPacket,
};
use atomtronics_core::potentials::{elliptic_ring_potential, harmonic_potential, HarmonicParams};
use atomtronics_core::{make_grid, Axis, ComplexField2D, DispersionPair, GridSpec, RealField2D, WaveguideParams};
use std::sync::Arc;

use crate::config::{ExperimentConfig, GridConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `|value − expected| ≤ tolerance`.
    pub fn absolute(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        let residual = (value - expected).abs();
        Check {
            name: name.into(),
            value,
            expected,
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }

    /// `|value − expected| ≤ tolerance·|expected|`.
    pub fn relative(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        let residual = (value - expected).abs() / expected.abs();
        Check {
            name: name.into(),
            value,
            expected,
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }

    /// `value < tolerance` for a non-negative error measure.
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            expected: 0.0,
            residual: value,
            tolerance,
            pass: value < tolerance,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: value {:.9e} expected {:.9e} residual {:.3e} tol {:.1e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.expected,
            self.residual,
            self.tolerance
        )
    }
}

fn zero_potential(grid: &Arc<GridSpec>) -> Arc<RealField2D> {
    Arc::new(RealField2D::zeros(grid.clone()))
}

/// Propagate `psi` in real time for `n` steps.
pub fn propagate(
    psi: &ComplexField2D,
    potential: Arc<RealField2D>,
    disp: DispersionPair,
    coupling: f64,
    dt: f64,
    n: usize,
) -> Result<ComplexField2D> {
    let mut out = psi.clone();
    let mut stepper = SplitStepper::new(potential, disp, coupling, dt, Mode::Real)?;
    stepper.advance(&mut out, n)?;
    Ok(out)
}

/// Ground state of `V = ½(x² + y²)` at `g = 0`: energy 1 and RMS width `1/√2`.
pub fn harmonic_ground() -> Result<Vec<Check>> {
    let grid = Arc::new(make_grid(128, 128, 0.1, 0.1)?);
    let v = Arc::new(harmonic_potential(&grid, &HarmonicParams::new(1.0)?));
    let seed = ComplexField2D::from_fn(grid.clone(), |x, y| (-(x * x + 2.0 * y * y) / 3.0).exp().into());
    let cfg = EvolutionConfig::imaginary(1e-3, 200_000, 0.0, 1e-12).with_stride(100);
    let gs = ground_state_itp(&v, DispersionPair::unity(), &cfg, &seed)?;
    let w = 0.5f64.sqrt();
    Ok(vec![
        Check::absolute("harmonic ground energy", gs.energy, 1.0, 1e-3),
        Check::absolute(
            "harmonic ground width x",
            gs.field.second_moment_width(Axis::X)?,
            w,
            1e-3,
        ),
        Check::absolute(
            "harmonic ground width y",
            gs.field.second_moment_width(Axis::Y)?,
            w,
            1e-3,
        ),
    ])
}

/// Free spreading of a packet with RMS width `w0 = 1`; the kinetic
/// propagator is exact, so one step of length `t` suffices.
pub fn free_widths(times: &[f64]) -> Result<Vec<Check>> {
    let grid = Arc::new(make_grid(512, 512, 0.2, 0.2)?);
    let packet = FreeGaussianPacket::new(2f64.sqrt(), (0.0, 0.0))?;
    let f0 = packet.field_at(&grid, 0.0, DispersionPair::unity()).normalized()?;
    let mut checks = Vec::new();
    for &t in times {
        let ft = propagate(&f0, zero_potential(&grid), DispersionPair::unity(), 0.0, t, 1)?;
        let w = ft.second_moment_width(Axis::X)?;
        checks.push(Check::relative(
            format!("free width^2 at t={t}"),
            w * w,
            free_width(t, packet.w0()),
            1e-3,
        ));
    }
    Ok(checks)
}

/// Solver against the exact anisotropic free packet.
pub fn analytic_packet(t: f64, eccentricity: f64, dt: f64) -> Result<Check> {
    let grid = Arc::new(make_grid(512, 512, 0.2, 0.2)?);
    let disp = DispersionPair::managed(eccentricity);
    let packet = FreeGaussianPacket::new(1.0, (1.5, -2.0))?;
    let f0 = packet.field_at(&grid, 0.0, disp);
    let n = (t / dt).round() as usize;
    let ft = propagate(&f0, zero_potential(&grid), disp, 0.0, dt, n)?;
    let exact = packet.field_at(&grid, n as f64 * dt, disp);
    Ok(Check::below(
        format!("analytic packet at t={t}, eccentricity {eccentricity}"),
        ft.max_abs_diff(&exact)?,
        1e-8,
    ))
}

/// Circle → ellipse → circle on node-aligned grids.
pub fn rescaling_round_trip(w: &WaveguideParams, eccentricity: f64, grid: &GridConfig) -> Result<Check> {
    let (circle, ellipse) = aligned_grids(grid, eccentricity)?;
    let f = make_initial_state(&circle, &InitialState::binary_peaks(w.with_eccentricity(0.0)))?;
    let back = ellipse_to_circle(&circle_to_ellipse(&f, eccentricity, &ellipse)?, eccentricity, &circle)?;
    Ok(Check::below(
        format!("rescaling round trip, eccentricity {eccentricity}"),
        back.max_abs_diff(&f)?,
        1e-12,
    ))
}

/// The circular grid and the elliptic grid whose `y` nodes are the
/// circular ones scaled by `σ = sqrt(1 − ε²)`.
pub fn aligned_grids(grid: &GridConfig, eccentricity: f64) -> Result<(Arc<GridSpec>, Arc<GridSpec>)> {
    let sigma = (1.0 - eccentricity * eccentricity).sqrt();
    Ok((
        Arc::new(make_grid(grid.nx, grid.ny, grid.dx, grid.dy)?),
        Arc::new(make_grid(grid.nx, grid.ny, grid.dx, grid.dy * sigma)?),
    ))
}

/// Result of evolving the managed ellipse next to its circular image.
#[derive(Debug, Clone)]
pub struct Equivalence {
    pub time: f64,
    /// `max |ρ_ellipse − ρ_circle mapped|`.
    pub density_residual: f64,
    /// Same, relative to the peak density.
    pub relative_residual: f64,
}

/// Evolve the binary-peak state in the ellipse with `β = 1 − ε²` and
/// coupling `g`, and the circle with `g_circle`, then compare densities
/// at `t`. Exact correspondence needs `g_circle = g/σ`.
pub fn dm_equivalence(
    w: &WaveguideParams,
    eccentricity: f64,
    grid: &GridConfig,
    coupling: f64,
    circle_coupling: f64,
    dt: f64,
    t: f64,
) -> Result<Equivalence> {
    let (circle, ellipse) = aligned_grids(grid, eccentricity)?;
    let wc = w.with_eccentricity(0.0);
    let we = w.with_eccentricity(eccentricity);
    let fc = make_initial_state(&circle, &InitialState::binary_peaks(wc))?;
    let fe = circle_to_ellipse(&fc, eccentricity, &ellipse)?;
    let n = (t / dt).round() as usize;
    let vc = Arc::new(elliptic_ring_potential(&circle, &wc)?);
    let ve = Arc::new(elliptic_ring_potential(&ellipse, &we)?);
    let c_t = propagate(&fc, vc, DispersionPair::unity(), circle_coupling, dt, n)?;
    let e_t = propagate(&fe, ve, DispersionPair::managed(eccentricity), coupling, dt, n)?;
    let mapped = circle_to_ellipse(&c_t, eccentricity, &ellipse)?;
    let diff = e_t.density().max_abs_diff(&mapped.density())?;
    Ok(Equivalence {
        time: n as f64 * dt,
        density_residual: diff,
        relative_residual: diff / e_t.density().max(),
    })
}

/// Anisotropic free spreading under managed dispersion keeps
/// `w_y²/w_x² = 1 − ε²`.
pub fn managed_width_ratio_run(eccentricity: f64, t: f64) -> Result<Check> {
    let sigma = (1.0 - eccentricity * eccentricity).sqrt();
    let grid = Arc::new(make_grid(512, 512, 0.2, 0.2 * sigma)?);
    let wa0 = 1.0;
    let d = wa0 * 2f64.sqrt();
    let f0 = ComplexField2D::from_fn(grid.clone(), |x, y| {
        (-(x * x) / (2.0 * d * d) - (y * y) / (2.0 * d * d * sigma * sigma))
            .exp()
            .into()
    })
    .normalized()?;
    let ft = propagate(
        &f0,
        zero_potential(&grid),
        DispersionPair::managed(eccentricity),
        0.0,
        t,
        1,
    )?;
    let wx = ft.second_moment_width(Axis::X)?;
    let wy = ft.second_moment_width(Axis::Y)?;
    let (wa2, wb2) = managed_width_ratio(eccentricity, t, wa0)?;
    Ok(Check::relative(
        format!("managed width ratio at t={t}, eccentricity {eccentricity}"),
        wy * wy / (wx * wx),
        wa2 / wb2,
        1e-3,
    ))
}

pub fn run_all(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let mut checks = harmonic_ground()?;
    checks.extend(free_widths(&[1.0, 2.0, 5.0, 10.0])?);
    checks.push(analytic_packet(5.0, 0.75, 0.05)?);
    for e in [0.25, 0.75, 0.9] {
        checks.push(managed_width_ratio_run(e, 5.0)?);
    }
    let w = cfg.waveguide;
    let e = 0.75;
    checks.push(rescaling_round_trip(&w, e, &cfg.grid)?);
    let quarter = predicted_revival_time(&w.with_eccentricity(0.0), DispersionPair::unity())? / 4.0;
    let dt = cfg.evolution.dt.max(0.02);
    let linear = dm_equivalence(&w, e, &cfg.grid, 0.0, 0.0, dt, quarter)?;
    checks.push(Check::below(
        format!("managed ellipse equals stretched circle at t={:.4}, g=0", linear.time),
        linear.density_residual,
        1e-6,
    ));
    let sigma = (1.0 - e * e).sqrt();
    let g = cfg.coupling;
    let scaled = dm_equivalence(&w, e, &cfg.grid, g, g / sigma, dt, quarter)?;
    checks.push(Check::below(
        format!(
            "managed ellipse equals stretched circle at t={:.4}, g={g} vs g/sigma",
            scaled.time
        ),
        scaled.density_residual,
        1e-6,
    ));
    // without the 1/σ on the circular coupling the two runs drift apart;
    // reported, not bounded
    let plain = dm_equivalence(&w, e, &cfg.grid, g, g, dt, quarter)?;
    checks.push(Check::below(
        format!(
            "uncorrected coupling g={g} on both sides, relative density residual at t={:.4}",
            plain.time
        ),
        plain.relative_residual,
        f64::INFINITY,
    ));
    Ok(checks)
}
