use super::{DispersionPair, EvolutionConfig, Mode, SplitStepper};
use crate::error::{Error, Result};
use crate::field::{ensure_same_grid, ComplexField2D, RealField2D};
use std::sync::Arc;

/// Smallest step the backtracking may reach, as a fraction of the
/// configured one.
const MIN_DT_FRACTION: f64 = 1.0 / 1024.0;

#[derive(Debug, Clone)]
pub struct GroundState {
    pub field: ComplexField2D,
    pub chemical_potential: f64,
    pub energy: f64,
    pub steps: usize,
    /// Relative change of μ over the last probe interval.
    pub residual: f64,
    /// Energy at the seed and after every accepted probe interval.
    pub energy_history: Vec<f64>,
    /// Step size in use at the end; smaller than the configured one if
    /// the run had to backtrack.
    pub final_dt: f64,
}

/// Imaginary-time relaxation from `seed`.
///
/// The chemical potential is evaluated every `cfg.record_stride` steps; the
/// run stops once its relative change over one such interval drops below
/// `cfg.convergence_tol`. An interval that raises the energy is discarded
/// and retried with half the step, so the recorded energies never increase.
pub fn ground_state_itp(
    potential: &Arc<RealField2D>,
    disp: DispersionPair,
    cfg: &EvolutionConfig,
    seed: &ComplexField2D,
) -> Result<GroundState> {
    cfg.validate()?;
    if cfg.mode != Mode::Imaginary {
        return Err(Error::Config(
            "ground_state_itp needs an imaginary-time configuration".into(),
        ));
    }
    ensure_same_grid(potential.grid(), seed.grid())?;
    let mut psi = seed.normalized()?;
    let mut dt = cfg.dt;
    let mut stepper = SplitStepper::new(potential.clone(), disp, cfg.coupling, dt, Mode::Imaginary)?;

    let terms = stepper.energy_terms(&psi)?;
    let mut mu_prev = terms.chemical_potential();
    let mut e_prev = terms.energy();
    let mut history = vec![e_prev];
    let mut steps = 0;
    let mut residual = f64::INFINITY;
    while steps < cfg.n_steps {
        let m = cfg.record_stride.min(cfg.n_steps - steps);
        let before = psi.clone();
        stepper.advance(&mut psi, m).map_err(|e| match e {
            Error::NumericalBlowup { reason, .. } => Error::NumericalBlowup {
                step: steps,
                time: steps as f64 * cfg.dt,
                reason,
            },
            other => other,
        })?;
        steps += m;
        let terms = stepper.energy_terms(&psi)?;
        let mu = terms.chemical_potential();
        let energy = terms.energy();
        if !(mu.is_finite() && energy.is_finite()) {
            return Err(Error::NumericalBlowup {
                step: steps,
                time: steps as f64 * cfg.dt,
                reason: "non-finite chemical potential".into(),
            });
        }
        if energy > e_prev + 1e-12 * e_prev.abs() && dt * 0.5 >= cfg.dt * MIN_DT_FRACTION {
            psi = before;
            dt *= 0.5;
            log::debug!("ITP energy rose after {steps} steps; retrying with dt = {dt}");
            stepper = SplitStepper::new(potential.clone(), disp, cfg.coupling, dt, Mode::Imaginary)?;
            continue;
        }
        history.push(energy);
        e_prev = energy;
        residual = ((mu - mu_prev) / mu_prev).abs();
        if residual < cfg.convergence_tol {
            log::debug!("ITP converged after {steps} steps, mu = {mu}");
            return Ok(GroundState {
                field: psi,
                chemical_potential: mu,
                energy,
                steps,
                residual,
                energy_history: history,
                final_dt: dt,
            });
        }
        mu_prev = mu;
    }
    Err(Error::Convergence { steps, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Axis;
    use crate::grid::make_grid;
    use num_complex::Complex64;

    fn oscillator() -> Arc<RealField2D> {
        let g = Arc::new(make_grid(64, 64, 0.25, 0.25).unwrap());
        Arc::new(RealField2D::from_fn(g, |x, y| 0.5 * (x * x + y * y)))
    }

    fn seed(v: &RealField2D) -> ComplexField2D {
        ComplexField2D::from_fn(v.grid_arc().clone(), |x, y| {
            Complex64::new((-((x - 0.7).powi(2) + 2.0 * y * y) / 3.0).exp(), 0.0)
        })
    }

    #[test]
    fn oscillator_ground_state() {
        let v = oscillator();
        let cfg = EvolutionConfig::imaginary(0.01, 20_000, 0.0, 1e-12).with_stride(50);
        let gs = ground_state_itp(&v, DispersionPair::unity(), &cfg, &seed(&v)).unwrap();
        assert!((gs.energy - 1.0).abs() < 1e-3, "E = {}", gs.energy);
        let w = gs.field.second_moment_width(Axis::X).unwrap();
        assert!((w - 0.5f64.sqrt()).abs() < 1e-3);
        for pair in gs.energy_history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
    }

    #[test]
    fn anisotropic_dispersion_oscillator() {
        // H = -(β/2)∂²y + y²/2 has ground energy sqrt(β)/2.
        let v = oscillator();
        let cfg = EvolutionConfig::imaginary(0.01, 40_000, 0.0, 1e-12).with_stride(50);
        let gs = ground_state_itp(&v, DispersionPair::new(1.0, 0.25).unwrap(), &cfg, &seed(&v)).unwrap();
        assert!((gs.energy - 0.75).abs() < 1e-3, "E = {}", gs.energy);
    }

    #[test]
    fn zero_seed_is_rejected() {
        let v = oscillator();
        let cfg = EvolutionConfig::imaginary(0.01, 10, 0.0, 1e-9);
        let zero = ComplexField2D::zeros(v.grid_arc().clone());
        assert!(matches!(
            ground_state_itp(&v, DispersionPair::unity(), &cfg, &zero),
            Err(Error::DegenerateField(_))
        ));
    }

    #[test]
    fn too_few_steps_reports_residual() {
        let v = oscillator();
        let cfg = EvolutionConfig::imaginary(0.01, 20, 0.0, 1e-14).with_stride(10);
        match ground_state_itp(&v, DispersionPair::unity(), &cfg, &seed(&v)) {
            Err(Error::Convergence { steps, residual }) => {
                assert_eq!(steps, 20);
                assert!(residual > 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
