use super::{DispersionPair, EvolutionConfig, Mode, SplitStepper, TimeSeries};
use crate::error::{Error, Result};
use crate::field::{ensure_same_grid, Axis, ComplexField2D};
use crate::potentials::TrapSchedule;

/// Real-mode norm drift beyond which a run is aborted.
pub const NORM_DRIFT_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    /// The time that was asked for.
    pub requested: f64,
    /// The time of the nearest step, which is what the field represents.
    pub time: f64,
    pub step: usize,
    pub field: ComplexField2D,
}

#[derive(Debug, Clone)]
pub struct EvolutionOutput {
    pub series: TimeSeries,
    pub snapshots: Vec<Snapshot>,
    pub final_field: ComplexField2D,
    pub steps: usize,
}

/// A failed run, with the last state that passed the health checks.
#[derive(Debug, Clone)]
pub struct EvolutionFailure {
    pub error: Error,
    pub last_good: Option<Snapshot>,
}

impl std::fmt::Display for EvolutionFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.last_good {
            Some(s) => write!(f, "{} (last good state at t = {})", self.error, s.time),
            None => write!(f, "{}", self.error),
        }
    }
}

impl std::error::Error for EvolutionFailure {}

impl From<Error> for EvolutionFailure {
    fn from(error: Error) -> Self {
        EvolutionFailure { error, last_good: None }
    }
}

impl From<EvolutionFailure> for Error {
    fn from(f: EvolutionFailure) -> Self {
        f.error
    }
}

/// Real-time propagation of `f0` under a piecewise-constant trap schedule.
///
/// Observables are recorded at step 0, every `record_stride` steps and at
/// the final step. Snapshots are taken at the step nearest each requested
/// time. A segment of the schedule starting at `t_s` is active for every
/// step that begins at `t ≥ t_s`.
pub fn evolve_with_schedule(
    f0: &ComplexField2D,
    schedule: &TrapSchedule,
    disp: DispersionPair,
    cfg: &EvolutionConfig,
) -> std::result::Result<EvolutionOutput, EvolutionFailure> {
    cfg.validate_allowing_empty()?;
    if cfg.mode != Mode::Real {
        return Err(Error::Config("evolve_with_schedule runs in real time only".into()).into());
    }
    f0.require_unit_norm("evolve_with_schedule")?;
    ensure_same_grid(f0.grid(), schedule.grid())?;
    let t_final = cfg.t_final();
    if schedule.t_final() < t_final * (1.0 - 1e-12) {
        return Err(Error::Config(format!(
            "schedule covers [0, {}] but the run lasts until {t_final}",
            schedule.t_final()
        ))
        .into());
    }

    let dt = cfg.dt;
    let switches: Vec<(usize, usize)> = schedule
        .segments()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, s)| ((s.start / dt - 1e-9).ceil() as usize, k))
        .collect();
    let mut snap_steps = Vec::with_capacity(cfg.snapshot_times.len());
    for &t in &cfg.snapshot_times {
        if !(t >= 0.0) || t > t_final + 0.5 * dt {
            return Err(Error::Range(format!("snapshot time {t} outside [0, {t_final}]")).into());
        }
        snap_steps.push(((t / dt).round() as usize, t));
    }
    snap_steps.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut stepper = SplitStepper::new(
        schedule.segments()[0].potential.clone(),
        schedule.segments()[0].dispersion.unwrap_or(disp),
        cfg.coupling,
        dt,
        Mode::Real,
    )?;
    let mut psi = f0.clone();
    let mut series = TimeSeries::default();
    let mut snapshots = Vec::new();
    let mut last_good: Option<Snapshot> = None;

    let mut step = 0usize;
    let mut next_switch = 0usize;
    let mut next_snap = 0usize;
    loop {
        while next_switch < switches.len() && switches[next_switch].0 <= step {
            let seg = &schedule.segments()[switches[next_switch].1];
            stepper.set_potential(seg.potential.clone())?;
            if let Some(d) = seg.dispersion {
                stepper.set_dispersion(d)?;
            }
            next_switch += 1;
        }
        let t = step as f64 * dt;
        if step.is_multiple_of(cfg.record_stride) || step == cfg.n_steps {
            record(&mut stepper, f0, &psi, t, step, &mut series).map_err(|error| EvolutionFailure {
                error,
                last_good: last_good.clone(),
            })?;
            last_good = Some(Snapshot {
                requested: t,
                time: t,
                step,
                field: psi.clone(),
            });
        }
        while next_snap < snap_steps.len() && snap_steps[next_snap].0 == step {
            snapshots.push(Snapshot {
                requested: snap_steps[next_snap].1,
                time: t,
                step,
                field: psi.clone(),
            });
            next_snap += 1;
        }
        if step >= cfg.n_steps {
            break;
        }
        let mut target = cfg.n_steps.min((step / cfg.record_stride + 1) * cfg.record_stride);
        if let Some(&(s, _)) = switches.get(next_switch) {
            target = target.min(s.max(step + 1));
        }
        if let Some(&(s, _)) = snap_steps.get(next_snap) {
            target = target.min(s.max(step + 1));
        }
        stepper.advance(&mut psi, target - step)?;
        step = target;
    }

    Ok(EvolutionOutput {
        series,
        snapshots,
        final_field: psi,
        steps: step,
    })
}

fn record(
    stepper: &mut SplitStepper,
    f0: &ComplexField2D,
    psi: &ComplexField2D,
    t: f64,
    step: usize,
    series: &mut TimeSeries,
) -> Result<()> {
    let terms = stepper.energy_terms(psi)?;
    let norm = terms.norm;
    if !psi.is_finite() || !norm.is_finite() || !terms.kinetic.is_finite() {
        return Err(Error::NumericalBlowup {
            step,
            time: t,
            reason: "non-finite field".into(),
        });
    }
    if (norm - 1.0).abs() > NORM_DRIFT_LIMIT {
        return Err(Error::NumericalBlowup {
            step,
            time: t,
            reason: format!("norm drifted to {norm}"),
        });
    }
    let overlap = f0.inner(psi)?;
    let density = psi.density();
    series.push(
        t,
        overlap.norm_sqr(),
        norm,
        terms.energy(),
        terms.chemical_potential(),
        density.moment_width(Axis::X),
        density.moment_width(Axis::Y),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::RealField2D;
    use crate::grid::make_grid;
    use crate::potentials::{harmonic_potential, HarmonicParams};
    use num_complex::Complex64;
    use std::sync::Arc;

    fn setup() -> (Arc<crate::grid::GridSpec>, ComplexField2D) {
        let g = Arc::new(make_grid(32, 32, 0.5, 0.5).unwrap());
        let f = ComplexField2D::from_fn(g.clone(), |x, y| {
            Complex64::new((-((x - 2.0).powi(2) + y * y) / 2.0).exp(), 0.0)
        })
        .normalized()
        .unwrap();
        (g, f)
    }

    #[test]
    fn zero_steps_records_initial_state() {
        let (g, f) = setup();
        let sched = TrapSchedule::constant(RealField2D::zeros(g), 1.0);
        let cfg = EvolutionConfig::real(0.01, 0, 0.0);
        let out = evolve_with_schedule(&f, &sched, DispersionPair::unity(), &cfg).unwrap();
        assert_eq!(out.series.len(), 1);
        assert!((out.series.survival[0] - 1.0).abs() < 1e-12);
        assert!((out.series.norm[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn records_on_stride_and_final_step() {
        let (g, f) = setup();
        let sched = TrapSchedule::constant(harmonic_potential(&g, &HarmonicParams::new(1.0).unwrap()), 1.0);
        let cfg = EvolutionConfig::real(0.01, 25, 1.0)
            .with_stride(10)
            .with_snapshots(vec![0.123, 0.0]);
        let out = evolve_with_schedule(&f, &sched, DispersionPair::unity(), &cfg).unwrap();
        let steps: Vec<f64> = out.series.times.iter().map(|t| (t / 0.01).round()).collect();
        assert_eq!(steps, vec![0.0, 10.0, 20.0, 25.0]);
        assert_eq!(out.snapshots.len(), 2);
        assert_eq!(out.snapshots[0].step, 0);
        assert_eq!(out.snapshots[1].step, 12);
        assert!(out.series.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn snapshot_beyond_run_is_rejected() {
        let (g, f) = setup();
        let sched = TrapSchedule::constant(RealField2D::zeros(g), 1.0);
        let cfg = EvolutionConfig::real(0.01, 10, 0.0).with_snapshots(vec![5.0]);
        let err = evolve_with_schedule(&f, &sched, DispersionPair::unity(), &cfg).unwrap_err();
        assert!(matches!(err.error, Error::Range(_)));
    }

    #[test]
    fn schedule_too_short_is_rejected() {
        let (g, f) = setup();
        let sched = TrapSchedule::constant(RealField2D::zeros(g), 0.05);
        let cfg = EvolutionConfig::real(0.01, 10, 0.0);
        let err = evolve_with_schedule(&f, &sched, DispersionPair::unity(), &cfg).unwrap_err();
        assert!(matches!(err.error, Error::Config(_)));
    }

    #[test]
    fn switch_happens_at_boundary_step() {
        // Free flight then a trap: compare against doing the two legs by hand.
        let (g, f) = setup();
        let free = RealField2D::zeros(g.clone());
        let trap = harmonic_potential(&g, &HarmonicParams::new(0.7).unwrap());
        let sched = TrapSchedule::new(vec![(0.0, free.clone()), (0.1, trap.clone())], 0.2).unwrap();
        let cfg = EvolutionConfig::real(0.01, 20, 0.5).with_stride(7);
        let out = evolve_with_schedule(&f, &sched, DispersionPair::unity(), &cfg).unwrap();

        let mut psi = f.clone();
        let mut a = SplitStepper::new(Arc::new(free), DispersionPair::unity(), 0.5, 0.01, Mode::Real).unwrap();
        a.advance(&mut psi, 10).unwrap();
        let mut b = SplitStepper::new(Arc::new(trap), DispersionPair::unity(), 0.5, 0.01, Mode::Real).unwrap();
        b.advance(&mut psi, 10).unwrap();
        assert!(out.final_field.max_abs_diff(&psi).unwrap() < 1e-12);
    }

    #[test]
    fn dispersion_switches_with_segment() {
        let (g, f) = setup();
        let ring = RealField2D::zeros(g.clone());
        let trap = harmonic_potential(&g, &HarmonicParams::new(0.5).unwrap());
        let managed = DispersionPair::new(1.0, 0.19).unwrap();
        let sched = TrapSchedule::new(vec![(0.0, ring.clone()), (0.1, trap.clone())], 0.2)
            .unwrap()
            .with_dispersion(1, DispersionPair::unity())
            .unwrap();
        let cfg = EvolutionConfig::real(0.01, 20, 0.5).with_stride(5);
        let out = evolve_with_schedule(&f, &sched, managed, &cfg).unwrap();

        let mut psi = f.clone();
        let mut a = SplitStepper::new(Arc::new(ring), managed, 0.5, 0.01, Mode::Real).unwrap();
        a.advance(&mut psi, 10).unwrap();
        let mut b = SplitStepper::new(Arc::new(trap), DispersionPair::unity(), 0.5, 0.01, Mode::Real).unwrap();
        b.advance(&mut psi, 10).unwrap();
        assert!(out.final_field.max_abs_diff(&psi).unwrap() < 1e-12);
        assert!(sched.clone().with_dispersion(2, managed).is_err());
    }

    #[test]
    fn blowup_keeps_last_good_state() {
        let (g, f) = setup();
        let v = RealField2D::from_fn(g.clone(), |x, _| if x > 5.0 { f64::INFINITY } else { 0.0 });
        let sched = TrapSchedule::constant(v, 10.0);
        let cfg = EvolutionConfig::real(0.01, 100, 0.0).with_stride(10);
        let err = evolve_with_schedule(&f, &sched, DispersionPair::unity(), &cfg).unwrap_err();
        assert!(matches!(err.error, Error::NumericalBlowup { .. }));
        assert_eq!(err.last_good.unwrap().step, 0);
    }
}
