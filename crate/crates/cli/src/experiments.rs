//! One function per subcommand. Each writes its artifacts and a manifest
//! into the configured output directory.

use anyhow::{anyhow, Context, Result};
use atomtronics_core::evolution::{
    evolve_with_schedule, ground_state_itp, make_initial_state, EvolutionConfig, EvolutionFailure, EvolutionOutput,
    InitialState,
};
use atomtronics_core::observables::{
    beta_sweep, count_fr_lobes, cross_section_density, expected_uniform_state, fringe_periods, measure_revival_time,
    overlap_lambda, predicted_revival_time, BetaSweepConfig, FrFraction, InterferencePattern, LobeCounter,
    RevivalEstimate,
};
use atomtronics_core::potentials::{elliptic_ring_potential, harmonic_potential, HarmonicParams, TrapSchedule};
use atomtronics_core::{make_grid, Axis, ComplexField2D, DispersionPair, Error, GridSpec, WaveguideParams};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::config::{
    ExperimentConfig, ExperimentKind, HoldDispersion, InitialKind, SnapshotSpec, StepCount, SwitchSpec,
};
use crate::formats::{heatmap_name, write_field_dump, write_heatmap, write_series_csv, write_table_csv};
use crate::manifest::{unix_now, RunManifest};
use crate::oracle_suite;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Vec<String>,
    pub manifest: PathBuf,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    std::fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    match cfg.kind {
        ExperimentKind::Ground => ground(cfg),
        ExperimentKind::Evolve => evolve(cfg),
        ExperimentKind::SweepBeta => sweep(cfg),
        ExperimentKind::RevivalTable => revival_table(cfg),
        ExperimentKind::Interfere => interfere(cfg),
        ExperimentKind::Oracle => oracle(cfg),
    }
}

pub fn grid_of(cfg: &ExperimentConfig) -> Result<Arc<GridSpec>> {
    Ok(Arc::new(make_grid(cfg.grid.nx, cfg.grid.ny, cfg.grid.dx, cfg.grid.dy)?))
}

pub fn initial_state(cfg: &ExperimentConfig, w: WaveguideParams) -> InitialState {
    let i = &cfg.initial;
    match i.kind {
        InitialKind::BinaryPeaks => InitialState::BinaryPeaks {
            waveguide: w,
            transverse_width: i.transverse_width.unwrap_or_else(|| w.channel_width()),
            azimuthal_width: i.azimuthal_width,
            rotated: i.rotated,
        },
        InitialKind::RingAnsatz => InitialState::RingAnsatz { waveguide: w },
        InitialKind::Gaussian => InitialState::GaussianPacket {
            center: i.center,
            width_x: i.width_x,
            width_y: i.width_y,
        },
    }
}

fn fmt_ecc(e: f64) -> String {
    format!("{e:.2}").replace('.', "p")
}

fn write_snapshot(
    dir: &Path,
    name: &str,
    field: &ComplexField2D,
    t: f64,
    heatmaps: bool,
    m: &mut RunManifest,
) -> Result<()> {
    write_field_dump(&dir.join(format!("{name}.gpe2")), field, t)?;
    if heatmaps {
        let png = heatmap_name(name, t);
        let max = write_heatmap(&dir.join(&png), field)?;
        m.diagnose(&format!("heatmap_max.{png}"), max);
    }
    Ok(())
}

fn ground(cfg: &ExperimentConfig) -> Result<Outcome> {
    let started = unix_now();
    let dir = &cfg.output_dir;
    let grid = grid_of(cfg)?;
    let w = cfg.waveguide;
    let disp = cfg.dispersion();
    let v = Arc::new(elliptic_ring_potential(&grid, &w)?);
    let expected = expected_uniform_state(&grid, &w)?;
    let ev = &cfg.evolution;
    let itp = EvolutionConfig::imaginary(ev.itp_dt, ev.itp_max_steps, cfg.coupling, ev.convergence_tol)
        .with_stride(ev.itp_stride);
    let gs = ground_state_itp(&v, disp, &itp, &expected)?;
    let lambda = overlap_lambda(&expected, &gs.field)?;
    let px = cross_section_density(&gs.field, Axis::X).max();
    let py = cross_section_density(&gs.field, Axis::Y).max();

    let mut m = RunManifest::new(cfg, started);
    write_snapshot(dir, "ground", &gs.field, 0.0, cfg.heatmaps, &mut m)?;
    let rows: Vec<Vec<f64>> = gs
        .energy_history
        .iter()
        .enumerate()
        .map(|(k, e)| vec![((k + 1) * ev.itp_stride) as f64, *e])
        .collect();
    write_table_csv(&dir.join("itp_energy.csv"), &["step", "energy"], &rows)?;
    m.derive("coupling", cfg.coupling);
    m.derive("alpha", disp.alpha);
    m.derive("beta", disp.beta);
    m.derive("beta_managed", 1.0 - w.eccentricity * w.eccentricity);
    m.derive("lambda", lambda);
    m.derive("chemical_potential", gs.chemical_potential);
    m.derive("energy", gs.energy);
    m.derive("peak_density_x_axis", px);
    m.derive("peak_density_y_axis", py);
    m.diagnose("itp_steps", gs.steps);
    m.diagnose("itp_final_dt", gs.final_dt);
    m.diagnose("itp_residual", gs.residual);
    let manifest = m.finish(dir)?;
    Ok(Outcome {
        summary: vec![
            format!("eccentricity {} beta {:.6}", w.eccentricity, disp.beta),
            format!(
                "mu {:.10} energy {:.10} ({} steps)",
                gs.chemical_potential, gs.energy, gs.steps
            ),
            format!("lambda {lambda:.6}"),
            format!(
                "peak |psi(x,0)|^2 {px:.6e}  peak |psi(0,y)|^2 {py:.6e}  ratio {:.4}",
                py / px
            ),
        ],
        manifest,
    })
}

/// A real-time run from the configured initial state, long enough to
/// cover the revival window.
#[derive(Debug)]
pub struct RevivalRun {
    pub eccentricity: f64,
    pub dispersion: DispersionPair,
    pub predicted: f64,
    pub output: EvolutionOutput,
    pub measured: std::result::Result<RevivalEstimate, Error>,
}

pub fn run_steps(cfg: &ExperimentConfig, predicted: f64) -> usize {
    match cfg.evolution.n_steps {
        StepCount::Fixed(n) => n,
        StepCount::Auto => (cfg.revival.window.1 * predicted / cfg.evolution.dt).ceil() as usize,
    }
}

pub fn revival_run(
    cfg: &ExperimentConfig,
    grid: &Arc<GridSpec>,
    w: WaveguideParams,
    disp: DispersionPair,
) -> std::result::Result<RevivalRun, EvolutionFailure> {
    let predicted = predicted_revival_time(&w, disp)?;
    let n = run_steps(cfg, predicted);
    let dt = cfg.evolution.dt;
    let t_end = n as f64 * dt;
    let snaps = match &cfg.evolution.snapshots {
        SnapshotSpec::None => Vec::new(),
        SnapshotSpec::RevivalFractions => FrFraction::snapshot_set()
            .iter()
            .map(|f| f.value() * predicted)
            .filter(|t| *t <= t_end)
            .collect(),
        SnapshotSpec::Times(ts) => ts.clone(),
    };
    let f0 = make_initial_state(grid, &initial_state(cfg, w))?;
    let v = elliptic_ring_potential(grid, &w)?;
    let ev = EvolutionConfig::real(dt, n, cfg.coupling)
        .with_stride(cfg.evolution.record_stride)
        .with_snapshots(snaps);
    let output = evolve_with_schedule(&f0, &TrapSchedule::constant(v, t_end), disp, &ev)?;
    let window = (cfg.revival.window.0 * predicted, cfg.revival.window.1 * predicted);
    let measured = measure_revival_time(&output.series, window);
    Ok(RevivalRun {
        eccentricity: w.eccentricity,
        dispersion: disp,
        predicted,
        output,
        measured,
    })
}

/// Record what is left of a failed run, then hand the failure on.
fn salvage(dir: &Path, m: RunManifest, failure: EvolutionFailure) -> anyhow::Error {
    let mut m = m;
    m.diagnose("failure", failure.error.to_string());
    if let Some(s) = &failure.last_good {
        m.diagnose("last_good_time", s.time);
        m.diagnose("last_good_step", s.step);
        if let Err(e) = write_field_dump(&dir.join("last_good.gpe2"), &s.field, s.time) {
            log::error!("could not write last good state: {e}");
        }
    }
    if let Err(e) = m.finish(dir) {
        log::error!("could not write manifest: {e}");
    }
    anyhow::Error::new(failure)
}

fn evolve(cfg: &ExperimentConfig) -> Result<Outcome> {
    if cfg.schedule.switch != SwitchSpec::Never {
        return interfere(cfg);
    }
    let started = unix_now();
    let dir = &cfg.output_dir;
    let grid = grid_of(cfg)?;
    let w = cfg.waveguide;
    let disp = cfg.dispersion();
    let mut m = RunManifest::new(cfg, started);
    let run = match revival_run(cfg, &grid, w, disp) {
        Ok(r) => r,
        Err(f) => return Err(salvage(dir, m, f)),
    };
    let ms = m.time_units.ms_per_unit;
    write_series_csv(&dir.join("series.csv"), &run.output.series, ms)?;
    let counter = LobeCounter::default();
    let mut lobes = serde_json::Map::new();
    for (k, s) in run.output.snapshots.iter().enumerate() {
        write_snapshot(dir, &format!("snapshot_{k:02}"), &s.field, s.time, cfg.heatmaps, &mut m)?;
        lobes.insert(format!("{:.6}", s.time), json!(count_fr_lobes(&s.field, &w, &counter)?));
    }
    let t_end = run.output.steps as f64 * cfg.evolution.dt;
    write_field_dump(&dir.join("final.gpe2"), &run.output.final_field, t_end)?;
    m.derive("coupling", cfg.coupling);
    m.derive("alpha", disp.alpha);
    m.derive("beta", disp.beta);
    m.derive("predicted_revival_time", run.predicted);
    m.derive("predicted_revival_time_ms", run.predicted * ms);
    m.derive("lobes_at_snapshots", Value::Object(lobes));
    m.diagnose("revival_detection", "windowed argmax of S(t) with parabolic refinement");
    m.diagnose(
        "revival_window",
        json!([
            cfg.revival.window.0 * run.predicted,
            cfg.revival.window.1 * run.predicted
        ]),
    );
    let mut summary = vec![format!(
        "eccentricity {} beta {:.6}: predicted T_r {:.4} ({:.3} ms)",
        w.eccentricity,
        disp.beta,
        run.predicted,
        run.predicted * ms
    )];
    match &run.measured {
        Ok(r) => {
            m.derive("measured_revival_time", r.time);
            m.derive("measured_revival_time_ms", r.time * ms);
            m.derive("revival_survival", r.survival);
            summary.push(format!(
                "measured T_r {:.4} ({:.3} ms), S = {:.4}",
                r.time,
                r.time * ms,
                r.survival
            ));
        }
        Err(e) => {
            m.diagnose("revival_detection_error", e.to_string());
            summary.push(format!("no revival detected: {e}"));
        }
    }
    let manifest = m.finish(dir)?;
    Ok(Outcome { summary, manifest })
}

fn sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    let started = unix_now();
    let dir = &cfg.output_dir;
    let grid = grid_of(cfg)?;
    let ev = &cfg.evolution;
    let itp = EvolutionConfig::imaginary(ev.itp_dt, ev.itp_max_steps, cfg.coupling, ev.convergence_tol)
        .with_stride(ev.itp_stride);
    let results: Vec<_> = cfg
        .sweep
        .eccentricities
        .par_iter()
        .map(|&e| {
            let mut sc = BetaSweepConfig::new(grid.clone(), cfg.waveguide.with_eccentricity(e), itp.clone());
            if let Some((lo, hi)) = cfg.sweep.beta_range {
                sc.beta_min = lo;
                sc.beta_max = hi;
            }
            sc.n_points = cfg.sweep.points;
            sc.refine = cfg.sweep.refine;
            beta_sweep(&sc)
        })
        .collect();
    let mut m = RunManifest::new(cfg, started);
    let mut summary = Vec::new();
    let mut rows = Vec::new();
    for r in results {
        let r = r?;
        let tag = fmt_ecc(r.eccentricity);
        let table: Vec<Vec<f64>> = (0..r.betas.len())
            .map(|k| vec![r.betas[k], r.lambdas[k], r.chemical_potentials[k]])
            .collect();
        write_table_csv(
            &dir.join(format!("sweep_eps{tag}.csv")),
            &["beta", "lambda", "chemical_potential"],
            &table,
        )?;
        write_snapshot(
            dir,
            &format!("ground_eps{tag}"),
            &r.best_state,
            0.0,
            cfg.heatmaps,
            &mut m,
        )?;
        let theory = 1.0 - r.eccentricity * r.eccentricity;
        m.derive(
            &format!("eps{tag}"),
            json!({"beta_c": r.beta_c, "beta_theory": theory, "lambda_max": r.lambda_max, "itp_steps": r.total_itp_steps}),
        );
        summary.push(format!(
            "eccentricity {:.2}: beta_c {:.4} (1 - e^2 = {theory:.4}), lambda {:.6}",
            r.eccentricity, r.beta_c, r.lambda_max
        ));
        rows.push(vec![r.eccentricity, r.beta_c, theory, r.lambda_max]);
    }
    write_table_csv(
        &dir.join("sweep_summary.csv"),
        &["eccentricity", "beta_c", "beta_theory", "lambda_max"],
        &rows,
    )?;
    let manifest = m.finish(dir)?;
    Ok(Outcome { summary, manifest })
}

/// One measured entry of the revival table.
#[derive(Debug, Clone)]
pub struct RevivalRow {
    pub eccentricity: f64,
    pub managed: bool,
    pub beta: f64,
    pub predicted: f64,
    pub measured: Option<RevivalEstimate>,
}

fn revival_table(cfg: &ExperimentConfig) -> Result<Outcome> {
    let started = unix_now();
    let dir = &cfg.output_dir;
    let grid = grid_of(cfg)?;
    let mut jobs: Vec<(f64, bool)> = Vec::new();
    for &e in &cfg.revival.eccentricities {
        for managed in [false, true] {
            // at ε = 0 both rows are the same run
            if !(managed && e == 0.0) {
                jobs.push((e, managed));
            }
        }
    }
    let runs: Vec<_> = jobs
        .par_iter()
        .map(|&(e, managed)| {
            let w = cfg.waveguide.with_eccentricity(e);
            let disp = if managed {
                DispersionPair::managed(e)
            } else {
                DispersionPair::unity()
            };
            let grid = if cfg.revival.aligned_grid {
                let g = &cfg.grid;
                Arc::new(make_grid(g.nx, g.ny, g.dx, g.dy * (1.0 - e * e).sqrt())?)
            } else {
                grid.clone()
            };
            revival_run(cfg, &grid, w, disp)
        })
        .collect();
    let mut m = RunManifest::new(cfg, started);
    let ms = m.time_units.ms_per_unit;
    let mut rows: Vec<RevivalRow> = Vec::new();
    let mut failures = Vec::new();
    for (&(e, managed), run) in jobs.iter().zip(runs) {
        let run = match run {
            Ok(r) => r,
            Err(f) => return Err(salvage(dir, m, f)),
        };
        let tag = format!("eps{}_{}", fmt_ecc(e), if managed { "dm" } else { "raw" });
        write_series_csv(&dir.join(format!("series_{tag}.csv")), &run.output.series, ms)?;
        if let Err(err) = &run.measured {
            failures.push(format!("{tag}: {err}"));
        }
        let row = RevivalRow {
            eccentricity: e,
            managed,
            beta: run.dispersion.beta,
            predicted: run.predicted,
            measured: run.measured.ok(),
        };
        if e == 0.0 {
            rows.push(RevivalRow {
                managed: true,
                ..row.clone()
            });
        }
        rows.push(row);
    }
    rows.sort_by(|a, b| {
        a.managed
            .cmp(&b.managed)
            .then(a.eccentricity.total_cmp(&b.eccentricity))
    });
    let circular = rows
        .iter()
        .find(|r| r.eccentricity == 0.0 && !r.managed)
        .and_then(|r| r.measured.map(|x| x.time));
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let t = r.measured.map_or(f64::NAN, |x| x.time);
            vec![
                r.eccentricity,
                if r.managed { 1.0 } else { 0.0 },
                r.beta,
                r.predicted,
                t,
                t * ms,
                circular.map_or(f64::NAN, |c| t / c),
                r.measured.map_or(f64::NAN, |x| x.survival),
            ]
        })
        .collect();
    write_table_csv(
        &dir.join("revival_table.csv"),
        &[
            "eccentricity",
            "managed",
            "beta",
            "predicted_dimless",
            "measured_dimless",
            "measured_ms",
            "ratio_to_circular",
            "peak_survival",
        ],
        &table,
    )?;
    let mut summary = vec![format!(
        "{:<16}{}",
        "eccentricity",
        cfg.revival
            .eccentricities
            .iter()
            .map(|e| format!("{e:>12.2}"))
            .collect::<String>()
    )];
    for managed in [false, true] {
        let label = if managed { "after DM (ms)" } else { "before DM (ms)" };
        let cells: String = cfg
            .revival
            .eccentricities
            .iter()
            .map(|&e| {
                let r = rows.iter().find(|r| r.eccentricity == e && r.managed == managed);
                match r.and_then(|r| r.measured) {
                    Some(x) => format!("{:>12.2}", x.time * ms),
                    None => format!("{:>12}", "-"),
                }
            })
            .collect();
        summary.push(format!("{label:<16}{cells}"));
    }
    m.derive(
        "rows",
        Value::Array(
            rows.iter()
                .map(|r| {
                    json!({
                        "eccentricity": r.eccentricity,
                        "managed": r.managed,
                        "beta": r.beta,
                        "predicted": r.predicted,
                        "measured": r.measured.map(|x| x.time),
                        "measured_ms": r.measured.map(|x| x.time * ms),
                        "peak_survival": r.measured.map(|x| x.survival),
                    })
                })
                .collect(),
        ),
    );
    m.diagnose("revival_detection", "windowed argmax of S(t) with parabolic refinement");
    m.diagnose(
        "revival_window_factors",
        json!([cfg.revival.window.0, cfg.revival.window.1]),
    );
    let manifest = m.finish(dir)?;
    if !failures.is_empty() {
        return Err(anyhow::Error::new(Error::Detection(failures.join("; "))));
    }
    Ok(Outcome { summary, manifest })
}

#[derive(Debug)]
pub struct InterferenceRun {
    pub switch_time: f64,
    pub output: EvolutionOutput,
    pub pattern: std::result::Result<InterferencePattern, Error>,
}

/// Evolve in the waveguide, switch to the harmonic trap and image the
/// density after the hold time.
pub fn interference_run(cfg: &ExperimentConfig, grid: &Arc<GridSpec>) -> Result<InterferenceRun> {
    let w = cfg.waveguide;
    let disp = cfg.dispersion();
    let switch_time = match cfg.schedule.switch {
        SwitchSpec::At(t) => t,
        SwitchSpec::QuarterPredicted | SwitchSpec::Never => predicted_revival_time(&w, disp)? / 4.0,
        SwitchSpec::QuarterMeasured => {
            let circ = revival_run(cfg, grid, w.with_eccentricity(0.0), DispersionPair::unity())?;
            circ.measured?.time / 4.0
        }
    };
    let dt = cfg.evolution.dt;
    let t_final = switch_time + cfg.schedule.hold_time;
    let n = (t_final / dt).round().max(1.0) as usize;
    let ring = elliptic_ring_potential(grid, &w)?;
    let trap = harmonic_potential(grid, &HarmonicParams::new(cfg.schedule.harmonic_frequency)?);
    let mut schedule = TrapSchedule::new(vec![(0.0, ring), (switch_time, trap)], n as f64 * dt)?;
    if cfg.schedule.hold_dispersion == HoldDispersion::Unity {
        schedule = schedule.with_dispersion(1, DispersionPair::unity())?;
    }
    let f0 = make_initial_state(grid, &initial_state(cfg, w))?;
    let ev = EvolutionConfig::real(dt, n, cfg.coupling)
        .with_stride(cfg.evolution.record_stride)
        .with_snapshots(vec![switch_time.min(n as f64 * dt)]);
    let output = evolve_with_schedule(&f0, &schedule, disp, &ev).map_err(anyhow::Error::new)?;
    let pattern = fringe_periods(&output.final_field.density());
    Ok(InterferenceRun {
        switch_time,
        output,
        pattern,
    })
}

fn interfere(cfg: &ExperimentConfig) -> Result<Outcome> {
    let started = unix_now();
    let dir = &cfg.output_dir;
    let grid = grid_of(cfg)?;
    let mut m = RunManifest::new(cfg, started);
    let run = match interference_run(cfg, &grid) {
        Ok(r) => r,
        Err(e) => {
            let f = e.downcast::<EvolutionFailure>()?;
            return Err(salvage(dir, m, f));
        }
    };
    let ms = m.time_units.ms_per_unit;
    let um = m.time_units.um_per_unit;
    write_series_csv(&dir.join("series.csv"), &run.output.series, ms)?;
    if let Some(s) = run.output.snapshots.first() {
        write_snapshot(dir, "at_switch", &s.field, s.time, cfg.heatmaps, &mut m)?;
    }
    let t_end = run.output.steps as f64 * cfg.evolution.dt;
    write_snapshot(dir, "final", &run.output.final_field, t_end, cfg.heatmaps, &mut m)?;
    m.derive("coupling", cfg.coupling);
    m.derive("beta", cfg.dispersion().beta);
    m.derive("switch_time", run.switch_time);
    m.derive("switch_time_ms", run.switch_time * ms);
    m.derive("final_time", t_end);
    m.derive("final_time_ms", t_end * ms);
    let mut summary = vec![format!(
        "switch at t = {:.4} ({:.3} ms), imaged at t = {t_end:.4} ({:.3} ms)",
        run.switch_time,
        run.switch_time * ms,
        t_end * ms
    )];
    let pattern = match run.pattern {
        Ok(p) => p,
        Err(e) => {
            m.diagnose("fringe_detection_error", e.to_string());
            m.finish(dir)?;
            return Err(anyhow::Error::new(e));
        }
    };
    m.derive("fringe_period_u", pattern.period_u);
    m.derive("fringe_period_v", pattern.period_v);
    m.derive("fringe_period_u_um", pattern.period_u * um);
    m.derive("fringe_period_v_um", pattern.period_v * um);
    m.derive("fringe_ratio_v_over_u", pattern.period_v / pattern.period_u);
    summary.push(format!(
        "u = {:.4} ({:.3} um), v = {:.4} ({:.3} um), v/u = {:.4}",
        pattern.period_u,
        pattern.period_u * um,
        pattern.period_v,
        pattern.period_v * um,
        pattern.period_v / pattern.period_u
    ));
    let manifest = m.finish(dir)?;
    Ok(Outcome { summary, manifest })
}

fn oracle(cfg: &ExperimentConfig) -> Result<Outcome> {
    let started = unix_now();
    let dir = &cfg.output_dir;
    let checks = oracle_suite::run_all(cfg)?;
    let mut m = RunManifest::new(cfg, started);
    let rows: Vec<Vec<f64>> = checks
        .iter()
        .map(|c| {
            vec![
                c.value,
                c.expected,
                c.residual,
                c.tolerance,
                if c.pass { 1.0 } else { 0.0 },
            ]
        })
        .collect();
    write_table_csv(
        &dir.join("oracle_values.csv"),
        &["value", "expected", "residual", "tolerance", "pass"],
        &rows,
    )?;
    let mut summary = Vec::new();
    for c in &checks {
        m.derive(&c.name, json!({"value": c.value, "expected": c.expected, "residual": c.residual, "tolerance": c.tolerance, "pass": c.pass}));
        summary.push(c.line());
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let manifest = m.finish(dir)?;
    if !failed.is_empty() {
        for line in &summary {
            println!("{line}");
        }
        return Err(anyhow!(Error::Detection(format!(
            "oracle checks failed: {}",
            failed.join(", ")
        ))));
    }
    Ok(Outcome { summary, manifest })
}
