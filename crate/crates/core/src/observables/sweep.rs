use super::overlap::{expected_uniform_state, overlap_lambda};
use crate::error::{Error, Result};
use crate::evolution::{ground_state_itp, DispersionPair, EvolutionConfig};
use crate::field::ComplexField2D;
use crate::grid::GridSpec;
use crate::potentials::{elliptic_ring_potential, WaveguideParams};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct BetaSweepConfig {
    pub grid: Arc<GridSpec>,
    pub waveguide: WaveguideParams,
    /// Imaginary-time settings, including the coupling.
    pub itp: EvolutionConfig,
    pub beta_min: f64,
    pub beta_max: f64,
    pub n_points: usize,
    /// Resample once around the coarse maximum at quarter spacing.
    pub refine: bool,
    /// Seed each ground state with the previous one instead of the ring ansatz.
    pub warm_start: bool,
}

impl BetaSweepConfig {
    /// 25 points on [`default_beta_range`], refined, warm-started.
    pub fn new(grid: Arc<GridSpec>, waveguide: WaveguideParams, itp: EvolutionConfig) -> Self {
        let (beta_min, beta_max) = default_beta_range(waveguide.eccentricity);
        BetaSweepConfig {
            grid,
            waveguide,
            itp,
            beta_min,
            beta_max,
            n_points: 25,
            refine: true,
            warm_start: true,
        }
    }
}

/// `[max(0.05, 1−ε²−0.15), 1−ε²+0.15]`.
pub fn default_beta_range(eccentricity: f64) -> (f64, f64) {
    let centre = 1.0 - eccentricity * eccentricity;
    ((centre - 0.15).max(0.05), centre + 0.15)
}

#[derive(Debug, Clone)]
pub struct BetaSweepResult {
    pub eccentricity: f64,
    /// Sorted ascending.
    pub betas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub chemical_potentials: Vec<f64>,
    pub beta_c: f64,
    pub lambda_max: f64,
    /// Ground state at `beta_c`.
    pub best_state: ComplexField2D,
    pub total_itp_steps: usize,
}

struct Sample {
    beta: f64,
    lambda: f64,
    mu: f64,
    state: ComplexField2D,
}

/// Ground states at a range of β (α = 1) scored by Λ against the uniform
/// elliptical ring. The sampled β with the largest Λ is `beta_c`.
pub fn beta_sweep(cfg: &BetaSweepConfig) -> Result<BetaSweepResult> {
    if !(cfg.beta_min > 0.0) || !(cfg.beta_max > cfg.beta_min) {
        return Err(Error::Config(format!(
            "beta range [{}, {}] must be positive and increasing",
            cfg.beta_min, cfg.beta_max
        )));
    }
    if cfg.n_points < 3 {
        return Err(Error::Config(format!(
            "sweep needs at least 3 points, got {}",
            cfg.n_points
        )));
    }
    let w = cfg.waveguide;
    let potential = Arc::new(elliptic_ring_potential(&cfg.grid, &w)?);
    let expected = expected_uniform_state(&cfg.grid, &w)?;
    let mut total_steps = 0usize;

    let mut run = |beta: f64, seed: &ComplexField2D| -> Result<Sample> {
        let disp = DispersionPair::new(1.0, beta)?;
        let gs = ground_state_itp(&potential, disp, &cfg.itp, seed).map_err(|e| match e {
            Error::Convergence { steps, residual } => Error::Detection(format!(
                "ground state at beta = {beta} did not converge ({steps} steps, residual {residual:.3e})"
            )),
            other => Error::Detection(format!("ground state at beta = {beta} failed: {other}")),
        })?;
        total_steps += gs.steps;
        let lambda = overlap_lambda(&expected, &gs.field)?;
        log::info!(
            "eps = {} beta = {beta:.5} lambda = {lambda:.6} ({} steps)",
            w.eccentricity,
            gs.steps
        );
        Ok(Sample {
            beta,
            lambda,
            mu: gs.chemical_potential,
            state: gs.field,
        })
    };

    let h = (cfg.beta_max - cfg.beta_min) / (cfg.n_points - 1) as f64;
    let mut samples: Vec<Sample> = Vec::with_capacity(cfg.n_points + 6);
    for k in 0..cfg.n_points {
        let beta = cfg.beta_min + k as f64 * h;
        let seed = match samples.last() {
            Some(prev) if cfg.warm_start => prev.state.clone(),
            _ => expected.clone(),
        };
        samples.push(run(beta, &seed)?);
    }

    if cfg.refine {
        let best = argmax(&samples);
        let centre = samples[best].beta;
        for offset in [-0.75, -0.5, -0.25, 0.25, 0.5, 0.75] {
            let beta = centre + offset * h;
            if beta < cfg.beta_min || beta > cfg.beta_max {
                continue;
            }
            let seed = if cfg.warm_start {
                samples[best].state.clone()
            } else {
                expected.clone()
            };
            let s = run(beta, &seed)?;
            samples.push(s);
        }
        samples.sort_by(|a, b| a.beta.total_cmp(&b.beta));
    }

    let best = argmax(&samples);
    let beta_c = samples[best].beta;
    let lambda_max = samples[best].lambda;
    let best_state = samples[best].state.clone();
    Ok(BetaSweepResult {
        eccentricity: w.eccentricity,
        betas: samples.iter().map(|s| s.beta).collect(),
        lambdas: samples.iter().map(|s| s.lambda).collect(),
        chemical_potentials: samples.iter().map(|s| s.mu).collect(),
        beta_c,
        lambda_max,
        best_state,
        total_itp_steps: total_steps,
    })
}

fn argmax(samples: &[Sample]) -> usize {
    samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.lambda.total_cmp(&b.1.lambda))
        .map(|(k, _)| k)
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn default_range_brackets_theory() {
        let (lo, hi) = default_beta_range(0.5);
        assert!((lo - 0.6).abs() < 1e-12 && (hi - 0.9).abs() < 1e-12);
        let (lo, _) = default_beta_range(0.99);
        assert_eq!(lo, 0.05);
    }

    #[test]
    fn rejects_bad_ranges() {
        let grid = Arc::new(make_grid(64, 64, 0.5, 0.5).unwrap());
        let w = WaveguideParams {
            semi_major: 5.0,
            ..Default::default()
        };
        let mut cfg = BetaSweepConfig::new(grid, w, EvolutionConfig::imaginary(0.02, 100, 0.0, 1e-6));
        cfg.n_points = 2;
        assert!(beta_sweep(&cfg).is_err());
        cfg.n_points = 5;
        cfg.beta_min = 0.0;
        assert!(beta_sweep(&cfg).is_err());
    }
}
