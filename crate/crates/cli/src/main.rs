use anyhow::{Context, Result};
use atomtronics_cli::config::{env_overrides, ExperimentConfig, ExperimentKind, Preset};
use atomtronics_cli::{exit_code, experiments};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "atomtronics", version, about = "Ring-waveguide condensate experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground state in the elliptic ring by imaginary-time propagation.
    Ground(Common),
    /// Real-time evolution with survival, widths and snapshots.
    Evolve(Common),
    /// Overlap Λ as a function of β for several eccentricities.
    SweepBeta(Common),
    /// Revival times before and after dispersion management.
    RevivalTable(Common),
    /// Release into a harmonic trap and measure fringe periods.
    Interfere(Common),
    /// Checks against closed-form results.
    Oracle(Common),
    /// Run whatever experiment the config file names.
    Run(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Paper,
    Ci,
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Grid preset.
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Write PNG heatmaps next to field dumps.
    #[arg(long)]
    heatmaps: bool,
    /// Worker threads for independent runs.
    #[arg(long, short)]
    jobs: Option<usize>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn resolve(kind: Option<ExperimentKind>, c: &Common) -> Result<ExperimentConfig> {
    let text = match &c.config {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    let mut overrides: BTreeMap<String, String> = env_overrides();
    if let Some(p) = c.preset {
        let preset = match p {
            PresetArg::Paper => Preset::Paper,
            PresetArg::Ci => Preset::Ci,
        };
        let g = preset.grid();
        overrides.insert("grid.nx".into(), g.nx.to_string());
        overrides.insert("grid.ny".into(), g.ny.to_string());
        overrides.insert("grid.dx".into(), format!("{:?}", g.dx));
        overrides.insert("grid.dy".into(), format!("{:?}", g.dy));
    }
    if let Some(o) = &c.out {
        overrides.insert("output.dir".into(), o.display().to_string());
    }
    if c.heatmaps {
        overrides.insert("output.heatmaps".into(), "true".into());
    }
    for s in &c.set {
        let (k, v) = s
            .split_once('=')
            .with_context(|| format!("`--set {s}` is not of the form key=value"))?;
        overrides.insert(k.trim().into(), v.trim().into());
    }
    Ok(ExperimentConfig::from_text(&text, kind, &overrides)?)
}

fn run(cli: Cli) -> Result<()> {
    let (kind, common) = match &cli.command {
        Command::Ground(c) => (Some(ExperimentKind::Ground), c),
        Command::Evolve(c) => (Some(ExperimentKind::Evolve), c),
        Command::SweepBeta(c) => (Some(ExperimentKind::SweepBeta), c),
        Command::RevivalTable(c) => (Some(ExperimentKind::RevivalTable), c),
        Command::Interfere(c) => (Some(ExperimentKind::Interfere), c),
        Command::Oracle(c) => (Some(ExperimentKind::Oracle), c),
        Command::Run(c) => (None, c),
    };
    if let Some(n) = common.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let cfg = resolve(kind, common)?;
    log::info!("running {} into {}", cfg.kind.name(), cfg.output_dir.display());
    let outcome = experiments::run(&cfg)?;
    for line in &outcome.summary {
        println!("{line}");
    }
    println!("manifest: {}", outcome.manifest.display());
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(exit_code(&e));
    }
}
