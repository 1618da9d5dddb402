//! Flat `section.key = value` experiment configuration.
//!
//! ```text
//! experiment = interfere
//! waveguide.eccentricity = 0.9
//! dispersion.beta = auto
//! ```
//!
//! Blank lines and `#` comments are ignored. Every key may be overridden by
//! an environment variable named `ATOMTRONICS_` followed by the key in upper
//! case with dots replaced by underscores, e.g. `ATOMTRONICS_WAVEGUIDE_GAMMA`.

use atomtronics_core::units::{PhysicalParams, TimeConvention};
use atomtronics_core::{DispersionPair, GridSpec, WaveguideParams};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

pub const ENV_PREFIX: &str = "ATOMTRONICS_";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Ground,
    Evolve,
    SweepBeta,
    RevivalTable,
    Interfere,
    Oracle,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Ground,
        ExperimentKind::Evolve,
        ExperimentKind::SweepBeta,
        ExperimentKind::RevivalTable,
        ExperimentKind::Interfere,
        ExperimentKind::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Ground => "ground",
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::SweepBeta => "sweep-beta",
            ExperimentKind::RevivalTable => "revival-table",
            ExperimentKind::Interfere => "interfere",
            ExperimentKind::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Keys a config file must set for this experiment.
    fn required_keys(self) -> &'static [&'static str] {
        const WAVEGUIDE: [&str; 4] = [
            "waveguide.depth",
            "waveguide.gamma",
            "waveguide.radius",
            "waveguide.eccentricity",
        ];
        match self {
            ExperimentKind::Ground | ExperimentKind::Evolve | ExperimentKind::Interfere => &WAVEGUIDE,
            ExperimentKind::SweepBeta | ExperimentKind::RevivalTable => &WAVEGUIDE[..3],
            ExperimentKind::Oracle => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Paper,
    Ci,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Paper => "paper",
            Preset::Ci => "ci",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "paper" => Some(Preset::Paper),
            "ci" => Some(Preset::Ci),
            _ => None,
        }
    }

    pub fn grid(self) -> GridConfig {
        let g = match self {
            Preset::Paper => GridSpec::paper_preset(),
            Preset::Ci => GridSpec::ci_preset(),
        };
        GridConfig {
            nx: g.nx,
            ny: g.ny,
            dx: g.dx,
            dy: g.dy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

/// `auto` resolves to `1 − ε²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSpec {
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepCount {
    /// Long enough to cover the revival detection window.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotSpec {
    None,
    /// `{1/8, 1/6, 1/4, 1/2, 1}` of the predicted revival time.
    RevivalFractions,
    Times(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    BinaryPeaks,
    RingAnsatz,
    Gaussian,
}

impl InitialKind {
    pub fn name(self) -> &'static str {
        match self {
            InitialKind::BinaryPeaks => "binary_peaks",
            InitialKind::RingAnsatz => "ring_ansatz",
            InitialKind::Gaussian => "gaussian",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [InitialKind::BinaryPeaks, InitialKind::RingAnsatz, InitialKind::Gaussian]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConfig {
    pub kind: InitialKind,
    /// `auto` (None) is the ring ansatz channel width.
    pub transverse_width: Option<f64>,
    pub azimuthal_width: f64,
    pub rotated: bool,
    pub center: (f64, f64),
    pub width_x: f64,
    pub width_y: f64,
}

/// When the waveguide is replaced by a harmonic trap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SwitchSpec {
    Never,
    /// A quarter of the predicted revival time.
    QuarterPredicted,
    /// A quarter of the revival time measured in a preliminary circular run.
    QuarterMeasured,
    At(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleConfig {
    pub switch: SwitchSpec,
    pub harmonic_frequency: f64,
    /// Time spent in the harmonic trap after the switch.
    pub hold_time: f64,
    /// Whether `(α, β)` stays as configured in the harmonic trap or
    /// returns to `(1, 1)`.
    pub hold_dispersion: HoldDispersion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoldDispersion {
    Keep,
    Unity,
}

impl HoldDispersion {
    pub fn name(self) -> &'static str {
        match self {
            HoldDispersion::Keep => "keep",
            HoldDispersion::Unity => "unity",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSettings {
    pub dt: f64,
    pub n_steps: StepCount,
    pub record_stride: usize,
    pub snapshots: SnapshotSpec,
    pub itp_dt: f64,
    pub itp_max_steps: usize,
    pub itp_stride: usize,
    pub convergence_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub eccentricities: Vec<f64>,
    /// `None` uses the default range around `1 − ε²`.
    pub beta_range: Option<(f64, f64)>,
    pub points: usize,
    pub refine: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevivalSettings {
    pub eccentricities: Vec<f64>,
    /// Detection window as multiples of the predicted revival time.
    pub window: (f64, f64),
    /// Shrink `dy` by `sqrt(1 − ε²)` for each eccentric run, keeping `ny`.
    pub aligned_grid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub grid: GridConfig,
    pub physical: PhysicalParams,
    pub waveguide: WaveguideParams,
    pub alpha: f64,
    pub beta: BetaSpec,
    pub coupling: f64,
    pub evolution: EvolutionSettings,
    pub initial: InitialConfig,
    pub schedule: ScheduleConfig,
    pub sweep: SweepSettings,
    pub revival: RevivalSettings,
    pub output_dir: PathBuf,
    pub heatmaps: bool,
}

/// One violated field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub key: String,
    pub message: String,
}

/// Every problem found while reading a configuration.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    pub errors: Vec<FieldError>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration:")?;
        for e in &self.errors {
            write!(f, "\n  {}: {}", e.key, e.message)?;
        }
        Ok(())
    }
}

impl ConfigError {
    fn single(key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            errors: vec![FieldError {
                key: key.to_string(),
                message: message.into(),
            }],
        }
    }

    /// True if some error names `key`.
    pub fn mentions(&self, key: &str) -> bool {
        self.errors.iter().any(|e| e.key == key)
    }
}

const KEYS: &[&str] = &[
    "experiment",
    "grid.nx",
    "grid.ny",
    "grid.dx",
    "grid.dy",
    "physical.atom_count",
    "physical.atom_mass",
    "physical.transverse_frequency",
    "physical.scattering_length",
    "physical.oscillator_length",
    "physical.time_convention",
    "waveguide.depth",
    "waveguide.gamma",
    "waveguide.radius",
    "waveguide.eccentricity",
    "dispersion.alpha",
    "dispersion.beta",
    "coupling",
    "evolution.dt",
    "evolution.n_steps",
    "evolution.record_stride",
    "evolution.snapshots",
    "evolution.itp_dt",
    "evolution.itp_max_steps",
    "evolution.itp_stride",
    "evolution.convergence_tol",
    "initial.kind",
    "initial.transverse_width",
    "initial.azimuthal_width",
    "initial.rotated",
    "initial.center_x",
    "initial.center_y",
    "initial.width_x",
    "initial.width_y",
    "schedule.switch",
    "schedule.harmonic_frequency",
    "schedule.hold_time",
    "schedule.hold_dispersion",
    "sweep.eccentricities",
    "sweep.beta_min",
    "sweep.beta_max",
    "sweep.points",
    "sweep.refine",
    "revival.eccentricities",
    "revival.window_lo",
    "revival.window_hi",
    "revival.aligned_grid",
    "output.dir",
    "output.heatmaps",
];

/// Environment variable that overrides `key`.
pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.replace('.', "_").to_ascii_uppercase())
}

/// Parse `key = value` lines. Duplicate and unknown keys are errors.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    let mut errors = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errors.push(FieldError {
                key: format!("line {}", n + 1),
                message: format!("expected `key = value`, found `{line}`"),
            });
            continue;
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if !KEYS.contains(&k.as_str()) {
            errors.push(FieldError {
                key: k,
                message: "unknown key".into(),
            });
        } else if map.insert(k.clone(), v).is_some() {
            errors.push(FieldError {
                key: k,
                message: "set more than once".into(),
            });
        }
    }
    if errors.is_empty() {
        Ok(map)
    } else {
        Err(ConfigError { errors })
    }
}

impl ExperimentConfig {
    /// Built-in defaults for `kind` on the CI grid.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let physical = PhysicalParams {
            coupling: Some(2.0),
            ..Default::default()
        };
        let (eccentricity, switch, snapshots) = match kind {
            ExperimentKind::Interfere => (0.9, SwitchSpec::QuarterPredicted, SnapshotSpec::None),
            ExperimentKind::Evolve => (0.0, SwitchSpec::Never, SnapshotSpec::RevivalFractions),
            _ => (0.0, SwitchSpec::Never, SnapshotSpec::None),
        };
        ExperimentConfig {
            kind,
            grid: Preset::Ci.grid(),
            physical,
            waveguide: WaveguideParams::default().with_eccentricity(eccentricity),
            alpha: 1.0,
            beta: if kind == ExperimentKind::Interfere {
                BetaSpec::Auto
            } else {
                BetaSpec::Value(1.0)
            },
            coupling: 2.0,
            evolution: EvolutionSettings {
                dt: 0.005,
                n_steps: StepCount::Auto,
                record_stride: 25,
                snapshots,
                itp_dt: 0.01,
                itp_max_steps: 200_000,
                itp_stride: 100,
                convergence_tol: 1e-9,
            },
            initial: InitialConfig {
                kind: InitialKind::BinaryPeaks,
                transverse_width: None,
                azimuthal_width: 1.0,
                rotated: false,
                center: (0.0, 0.0),
                width_x: 1.0,
                width_y: 1.0,
            },
            schedule: ScheduleConfig {
                switch,
                harmonic_frequency: 0.5,
                hold_time: 3.0,
                hold_dispersion: HoldDispersion::Unity,
            },
            sweep: SweepSettings {
                eccentricities: vec![0.25, 0.5, 0.75, 0.9],
                beta_range: None,
                points: 25,
                refine: true,
            },
            revival: RevivalSettings {
                eccentricities: vec![0.0, 0.25, 0.75, 0.9],
                window: (0.5, 1.3),
                aligned_grid: true,
            },
            output_dir: PathBuf::from("out"),
            heatmaps: false,
        }
    }

    /// Read a config file, apply environment overrides and validate.
    /// `expected` is the subcommand the file is run under, if any.
    pub fn load(path: &Path, expected: Option<ExperimentKind>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::single("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text, expected, &env_overrides())
    }

    /// Parse config text. Keys in `overrides` replace those in the text.
    pub fn from_text(
        text: &str,
        expected: Option<ExperimentKind>,
        overrides: &BTreeMap<String, String>,
    ) -> Result<Self, ConfigError> {
        let mut map = parse_pairs(text)?;
        for (k, v) in overrides {
            map.insert(k.clone(), v.clone());
        }
        let kind = match (map.get("experiment"), expected) {
            (Some(name), expected) => {
                let kind = ExperimentKind::parse(name)
                    .ok_or_else(|| ConfigError::single("experiment", format!("unknown experiment `{name}`")))?;
                if let Some(e) = expected {
                    if e != kind {
                        return Err(ConfigError::single(
                            "experiment",
                            format!("file describes `{}` but `{}` was requested", kind.name(), e.name()),
                        ));
                    }
                }
                kind
            }
            (None, Some(e)) => e,
            (None, None) => return Err(ConfigError::single("experiment", "missing")),
        };
        let mut errors: Vec<FieldError> = kind
            .required_keys()
            .iter()
            .filter(|k| !map.contains_key(**k))
            .map(|k| FieldError {
                key: k.to_string(),
                message: format!("required for `{}`", kind.name()),
            })
            .collect();
        let mut cfg = Self::defaults(kind);
        cfg.apply(&map, &mut errors);
        errors.extend(cfg.check());
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError { errors })
        }
    }

    /// Apply key/value pairs on top of `self`, collecting parse errors.
    pub fn apply(&mut self, map: &BTreeMap<String, String>, errors: &mut Vec<FieldError>) {
        let mut r = Reader { map, errors };
        r.parse("grid.nx", &mut self.grid.nx);
        r.parse("grid.ny", &mut self.grid.ny);
        r.parse("grid.dx", &mut self.grid.dx);
        r.parse("grid.dy", &mut self.grid.dy);
        r.parse("physical.atom_count", &mut self.physical.atom_count);
        r.parse("physical.atom_mass", &mut self.physical.atom_mass);
        r.parse("physical.transverse_frequency", &mut self.physical.transverse_frequency);
        r.parse("physical.scattering_length", &mut self.physical.scattering_length);
        r.with(
            "physical.oscillator_length",
            &mut self.physical.oscillator_length,
            |s| {
                if s == "derived" {
                    Some(None)
                } else {
                    s.parse().ok().map(Some)
                }
            },
        );
        r.with(
            "physical.time_convention",
            &mut self.physical.time_convention,
            TimeConvention::parse,
        );
        r.parse("waveguide.depth", &mut self.waveguide.depth);
        r.parse("waveguide.gamma", &mut self.waveguide.width);
        r.parse("waveguide.radius", &mut self.waveguide.semi_major);
        r.parse("waveguide.eccentricity", &mut self.waveguide.eccentricity);
        r.parse("dispersion.alpha", &mut self.alpha);
        r.with("dispersion.beta", &mut self.beta, |s| {
            if s == "auto" {
                Some(BetaSpec::Auto)
            } else {
                s.parse().ok().map(BetaSpec::Value)
            }
        });
        let mut physical_coupling = false;
        r.with("coupling", &mut self.coupling, |s| {
            if s == "physical" {
                physical_coupling = true;
                Some(f64::NAN)
            } else {
                s.parse().ok()
            }
        });
        r.parse("evolution.dt", &mut self.evolution.dt);
        r.with("evolution.n_steps", &mut self.evolution.n_steps, |s| {
            if s == "auto" {
                Some(StepCount::Auto)
            } else {
                s.parse().ok().map(StepCount::Fixed)
            }
        });
        r.parse("evolution.record_stride", &mut self.evolution.record_stride);
        r.with("evolution.snapshots", &mut self.evolution.snapshots, |s| match s {
            "none" => Some(SnapshotSpec::None),
            "fractions" => Some(SnapshotSpec::RevivalFractions),
            _ => parse_list(s).map(SnapshotSpec::Times),
        });
        r.parse("evolution.itp_dt", &mut self.evolution.itp_dt);
        r.parse("evolution.itp_max_steps", &mut self.evolution.itp_max_steps);
        r.parse("evolution.itp_stride", &mut self.evolution.itp_stride);
        r.parse("evolution.convergence_tol", &mut self.evolution.convergence_tol);
        r.with("initial.kind", &mut self.initial.kind, InitialKind::parse);
        r.with("initial.transverse_width", &mut self.initial.transverse_width, |s| {
            if s == "auto" {
                Some(None)
            } else {
                s.parse().ok().map(Some)
            }
        });
        r.parse("initial.azimuthal_width", &mut self.initial.azimuthal_width);
        r.parse("initial.rotated", &mut self.initial.rotated);
        r.parse("initial.center_x", &mut self.initial.center.0);
        r.parse("initial.center_y", &mut self.initial.center.1);
        r.parse("initial.width_x", &mut self.initial.width_x);
        r.parse("initial.width_y", &mut self.initial.width_y);
        r.with("schedule.switch", &mut self.schedule.switch, |s| match s {
            "never" => Some(SwitchSpec::Never),
            "quarter_predicted" => Some(SwitchSpec::QuarterPredicted),
            "quarter_measured" => Some(SwitchSpec::QuarterMeasured),
            _ => s.parse().ok().map(SwitchSpec::At),
        });
        r.parse("schedule.harmonic_frequency", &mut self.schedule.harmonic_frequency);
        r.parse("schedule.hold_time", &mut self.schedule.hold_time);
        r.with(
            "schedule.hold_dispersion",
            &mut self.schedule.hold_dispersion,
            |s| match s {
                "keep" => Some(HoldDispersion::Keep),
                "unity" => Some(HoldDispersion::Unity),
                _ => None,
            },
        );
        r.with("sweep.eccentricities", &mut self.sweep.eccentricities, parse_list);
        let (mut lo, mut hi) = (f64::NAN, f64::NAN);
        let has_lo = r.with("sweep.beta_min", &mut lo, parse_auto_f64);
        let has_hi = r.with("sweep.beta_max", &mut hi, parse_auto_f64);
        if has_lo || has_hi {
            self.sweep.beta_range = if lo.is_nan() && hi.is_nan() {
                None
            } else if lo.is_nan() || hi.is_nan() {
                r.errors.push(FieldError {
                    key: "sweep.beta_min".into(),
                    message: "sweep.beta_min and sweep.beta_max must both be numbers or both be auto".into(),
                });
                None
            } else {
                Some((lo, hi))
            };
        }
        r.parse("sweep.points", &mut self.sweep.points);
        r.parse("sweep.refine", &mut self.sweep.refine);
        r.with("revival.eccentricities", &mut self.revival.eccentricities, parse_list);
        r.parse("revival.window_lo", &mut self.revival.window.0);
        r.parse("revival.window_hi", &mut self.revival.window.1);
        r.parse("revival.aligned_grid", &mut self.revival.aligned_grid);
        r.with("output.dir", &mut self.output_dir, |s| Some(PathBuf::from(s)));
        r.parse("output.heatmaps", &mut self.heatmaps);
        if physical_coupling {
            self.physical.coupling = None;
            match self.physical.coupling() {
                Ok(g) => {
                    self.coupling = g;
                    self.physical.coupling = Some(g);
                }
                Err(e) => r.errors.push(FieldError {
                    key: "coupling".into(),
                    message: e.to_string(),
                }),
            }
        } else if !self.coupling.is_nan() {
            self.physical.coupling = Some(self.coupling);
        }
    }

    /// Range checks on the assembled configuration.
    pub fn check(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        let mut bad = |key: &str, ok: bool, message: String| {
            if !ok {
                errors.push(FieldError {
                    key: key.into(),
                    message,
                });
            }
        };
        for (key, n) in [("grid.nx", self.grid.nx), ("grid.ny", self.grid.ny)] {
            bad(
                key,
                n >= 2 && n.is_power_of_two(),
                format!("{n} must be a power of two ≥ 2"),
            );
        }
        for (key, v) in [
            ("grid.dx", self.grid.dx),
            ("grid.dy", self.grid.dy),
            ("waveguide.depth", self.waveguide.depth),
            ("waveguide.gamma", self.waveguide.width),
            ("waveguide.radius", self.waveguide.semi_major),
            ("dispersion.alpha", self.alpha),
            ("evolution.dt", self.evolution.dt),
            ("evolution.itp_dt", self.evolution.itp_dt),
            ("evolution.convergence_tol", self.evolution.convergence_tol),
            ("initial.azimuthal_width", self.initial.azimuthal_width),
            ("initial.width_x", self.initial.width_x),
            ("initial.width_y", self.initial.width_y),
            ("schedule.harmonic_frequency", self.schedule.harmonic_frequency),
        ] {
            bad(key, v > 0.0 && v.is_finite(), format!("{v} must be positive"));
        }
        let e = self.waveguide.eccentricity;
        bad(
            "waveguide.eccentricity",
            (0.0..1.0).contains(&e),
            format!("{e} must lie in [0, 1)"),
        );
        if let BetaSpec::Value(b) = self.beta {
            bad(
                "dispersion.beta",
                b > 0.0 && b.is_finite(),
                format!("{b} must be positive or auto"),
            );
        }
        bad(
            "coupling",
            self.coupling.is_finite() && self.coupling >= 0.0,
            format!("{} must be non-negative", self.coupling),
        );
        if let StepCount::Fixed(n) = self.evolution.n_steps {
            bad("evolution.n_steps", n >= 1, "must be at least 1".into());
        }
        bad(
            "evolution.record_stride",
            self.evolution.record_stride >= 1,
            "must be at least 1".into(),
        );
        bad(
            "evolution.itp_stride",
            self.evolution.itp_stride >= 1,
            "must be at least 1".into(),
        );
        bad(
            "evolution.itp_max_steps",
            self.evolution.itp_max_steps >= 1,
            "must be at least 1".into(),
        );
        if let SnapshotSpec::Times(ts) = &self.evolution.snapshots {
            bad(
                "evolution.snapshots",
                ts.iter().all(|t| *t >= 0.0 && t.is_finite()),
                "times must be non-negative".into(),
            );
        }
        if let Some(w) = self.initial.transverse_width {
            bad(
                "initial.transverse_width",
                w > 0.0 && w.is_finite(),
                format!("{w} must be positive or auto"),
            );
        }
        if let SwitchSpec::At(t) = self.schedule.switch {
            bad(
                "schedule.switch",
                t >= 0.0 && t.is_finite(),
                format!("{t} must be non-negative"),
            );
        }
        bad(
            "schedule.hold_time",
            self.schedule.hold_time >= 0.0 && self.schedule.hold_time.is_finite(),
            "must be non-negative".into(),
        );
        for (key, list) in [
            ("sweep.eccentricities", &self.sweep.eccentricities),
            ("revival.eccentricities", &self.revival.eccentricities),
        ] {
            bad(
                key,
                !list.is_empty() && list.iter().all(|e| (0.0..1.0).contains(e)),
                "must be a non-empty list of values in [0, 1)".into(),
            );
        }
        if let Some((lo, hi)) = self.sweep.beta_range {
            bad(
                "sweep.beta_min",
                lo > 0.0 && hi > lo,
                format!("range [{lo}, {hi}] must be positive and increasing"),
            );
        }
        bad("sweep.points", self.sweep.points >= 3, "must be at least 3".into());
        let (lo, hi) = self.revival.window;
        bad(
            "revival.window_lo",
            lo > 0.0 && hi > lo,
            format!("window [{lo}, {hi}] must be positive and increasing"),
        );
        if let Err(e) = self.physical.validate() {
            bad("physical", false, e.to_string());
        }
        errors
    }

    /// `(α, β)` with `auto` resolved against the configured eccentricity.
    pub fn dispersion(&self) -> DispersionPair {
        self.dispersion_for(self.waveguide.eccentricity)
    }

    pub fn dispersion_for(&self, eccentricity: f64) -> DispersionPair {
        let beta = match self.beta {
            BetaSpec::Auto => self.alpha * (1.0 - eccentricity * eccentricity),
            BetaSpec::Value(b) => b,
        };
        DispersionPair {
            alpha: self.alpha,
            beta,
        }
    }

    pub fn apply_preset(&mut self, preset: Preset) {
        self.grid = preset.grid();
    }

    /// Canonical text form; [`ExperimentConfig::from_text`] reads it back
    /// to an equal value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.pairs() {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// Every key with its value, in canonical order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let f = |x: f64| format!("{x:?}");
        let (beta_min, beta_max) = match self.sweep.beta_range {
            Some((lo, hi)) => (f(lo), f(hi)),
            None => ("auto".into(), "auto".into()),
        };
        vec![
            ("experiment", self.kind.name().into()),
            ("grid.nx", self.grid.nx.to_string()),
            ("grid.ny", self.grid.ny.to_string()),
            ("grid.dx", f(self.grid.dx)),
            ("grid.dy", f(self.grid.dy)),
            ("physical.atom_count", f(self.physical.atom_count)),
            ("physical.atom_mass", f(self.physical.atom_mass)),
            ("physical.transverse_frequency", f(self.physical.transverse_frequency)),
            ("physical.scattering_length", f(self.physical.scattering_length)),
            (
                "physical.oscillator_length",
                self.physical.oscillator_length.map_or("derived".into(), f),
            ),
            ("physical.time_convention", self.physical.time_convention.name().into()),
            ("waveguide.depth", f(self.waveguide.depth)),
            ("waveguide.gamma", f(self.waveguide.width)),
            ("waveguide.radius", f(self.waveguide.semi_major)),
            ("waveguide.eccentricity", f(self.waveguide.eccentricity)),
            ("dispersion.alpha", f(self.alpha)),
            (
                "dispersion.beta",
                match self.beta {
                    BetaSpec::Auto => "auto".into(),
                    BetaSpec::Value(b) => f(b),
                },
            ),
            ("coupling", f(self.coupling)),
            ("evolution.dt", f(self.evolution.dt)),
            (
                "evolution.n_steps",
                match self.evolution.n_steps {
                    StepCount::Auto => "auto".into(),
                    StepCount::Fixed(n) => n.to_string(),
                },
            ),
            ("evolution.record_stride", self.evolution.record_stride.to_string()),
            (
                "evolution.snapshots",
                match &self.evolution.snapshots {
                    SnapshotSpec::None => "none".into(),
                    SnapshotSpec::RevivalFractions => "fractions".into(),
                    SnapshotSpec::Times(ts) => list(ts),
                },
            ),
            ("evolution.itp_dt", f(self.evolution.itp_dt)),
            ("evolution.itp_max_steps", self.evolution.itp_max_steps.to_string()),
            ("evolution.itp_stride", self.evolution.itp_stride.to_string()),
            ("evolution.convergence_tol", f(self.evolution.convergence_tol)),
            ("initial.kind", self.initial.kind.name().into()),
            (
                "initial.transverse_width",
                self.initial.transverse_width.map_or("auto".into(), f),
            ),
            ("initial.azimuthal_width", f(self.initial.azimuthal_width)),
            ("initial.rotated", self.initial.rotated.to_string()),
            ("initial.center_x", f(self.initial.center.0)),
            ("initial.center_y", f(self.initial.center.1)),
            ("initial.width_x", f(self.initial.width_x)),
            ("initial.width_y", f(self.initial.width_y)),
            (
                "schedule.switch",
                match self.schedule.switch {
                    SwitchSpec::Never => "never".into(),
                    SwitchSpec::QuarterPredicted => "quarter_predicted".into(),
                    SwitchSpec::QuarterMeasured => "quarter_measured".into(),
                    SwitchSpec::At(t) => f(t),
                },
            ),
            ("schedule.harmonic_frequency", f(self.schedule.harmonic_frequency)),
            ("schedule.hold_time", f(self.schedule.hold_time)),
            ("schedule.hold_dispersion", self.schedule.hold_dispersion.name().into()),
            ("sweep.eccentricities", list(&self.sweep.eccentricities)),
            ("sweep.beta_min", beta_min),
            ("sweep.beta_max", beta_max),
            ("sweep.points", self.sweep.points.to_string()),
            ("sweep.refine", self.sweep.refine.to_string()),
            ("revival.eccentricities", list(&self.revival.eccentricities)),
            ("revival.window_lo", f(self.revival.window.0)),
            ("revival.window_hi", f(self.revival.window.1)),
            ("revival.aligned_grid", self.revival.aligned_grid.to_string()),
            ("output.dir", self.output_dir.display().to_string()),
            ("output.heatmaps", self.heatmaps.to_string()),
        ]
    }
}

/// Overrides present in the process environment.
pub fn env_overrides() -> BTreeMap<String, String> {
    KEYS.iter()
        .filter_map(|k| std::env::var(env_name(k)).ok().map(|v| (k.to_string(), v)))
        .collect()
}

fn parse_list(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse().ok()).collect()
}

fn parse_auto_f64(s: &str) -> Option<f64> {
    if s == "auto" {
        Some(f64::NAN)
    } else {
        s.parse().ok()
    }
}

struct Reader<'a> {
    map: &'a BTreeMap<String, String>,
    errors: &'a mut Vec<FieldError>,
}

impl Reader<'_> {
    fn parse<T: std::str::FromStr>(&mut self, key: &str, slot: &mut T) -> bool {
        self.with(key, slot, |s| s.parse().ok())
    }

    /// Returns whether the key was present.
    fn with<T>(&mut self, key: &str, slot: &mut T, mut conv: impl FnMut(&str) -> Option<T>) -> bool {
        let Some(raw) = self.map.get(key) else {
            return false;
        };
        match conv(raw) {
            Some(v) => *slot = v,
            None => self.errors.push(FieldError {
                key: key.to_string(),
                message: format!("cannot parse `{raw}`"),
            }),
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn none() -> BTreeMap<String, String> {
        BTreeMap::new()
    }

    #[test]
    fn env_names() {
        assert_eq!(env_name("waveguide.gamma"), "ATOMTRONICS_WAVEGUIDE_GAMMA");
        assert_eq!(
            env_name("physical.time_convention"),
            "ATOMTRONICS_PHYSICAL_TIME_CONVENTION"
        );
    }

    #[test]
    fn parses_comments_and_auto() {
        let text = "experiment = ground # comment\n\n# full line\nwaveguide.depth = 50\nwaveguide.gamma = 1\nwaveguide.radius = 10\nwaveguide.eccentricity = 0.9\ndispersion.beta = auto\n";
        let cfg = ExperimentConfig::from_text(text, None, &none()).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Ground);
        assert_eq!(cfg.beta, BetaSpec::Auto);
        assert!((cfg.dispersion().beta - 0.19).abs() < 1e-12);
    }

    #[test]
    fn lists_every_violation() {
        let text = "experiment = evolve\nwaveguide.depth = -1\nwaveguide.radius = 10\ngrid.nx = 300\nevolution.dt = zero\nbogus.key = 1\n";
        let err = ExperimentConfig::from_text(text, None, &none()).unwrap_err();
        assert!(err.mentions("bogus.key"));
        let text =
            "experiment = evolve\nwaveguide.depth = -1\nwaveguide.radius = 10\ngrid.nx = 300\nevolution.dt = zero\n";
        let err = ExperimentConfig::from_text(text, None, &none()).unwrap_err();
        for key in [
            "waveguide.gamma",
            "waveguide.eccentricity",
            "waveguide.depth",
            "grid.nx",
            "evolution.dt",
        ] {
            assert!(err.mentions(key), "{key} missing from {err}");
        }
    }

    #[test]
    fn overrides_win() {
        let text = "experiment = ground\nwaveguide.depth = 50\nwaveguide.radius = 10\nwaveguide.eccentricity = 0.5\n";
        let mut ov = none();
        ov.insert("waveguide.gamma".into(), "1.5".into());
        ov.insert("waveguide.eccentricity".into(), "0.25".into());
        let cfg = ExperimentConfig::from_text(text, None, &ov).unwrap();
        assert_eq!(cfg.waveguide.width, 1.5);
        assert_eq!(cfg.waveguide.eccentricity, 0.25);
    }

    #[test]
    fn subcommand_must_match_file() {
        let text = "experiment = ground\n";
        let err = ExperimentConfig::from_text(text, Some(ExperimentKind::Evolve), &none()).unwrap_err();
        assert!(err.mentions("experiment"));
        let cfg = ExperimentConfig::from_text("", Some(ExperimentKind::Oracle), &none()).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Oracle);
    }

    #[test]
    fn physical_coupling() {
        let text = "experiment = oracle\ncoupling = physical\n";
        let cfg = ExperimentConfig::from_text(text, None, &none()).unwrap();
        assert!((cfg.coupling - 42.0556).abs() < 1e-3, "{}", cfg.coupling);
        let round = ExperimentConfig::from_text(&cfg.to_text(), None, &none()).unwrap();
        assert_eq!(round, cfg);
    }

    #[test]
    fn defaults_round_trip() {
        for kind in ExperimentKind::ALL {
            let mut cfg = ExperimentConfig::defaults(kind);
            cfg.sweep.beta_range = Some((0.1, 0.3));
            cfg.evolution.snapshots = SnapshotSpec::Times(vec![0.1, 2.5, 1e-3]);
            cfg.physical.oscillator_length = None;
            let text = cfg.to_text();
            let back = ExperimentConfig::from_text(&text, None, &none()).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.to_text(), text);
        }
    }
}
