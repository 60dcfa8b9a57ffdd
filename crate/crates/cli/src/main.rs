use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phaseless::presets::Preset;

mod config;
mod oracle;
mod run;

use config::RunConfig;

/// Exit status contract: 0 ok/converged, 2 bad input, 3 solver failure,
/// 4 iteration budget exhausted.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
    Io(String),
    Budget,
    OracleFailed(usize),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
            CliError::Budget => 4,
            CliError::OracleFailed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Budget => write!(f, "iteration budget exhausted before reaching epsilon"),
            CliError::OracleFailed(n) => write!(f, "{n} oracle check(s) failed"),
        }
    }
}

impl From<phaseless::Error> for CliError {
    fn from(e: phaseless::Error) -> Self {
        use phaseless::Error as E;
        match e {
            E::InvalidParameter(_) | E::Shape { .. } | E::Fit(_) | E::Geometry(_) => CliError::Config(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "phaseless", version, about = "Obstacle reconstruction from phaseless far-field data with a reference ball")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetName {
    Apple,
    Peanut,
    Rectangle,
}

impl From<PresetName> for Preset {
    fn from(p: PresetName) -> Self {
        match p {
            PresetName::Apple => Preset::Apple,
            PresetName::Peanut => Preset::Peanut,
            PresetName::Rectangle => Preset::Rectangle,
        }
    }
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([a.parse().map_err(|e| format!("{a}: {e}"))?, b.parse().map_err(|e| format!("{b}: {e}"))?]),
        _ => Err(format!("expected 'x,y', got '{s}'")),
    }
}

#[derive(Args, Debug, Clone, Default)]
struct Overrides {
    /// Relative noise level delta in [0, 1)
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Reference ball center as x,y
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    ball_center: Option<[f64; 2]>,
    #[arg(long)]
    ball_radius: Option<f64>,
    /// Center of the initial circle as x,y
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    init_center: Option<[f64; 2]>,
    #[arg(long)]
    init_radius: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Hold the first radial modes fixed
    #[arg(long, value_enum)]
    freeze_modes: Option<Toggle>,
}

impl Overrides {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(v) = self.noise {
            c.noise.delta = v;
        }
        if let Some(v) = self.seed {
            c.noise.seed = v;
        }
        if let Some(v) = self.ball_center {
            c.ball.center = v;
        }
        if let Some(v) = self.ball_radius {
            c.ball.radius = v;
        }
        if let Some(v) = self.init_center {
            c.solver.init_center = v;
        }
        if let Some(v) = self.init_radius {
            c.solver.init_radius = v;
        }
        if let Some(v) = self.epsilon {
            c.solver.epsilon = v;
        }
        if let Some(v) = self.max_iter {
            c.solver.max_iterations = v;
        }
        if let Some(t) = self.freeze_modes {
            c.solver.freeze_modes = matches!(t, Toggle::On);
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize far-field data for the configured scene
    Synthesize {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = "phaseless-out")]
        out: PathBuf,
    },
    /// Reconstruct the obstacle from an intensity file
    Reconstruct {
        #[arg(long)]
        config: Option<PathBuf>,
        /// CSV with (t, intensity) or (t, re, im, abs2) rows
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = "phaseless-out")]
        out: PathBuf,
        /// Also write the final field-system matrix as a binary dump
        #[arg(long)]
        dump_matrix: bool,
    },
    /// Synthesize and reconstruct one of the worked examples
    RunPreset {
        #[arg(value_enum)]
        name: PresetName,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = "phaseless-out")]
        out: PathBuf,
        #[arg(long)]
        dump_matrix: bool,
    },
    /// Run verification checks: mie, weights, gradient, translation or all
    Oracle { suite: String },
    /// Robustness sweep over ball placement and incident direction
    Sweep {
        #[arg(long, value_enum, default_value = "apple")]
        preset: PresetName,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = "phaseless-out")]
        out: PathBuf,
    },
}

fn load(config: Option<&PathBuf>, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut c = match config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    overrides.apply(&mut c);
    Ok(c)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synthesize { config, overrides, out } => run::synthesize(&load(config.as_ref(), &overrides)?, &out),
        Command::Reconstruct { config, data, overrides, out, dump_matrix } => {
            run::reconstruct(&load(config.as_ref(), &overrides)?, &data, &out, dump_matrix)
        }
        Command::RunPreset { name, overrides, out, dump_matrix } => {
            let mut c = RunConfig::from_preset(name.into());
            overrides.apply(&mut c);
            run::run_preset(&c, &out, dump_matrix)
        }
        Command::Oracle { suite } => oracle::run(&suite),
        Command::Sweep { preset, overrides, out } => {
            let mut c = RunConfig::from_preset(preset.into());
            overrides.apply(&mut c);
            run::sweep(&c, &out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("phaseless: {e}");
            ExitCode::from(e.code())
        }
    }
}
