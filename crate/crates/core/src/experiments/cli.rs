use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::commands::{run, ExitStatus};
use super::config::{Command, ConfigError, ConfigFile, ExperimentConfig};

/// Parallel transport by geodesic ladders: experiments and checks.
#[derive(Debug, Parser)]
#[command(name = "poleladder", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Transport one vector and compare with the exact transport.
    Transport(Flags),
    /// One-step (or multi-rung) error against joint scale h, with a slope fit.
    Convergence(Flags),
    /// Residuals of the double-exponential series at orders 1, 3 and 4.
    BchCheck(Flags),
    /// Seeded exactness sweep of the pole ladder variants on symmetric spaces.
    Exactness(Flags),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML file with any of the keys below (flags take precedence).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// euclidean-n, sphere-n, hyperbolic-n, spd-n, so3, bump2d (or "fleet" for exactness).
    #[arg(long)]
    pub manifold: Option<String>,
    /// schild, pole_v1, pole_v2, pole_alt, pole_avg.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub h_min: Option<f64>,
    #[arg(long)]
    pub h_max: Option<f64>,
    #[arg(long)]
    pub num_scales: Option<usize>,
    #[arg(long)]
    pub n_rungs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol_exactness: Option<f64>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub output: Option<String>,
    /// Fixed RK4 step for chart manifolds.
    #[arg(long)]
    pub fixed_step: Option<f64>,
    /// Bump height for bump2d.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Number of exactness trials per manifold.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Start point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Option<Vec<f64>>,
    /// End point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q: Option<Vec<f64>>,
    /// Vector at the start point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub u: Option<Vec<f64>>,
}

impl Flags {
    fn overrides(&self) -> ConfigFile {
        ConfigFile {
            manifold: self.manifold.clone(),
            scheme: self.scheme.clone(),
            h_min: self.h_min,
            h_max: self.h_max,
            num_scales: self.num_scales,
            n_rungs: self.n_rungs,
            seed: self.seed,
            tol_exactness: self.tol_exactness,
            output: self.output.clone(),
            fixed_step: self.fixed_step,
            beta: self.beta,
            trials: self.trials,
            p: self.p.clone(),
            q: self.q.clone(),
            u: self.u.clone(),
            ..ConfigFile::default()
        }
    }

    /// Merges defaults, the config file and the flags.
    pub fn resolve(&self, command: Command) -> Result<ExperimentConfig, ConfigError> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        ExperimentConfig::resolve(command, self.overrides().or(file))
    }
}

impl Sub {
    fn split(&self) -> (Command, &Flags) {
        match self {
            Sub::Transport(f) => (Command::Transport, f),
            Sub::Convergence(f) => (Command::Convergence, f),
            Sub::BchCheck(f) => (Command::BchCheck, f),
            Sub::Exactness(f) => (Command::Exactness, f),
        }
    }
}

/// Parses `args`, runs the command, writes CSV and diagnostics, and returns
/// the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::Config.code() } else { 0 };
        }
    };
    let (command, flags) = cli.command.split();
    let cfg = match flags.resolve(command) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitStatus::Config.code();
        }
    };
    log::info!("running {} with config hash {}", command.as_str(), cfg.hash());
    let out = run(&cfg);
    for line in &out.diagnostics {
        eprintln!("{line}");
    }
    if !out.csv.is_empty() {
        let written = match &cfg.output_path {
            Some(path) => std::fs::write(path, &out.csv).map_err(|e| format!("cannot write {path}: {e}")),
            None => std::io::stdout()
                .write_all(out.csv.as_bytes())
                .map_err(|e| format!("cannot write output: {e}")),
        };
        if let Err(msg) = written {
            eprintln!("config error: {msg}");
            return ExitStatus::Config.code();
        }
    }
    out.status.code()
}
