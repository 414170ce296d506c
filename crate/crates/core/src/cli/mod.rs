//! Command-line interface.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use thiserror::Error;

use crate::estimate::Formula;
use output::Format;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("config: unknown key '{key}' in section [{section}]")]
    UnknownKey { key: String, section: String },
    #[error("{param}={value} is out of range, must be in {bound}")]
    Range { param: &'static str, bound: &'static str, value: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Lib(#[from] crate::Error),
    #[error("{0} validation check(s) failed")]
    SuiteFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::SuiteFailed(_) => 1,
            CliError::Usage(e) if !e.use_stderr() => 0,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "trdsphere", version, about = "Time-changed rotational diffusions and random fields on the sphere")]
pub struct Cli {
    /// Config file with [subcommand] sections of key = value lines; flags override it
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads for Monte Carlo work (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mittag-Leffler function E_nu(z) for z <= 0
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Ml(MlArgs),
    /// Wigner 3j symbol
    #[command(name = "wigner3j", args_override_self = true, allow_negative_numbers = true)]
    Wigner3j(WignerArgs),
    /// Path simulation
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Transition density of the time-changed diffusion on a grid
    #[command(args_override_self = true)]
    Density(DensityArgs),
    /// Random field sampling
    #[command(subcommand)]
    Sample(SampleCommand),
    /// Space-time covariances of the time-changed field
    #[command(subcommand)]
    Covariance(CovarianceCommand),
    /// Run a validation suite and write a JSON report
    #[command(args_override_self = true)]
    Validate(ValidateArgs),
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Inverse stable subordinator sampled on a time grid
    #[command(args_override_self = true)]
    Subordinator(SubordinatorArgs),
    /// Time-changed Brownian motion on the sphere
    #[command(args_override_self = true)]
    Trd(TrdArgs),
}

#[derive(Debug, Subcommand)]
pub enum SampleCommand {
    /// Isotropic Gaussian field on a grid, optionally composed with the diffusion
    #[command(args_override_self = true)]
    Field(FieldArgs),
}

#[derive(Debug, Subcommand)]
pub enum CovarianceCommand {
    /// Closed-form covariance
    #[command(args_override_self = true)]
    Analytic(CovarianceArgs),
    /// Monte Carlo covariance with the closed form alongside
    #[command(args_override_self = true)]
    Empirical(EmpiricalArgs),
}

#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct OutputArgs {
    /// Output file (stdout if omitted); a <out>.meta.json sidecar is written next to it
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct MlArgs {
    /// Order nu in (0,1]
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    /// Comma-separated arguments z <= 0
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1")]
    pub z: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct WignerArgs {
    #[arg(long, default_value_t = 1)]
    pub l1: u32,
    #[arg(long, default_value_t = 1)]
    pub l2: u32,
    #[arg(long, default_value_t = 0)]
    pub l3: u32,
    #[arg(long, default_value_t = 0)]
    pub m1: i32,
    #[arg(long, default_value_t = 0)]
    pub m2: i32,
    #[arg(long, default_value_t = 0)]
    pub m3: i32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct SubordinatorArgs {
    /// Stability index nu in (0,1)
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    /// Comma-separated increasing times
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1")]
    pub t_grid: Vec<f64>,
    /// Step of the subordinator grid
    #[arg(long, default_value_t = 1e-3)]
    pub grid_dt: f64,
    #[arg(long, default_value_t = 10)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct TrdArgs {
    /// Order nu in (0,1]
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x0_theta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x0_phi: f64,
    /// Start time
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    /// Comma-separated increasing times >= t0
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1")]
    pub t_grid: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub paths: usize,
    /// Internal Brownian step
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Step of the subordinator grid
    #[arg(long, default_value_t = 1e-3)]
    pub grid_dt: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct DensityArgs {
    /// Order nu in (0,1]
    #[arg(long)]
    pub nu: f64,
    /// Evaluation time t > t0
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    /// Truncation degree, or "auto" for the adaptive choice
    #[arg(long, default_value = "auto")]
    pub l_max: String,
    #[arg(long, default_value_t = 0.0)]
    pub x0_theta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x0_phi: f64,
    /// Quadrature grid n_theta,n_phi
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "64,129")]
    pub grid: Vec<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct SpectrumArgs {
    /// Spectrum amplitude A in C_l = A (l+1)^(-alpha)
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Spectrum decay exponent alpha
    #[arg(long, default_value_t = 3.0)]
    pub alpha: f64,
    /// Band limit of the spectrum
    #[arg(long, default_value_t = 20)]
    pub l_max: usize,
}

#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct FieldArgs {
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    /// Grid n_theta,n_phi
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "32,65")]
    pub grid: Vec<usize>,
    /// Order of the time change
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Elapsed time of the diffusion started at each node (0 = static field)
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    /// Internal Brownian step
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct CovarianceArgs {
    /// same-point, two-point, markov-lag, frac-lag-integral or static
    #[arg(long, default_value = "same-point")]
    pub formula: String,
    /// Order nu in (0,1]
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub t1: f64,
    #[arg(long, default_value_t = 0.5)]
    pub t2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub x_theta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x_phi: f64,
    #[arg(long, default_value_t = 2.0)]
    pub y_theta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub y_phi: f64,
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct EmpiricalArgs {
    #[command(flatten)]
    pub covariance: CovarianceArgs,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Internal Brownian step
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Step of the subordinator grid
    #[arg(long, default_value_t = 1e-3)]
    pub grid_dt: f64,
}

#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct ValidateArgs {
    /// specfun, wigner, subordinator-laws, diffusion-marginals, covariance-theorems, dependence-range or all
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Nominal runtime budget in seconds; replication counts shrink to fit
    #[arg(long, default_value_t = 600.0)]
    pub budget: f64,
    /// Report file (stdout if omitted)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl CovarianceArgs {
    pub fn formula(&self) -> Result<Formula, CliError> {
        Ok(self.formula.parse()?)
    }
}

/// Parameter values of the innermost subcommand, as given or defaulted.
fn parameter_echo(m: &ArgMatches) -> (String, serde_json::Map<String, serde_json::Value>) {
    let mut path = Vec::new();
    let mut cur = m;
    while let Some((name, sub)) = cur.subcommand() {
        path.push(name.to_string());
        cur = sub;
    }
    let mut params = serde_json::Map::new();
    for id in cur.ids() {
        if let Ok(Some(raw)) = cur.try_get_raw(id.as_str()) {
            let vals: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
            params.insert(id.as_str().to_string(), serde_json::Value::String(vals.join(",")));
        }
    }
    (path.join(" "), params)
}

/// Parses `argv` (program name first), applies the config file and runs the
/// selected subcommand.
pub fn run(argv: &[String]) -> Result<(), CliError> {
    let root = Cli::command();
    let argv = config::merge_config_args(&root, argv)?;
    let matches = root.try_get_matches_from(&argv)?;
    let cli = Cli::from_arg_matches(&matches)?;
    if cli.workers > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global();
    }
    let (command, parameters) = parameter_echo(&matches);
    commands::dispatch(&cli.command, commands::Echo { command, parameters })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaves(cmd: &clap::Command) -> Vec<clap::Command> {
        if cmd.has_subcommands() {
            cmd.get_subcommands().flat_map(leaves).collect()
        } else {
            vec![cmd.clone()]
        }
    }

    #[test]
    fn help_lists_every_parameter_with_its_default() {
        let mut root = Cli::command();
        root.build();
        for mut cmd in leaves(&root) {
            let help = cmd.render_help().to_string();
            for arg in cmd.get_arguments().filter(|a| a.get_long().is_some_and(|l| l != "help")) {
                let long = format!("--{}", arg.get_long().unwrap());
                let line = help.lines().find(|l| l.trim_start().starts_with(&long)).unwrap_or_default();
                assert!(!line.is_empty(), "{}: {long} missing from help", cmd.get_name());
                let optional = !arg.is_required_set() && arg.get_long() != Some("out") && arg.get_long() != Some("config");
                if optional {
                    assert!(line.contains("[default:"), "{}: {line}", cmd.get_name());
                }
            }
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::SuiteFailed(1).exit_code(), 1);
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        let e = Cli::command().try_get_matches_from(["trdsphere", "--bogus"]).unwrap_err();
        assert_eq!(CliError::Usage(e).exit_code(), 2);
    }
}
