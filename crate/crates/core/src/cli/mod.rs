//! Command-line runner: `qmpemba run` and `qmpemba validate`.

pub mod config;
pub mod runner;
pub mod validate;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::relaxation::Fault;
use config::{ExperimentConfig, Preset};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qmpemba", version, about = "Thermalization of two dipolar-coupled spins and Mpemba crossings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a preset or custom experiment and write CSV plus report.
    Run(RunArgs),
    /// Run the invariant battery and print a pass/fail table.
    Validate(ValidateArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// Config file of `key = value` lines (overridden by flags).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// fig3a, fig3c, fig3b_overlaps, fig3d_genuine or custom.
    #[arg(long)]
    pub preset: Option<String>,
    /// Preparation angle in degrees.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Correlation time, s.
    #[arg(long = "tau-c")]
    pub tau_c: Option<f64>,
    /// Dipolar constant (unit set by `b_unit`, default Hz).
    #[arg(long)]
    pub b: Option<f64>,
    /// ising or full_scalar.
    #[arg(long)]
    pub coupling: Option<String>,
    /// Comma-separated subset of dipolar, csa, cross.
    #[arg(long)]
    pub channels: Option<String>,
    /// End of the time grid.
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// true: K0 = 1 and time in 1/K0; false: seconds.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dimensionless: Option<bool>,
    /// Output prefix; writes `<prefix>.csv` and `<prefix>_report.txt`.
    #[arg(long)]
    pub output: Option<String>,
    /// Extra `key=value` overrides for keys without a dedicated flag.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    MissingAdjoint,
    AnticommutatorSign,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 1e-5)]
    pub epsilon: f64,
    /// ising or full_scalar.
    #[arg(long, default_value = "ising")]
    pub coupling: String,
    /// Randomized trials per invariant.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<FaultArg>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Config(_) | Error::Domain(_) => EXIT_USAGE,
        Error::Numerical(_) | Error::Degenerate(_) | Error::Io(_) => EXIT_NUMERICAL,
    }
}

/// Assemble the config: preset defaults, then file, then flags.
pub fn build_config(args: &RunArgs) -> crate::Result<ExperimentConfig> {
    let file_pairs = match &args.config {
        Some(path) => config::read_pairs(path)?,
        None => Vec::new(),
    };
    let file_preset = file_pairs.iter().find(|(k, _)| k == "preset").map(|(_, v)| v.parse::<Preset>()).transpose()?;
    let preset = match &args.preset {
        Some(p) => p.parse()?,
        None => file_preset.unwrap_or(Preset::Custom),
    };
    let mut pairs: Vec<(String, String)> = file_pairs.into_iter().filter(|(k, _)| k != "preset").collect();
    let mut flag = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            pairs.push((k.to_string(), v));
        }
    };
    flag("theta", args.theta.map(|x| x.to_string()));
    flag("epsilon", args.epsilon.map(|x| x.to_string()));
    flag("tau_c", args.tau_c.map(|x| x.to_string()));
    flag("b", args.b.map(|x| x.to_string()));
    flag("coupling", args.coupling.clone());
    flag("channels", args.channels.clone());
    flag("t_max", args.t_max.map(|x| x.to_string()));
    flag("points", args.points.map(|x| x.to_string()));
    flag("dimensionless", args.dimensionless.map(|x| x.to_string()));
    flag("output", args.output.clone());
    for kv in &args.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        if k.trim() == "preset" {
            return Err(Error::Usage("use --preset to choose a preset".into()));
        }
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    let cfg = ExperimentConfig::from_pairs(Some(preset), &pairs)?;
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &RunArgs) -> i32 {
    let cfg = match build_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qmpemba: {e}");
            return exit_code(&e);
        }
    };
    match runner::run_experiment(&cfg) {
        Ok((out, files)) => {
            println!("{}", runner::summary(&out));
            println!("wrote {} and {}", files.csv.display(), files.report.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("qmpemba: {e}");
            exit_code(&e)
        }
    }
}

fn validate(args: &ValidateArgs) -> i32 {
    let coupling = match config::parse_coupling(&args.coupling) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qmpemba: {e}");
            return EXIT_USAGE;
        }
    };
    let opts = validate::SuiteOptions {
        epsilon: args.epsilon,
        coupling,
        fault: args.inject_fault.map(|f| match f {
            FaultArg::MissingAdjoint => Fault::MissingAdjoint,
            FaultArg::AnticommutatorSign => Fault::AnticommutatorSign,
        }),
        trials: args.trials,
        seed: args.seed,
    };
    let checks = validate::validate_suite(&opts);
    for c in &checks {
        println!("{c}");
    }
    let failures: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failures.is_empty() {
        println!("all {} invariants hold", checks.len());
        EXIT_OK
    } else {
        eprintln!("failed invariants: {}", failures.join(", "));
        EXIT_INVARIANT
    }
}

/// Parse `args` and execute; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match &cli.command {
        Command::Run(a) => run(a),
        Command::Validate(a) => validate(a),
    }
}
