use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pvi_cli::commands::{dispatch, report_verdicts, CommandKind};
use pvi_cli::config::RunConfig;

/// Numerical laboratory for boundary flux control of parabolic problems
/// with friction-type boundary conditions.
#[derive(Parser)]
#[command(name = "pvi", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to a flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override single configuration keys, e.g. --set mesh.nx=16.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Dirichlet state with the zero control and export the
    /// trajectory (CSV and binary dump).
    Solve,
    /// Minimize the cost over nonpositive controls; export the optimizer
    /// trace and the optimal control.
    Optimize,
    /// Robin states against the Dirichlet state at a fixed control, along
    /// the penalty ladder.
    SweepH,
    /// Optimal controls and costs of the Robin problems against the
    /// Dirichlet optimum, along the penalty ladder.
    SweepHOptimal,
    /// Cauchy differences of the state along the regularization ladder.
    SweepEps,
    /// Convexity gap of the cost along control segments.
    CheckConvexity,
    /// Nodal ordering between blended controls and blended states.
    CheckMonotonicity,
    /// Nonnegativity of the state under nonnegative data.
    CheckMaxprinciple,
    /// Full-boundary trace convergence at the optimal controls.
    CheckTrace,
    /// Adjoint gradient against central finite differences.
    Gradcheck,
    /// Regularized solver against the exact coordinate-descent reference.
    OracleCompare,
    /// Every check with the current configuration.
    PaperSuite,
}

impl Command {
    fn kind(&self) -> CommandKind {
        match self {
            Command::Solve => CommandKind::Solve,
            Command::Optimize => CommandKind::Optimize,
            Command::SweepH => CommandKind::SweepH,
            Command::SweepHOptimal => CommandKind::SweepHOptimal,
            Command::SweepEps => CommandKind::SweepEps,
            Command::CheckConvexity => CommandKind::CheckConvexity,
            Command::CheckMonotonicity => CommandKind::CheckMonotonicity,
            Command::CheckMaxprinciple => CommandKind::CheckMaxprinciple,
            Command::CheckTrace => CommandKind::CheckTrace,
            Command::Gradcheck => CommandKind::Gradcheck,
            Command::OracleCompare => CommandKind::OracleCompare,
            Command::PaperSuite => CommandKind::PaperSuite,
        }
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    for item in &cli.set {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("--set expects key=value, got `{item}`"))?;
        cfg.set(key.trim(), value.trim())
            .map_err(|e| anyhow::anyhow!("--set {item}: {e}"))?;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };

    match dispatch(cli.command.kind(), &cfg) {
        Ok(verdicts) => {
            if report_verdicts(&verdicts) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
