mod commands;
mod config;

use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use pointdamp_core::BeamError;

use config::Overrides;

/// Input rejected before any numerics ran.
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

#[derive(Parser)]
#[command(
    name = "pointdamp",
    version,
    about = "Spectrum, resolvent and decay of a beam with a pointwise damper"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Audited eigenvalues up to mode n_max.
    Spectrum,
    /// Spectral abscissa over a grid of (alpha, beta, xi, b).
    Sweep,
    /// Modal time integration with energy and decay checks.
    Simulate,
    /// Eigenfunction of mode (--mode, --sign) with its residual suite.
    Eigenfunction,
    /// Resolvent applied to F = (sin(pi x), 0) at mu = mu_re + i mu_im.
    Resolvent,
    /// Distances to the undamped modes and their decay in n.
    Riesz,
    /// Critical damping for a root at -b/2 and the special attachment points.
    Critical,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Invalid>().is_some() {
        return 2;
    }
    match err.downcast_ref::<BeamError>() {
        Some(BeamError::InvalidParams(_)) => 2,
        Some(BeamError::AuditMismatch(_)) => 4,
        Some(_) => 3,
        None => 1,
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = cli.overrides.resolve()?;
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    cfg.write(&cfg.out)?;
    let dir = cfg.out.as_path();
    match cli.command {
        Command::Spectrum => commands::spectrum(&cfg, dir),
        Command::Sweep => commands::sweep(&cfg, dir),
        Command::Simulate => commands::simulate_cmd(&cfg, dir),
        Command::Eigenfunction => commands::eigenfunction(&cfg, dir),
        Command::Resolvent => commands::resolvent(&cfg, dir),
        Command::Riesz => commands::riesz(&cfg, dir),
        Command::Critical => commands::critical(&cfg, dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
