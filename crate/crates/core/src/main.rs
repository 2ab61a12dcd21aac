use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use ssm_beam::cli;

#[derive(Parser)]
#[command(
    name = "ssm-beam",
    version,
    about = "Slow-manifold reduction of a damped-forced Rayleigh beam"
)]
struct Options {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue pairs of the sine modes
    Spectrum(Common),
    /// Audit the damping and nonresonance assumptions
    Check(Common),
    /// Build the cubic invariant-manifold table and reduced model
    Ssm(Common),
    /// Amplitude-frequency backbone of the reduced dynamics
    Backbone(Common),
    /// Integrate the Galerkin system and track energy
    Simulate(Common),
    /// Check the reduced model against the Galerkin system
    Validate(Common),
    /// Periodic orbit of the forced Galerkin system
    Poincare(Common),
    /// Stroboscopic dynamics of the forced reduced model
    Forced(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving the output artifacts
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let options = Options::parse();
    match run(&options.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: &Command) -> ssm_beam::Result<u8> {
    let common = match command {
        Command::Spectrum(c)
        | Command::Check(c)
        | Command::Ssm(c)
        | Command::Backbone(c)
        | Command::Simulate(c)
        | Command::Validate(c)
        | Command::Poincare(c)
        | Command::Forced(c) => c,
    };
    let cfg = cli::load_config(&common.config)?;
    let out = common.out.as_path();
    match command {
        Command::Spectrum(_) => cli::cmd_spectrum(&cfg, out)?,
        Command::Check(_) => {
            if !cli::cmd_check(&cfg, out)? {
                return Ok(1);
            }
        }
        Command::Ssm(_) => cli::cmd_ssm(&cfg, out)?,
        Command::Backbone(_) => cli::cmd_backbone(&cfg, out)?,
        Command::Simulate(_) => cli::cmd_simulate(&cfg, out)?,
        Command::Validate(_) => cli::cmd_validate(&cfg, out)?,
        Command::Poincare(_) => cli::cmd_poincare(&cfg, out)?,
        Command::Forced(_) => cli::cmd_forced(&cfg, out)?,
    }
    Ok(0)
}
