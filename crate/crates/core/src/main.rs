use clap::{Args, Parser, Subcommand};
use henon_morse::report::Settings;
use henon_morse::sweep::{self, LiouvilleParams, SolveParams, SweepParams};
use henon_morse::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Radial solutions, Morse indices and half-line diagnostics for Hénon-type
/// problems on the unit ball.
///
/// Exit codes: 0 all checks passed, 1 a check or solver failed, 2 usage or
/// parse error.
#[derive(Parser)]
#[command(name = "henon-morse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Spectral mesh (intervals per sector).
    #[arg(long, default_value_t = henon_morse::spectral::DEFAULT_MESH)]
    mesh: usize,
    /// Shooting tolerance.
    #[arg(long, default_value_t = henon_morse::radial::DEFAULT_TOL)]
    tol: f64,
    /// Radial grid intervals (also the minimum trajectory step count).
    #[arg(long, default_value_t = henon_morse::radial::DEFAULT_GRID)]
    grid: usize,
    /// Half-line horizon.
    #[arg(long = "T")]
    horizon: Option<f64>,
}

impl Common {
    fn settings(&self) -> Settings {
        Settings {
            grid: self.grid,
            tol: self.tol,
            mesh: self.mesh,
            horizon: self.horizon,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one radial branch and write the profile.
    Solve {
        #[arg(long)]
        params: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep alpha over one or more branches.
    Sweep {
        #[arg(long)]
        params: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the half-line checks on a stored profile (path to its JSON header).
    Verify {
        profile: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Search for instability witnesses of a limit trajectory.
    Liouville {
        #[arg(long)]
        params: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn load<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T, ExitCode> {
    sweep::load_params(path).map_err(|e| {
        eprintln!("error: cannot read parameters from {}: {e}", path.display());
        ExitCode::from(2)
    })
}

fn finish(result: henon_morse::Result<bool>) -> ExitCode {
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failed; see the written report");
            ExitCode::from(1)
        }
        Err(e @ Error::InvalidInput(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    Ok(match cli.command {
        Command::Solve { params, common } => {
            let p: SolveParams = load(&params)?;
            finish(sweep::run_solve(&p, &common.settings(), &common.out))
        }
        Command::Sweep { params, common } => {
            let p: SweepParams = load(&params)?;
            finish(sweep::run_sweep(&p, &common.settings(), &common.out))
        }
        Command::Verify { profile, common } => {
            let settings = common.settings();
            match henon_morse::report::read_profile(&profile) {
                Err(e) => {
                    eprintln!("error: cannot read profile {}: {e}", profile.display());
                    ExitCode::from(2)
                }
                Ok(_) => finish(sweep::run_verify(&profile, &settings, &common.out)),
            }
        }
        Command::Liouville { params, common } => {
            let p: LiouvilleParams = load(&params)?;
            finish(sweep::run_liouville(&p, &common.settings(), &common.out))
        }
    })
}

fn main() -> ExitCode {
    run(Cli::parse()).unwrap_or_else(|code| code)
}
