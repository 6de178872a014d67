use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use srmcf::commands::{self, Check};
use srmcf::{AppError, Config};

#[derive(Parser)]
#[command(
    name = "srmcf",
    version,
    about = "Sub-Riemannian mean curvature flow simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides every seed key of the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckArg {
    Barriers,
    Phi,
    Brackets,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Run the regularized flow and write snapshots.
    Simulate(Common),
    /// Run the flow over the ε schedule and write the sweep report.
    Sweep(Common),
    /// Check barrier inequalities, test-function bounds or brackets.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        check: CheckArg,
    },
    /// Fill the masked region of an image through an SE(2) lift.
    Inpaint(Common),
    /// Write one 2D slice of a snapshot as PGM and CSV.
    ExportSlice {
        #[arg(long)]
        snapshot: PathBuf,
        /// Axis held fixed (3D snapshots).
        #[arg(long)]
        axis: Option<usize>,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load(common: &Common) -> Result<Config, AppError> {
    let cfg = Config::load(&common.config)?;
    Ok(match common.seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn dispatch(cmd: Command) -> Result<Vec<String>, AppError> {
    match cmd {
        Command::Simulate(c) => commands::simulate(&load(&c)?, &c.out),
        Command::Sweep(c) => commands::sweep(&load(&c)?, &c.out),
        Command::Verify { common, check } => {
            let checks = match check {
                CheckArg::Barriers => vec![Check::Barriers],
                CheckArg::Phi => vec![Check::Phi],
                CheckArg::Brackets => vec![Check::Brackets],
                CheckArg::All => Check::ALL.to_vec(),
            };
            commands::verify(&load(&common)?, &checks, &common.out)
        }
        Command::Inpaint(c) => commands::inpaint(&load(&c)?, &c.out),
        Command::ExportSlice {
            snapshot,
            axis,
            index,
            out,
        } => commands::export_slice(&snapshot, axis, index, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
