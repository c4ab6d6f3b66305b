use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};
use qwgan_cli::commands;
use qwgan_cli::config::{
    CommonArgs, ExpectationsConfig, LearnConfig, PhaseScanConfig, StringOrderConfig, WganCommandConfig,
};

#[derive(Parser)]
#[command(name = "qwgan", version, about = "Quantum Wasserstein GAN experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expectation vector of a named ansatz
    Expectations(CommonArgs),
    /// Train a generator against a target circuit
    Learn {
        #[command(flatten)]
        common: CommonArgs,
        /// Continue from a checkpoint written by an earlier run
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Interpolate the phase circuit and generate states at unseen labels
    PhaseScan(CommonArgs),
    /// WGAN-GP on butterfly expectations, then quantum training on its samples
    Wgan(CommonArgs),
    /// String order parameters of the phase circuit
    StringOrder(CommonArgs),
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    // Configs are resolved and validated before anything touches the disk.
    let dir = match cli.command {
        Command::Expectations(a) => commands::expectations::run(&ExpectationsConfig::resolve(&a)?, a.config.as_deref())?,
        Command::Learn { common, resume } => {
            let cfg = LearnConfig::resolve(&common)?;
            if let Some(p) = &resume {
                anyhow::ensure!(p.is_file(), "checkpoint {} not found", p.display());
            }
            commands::learn::run(&cfg, common.config.as_deref(), resume.as_deref())?
        }
        Command::PhaseScan(a) => commands::phase_scan::run(&PhaseScanConfig::resolve(&a)?, a.config.as_deref())?,
        Command::Wgan(a) => commands::wgan::run(&WganCommandConfig::resolve(&a)?, a.config.as_deref())?,
        Command::StringOrder(a) => commands::string_order::run(&StringOrderConfig::resolve(&a)?, a.config.as_deref())?,
    };
    println!("wrote {}", dir.display());
    Ok(())
}
