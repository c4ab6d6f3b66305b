pub mod expectations;
pub mod learn;
pub mod phase_scan;
pub mod string_order;
pub mod wgan;

use std::path::Path;

use anyhow::Result;

use crate::output::RunDir;

/// Creates the run directory and records the config file among the inputs.
fn open_run(out: &Path, command: &'static str, seed: u64, config: Option<&Path>) -> Result<RunDir> {
    let mut run = RunDir::create(out, command, seed)?;
    if let Some(p) = config {
        run.add_input(p)?;
    }
    Ok(run)
}
