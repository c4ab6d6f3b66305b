use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use qwgan::ansatz::phase_transition_circuit;
use qwgan::phase::{write_phase_scan_csv, ScanSource, StringOrderResult};
use qwgan::trainer::Checkpoint;

use crate::config::StringOrderConfig;
use crate::svg::{line_chart, Series};

/// String order parameters of the exact phase circuit, and optionally of a
/// trained generator.
pub fn run(cfg: &StringOrderConfig, config_path: Option<&Path>) -> Result<PathBuf> {
    let mut rows = Vec::new();
    for &g in &cfg.g {
        let state = phase_transition_circuit(cfg.n, g)?.run_from_zero(&[])?;
        rows.push((StringOrderResult::measure(g, &state)?, ScanSource::Exact));
    }
    if let Some(path) = &cfg.checkpoint {
        ensure!(cfg.g.len() == 1, "measuring a checkpoint needs exactly one --g, the label it was trained for");
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let gen = Checkpoint::from_json(&text)?.generator()?;
        ensure!(gen.n_qubits() == cfg.n, "checkpoint has {} qubits, config n = {}", gen.n_qubits(), cfg.n);
        rows.push((StringOrderResult::measure(cfg.g[0], &gen.state()?)?, ScanSource::Generated));
    }

    let mut run = super::open_run(&cfg.out, "string-order", cfg.seed, config_path)?;
    if let Some(p) = &cfg.checkpoint {
        run.add_input(p)?;
    }
    run.write_with("string_order.csv", |b| write_phase_scan_csv(&rows, b))?;
    if cfg.svg {
        let exact: Vec<_> = rows.iter().filter(|r| r.1 == ScanSource::Exact).map(|r| r.0).collect();
        let chart = line_chart(
            &format!("String order parameters, N = {}", cfg.n),
            "g",
            "value",
            &[
                Series { name: "S1", points: exact.iter().map(|r| (r.g, r.s_one)).collect(), markers: false },
                Series { name: "SZY", points: exact.iter().map(|r| (r.g, r.s_zy)).collect(), markers: false },
            ],
        );
        run.write("string_order.svg", chart.as_bytes())?;
    }
    for (r, src) in &rows {
        println!("g={:+.3}  S1 {:.6}  SZY {:.6}  ({})", r.g, r.s_one, r.s_zy, src.name());
    }
    run.finish(cfg)
}
