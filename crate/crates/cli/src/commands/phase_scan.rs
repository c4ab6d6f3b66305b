use std::path::{Path, PathBuf};

use anyhow::Result;
use qwgan::ansatz::{phase_transition_circuit, AnsatzSpec};
use qwgan::observables::ObservableSet;
use qwgan::phase::{build_training_set, write_phase_scan_csv, write_samples_csv, Interpolant, ScanSource, StringOrderResult};
use qwgan::rng::{self, stream};
use qwgan::sim::fidelity_pure_vs_mixture;
use qwgan::trainer::{train, MixtureGenerator};

use crate::config::PhaseScanConfig;
use crate::svg::{line_chart, Series};

/// Outcome at one label.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub exact: StringOrderResult,
    pub generated: StringOrderResult,
    pub final_w1: f64,
    pub fidelity_to_exact: f64,
    pub iterations: usize,
}

/// Interpolates the phase circuit's expectations and trains a generic
/// generator at every requested label.
pub fn scan(cfg: &PhaseScanConfig) -> Result<(ObservableSet, Vec<qwgan::phase::LabeledSample>, Vec<(ScanPoint, qwgan::trainer::TrainingHistory)>)> {
    let set = ObservableSet::enumerate(cfg.n, cfg.k)?;
    let samples = build_training_set(&set, cfg.m)?;
    let f = Interpolant::fit(&samples)?;
    let tcfg = cfg.training.training_config(cfg.k, cfg.rank, cfg.seed);
    let spec = AnsatzSpec::Generic { n_qubits: cfg.n, layers: cfg.layers };
    let mut points = Vec::with_capacity(cfg.g.len());
    for &g in &cfg.g {
        let target = f.target_at(&set, g)?;
        let exact_state = phase_transition_circuit(cfg.n, g)?.run_from_zero(&[])?;
        let gen0 = MixtureGenerator::random(spec, cfg.rank, &mut rng::seeded(cfg.seed, stream::GENERATOR_INIT))?;
        // The trainer only sees the interpolated vector.
        let (gen, history) = train(&target, &tcfg, gen0, &set, None)?;
        let state = gen.state()?;
        let last = history.last().expect("at least one record");
        let point = ScanPoint {
            exact: StringOrderResult::measure(g, &exact_state)?,
            generated: StringOrderResult::measure(g, &state)?,
            final_w1: last.w1,
            fidelity_to_exact: fidelity_pure_vs_mixture(&exact_state, &state)?,
            iterations: last.iter,
        };
        points.push((point, history));
    }
    Ok((set, samples, points))
}

pub fn run(cfg: &PhaseScanConfig, config_path: Option<&Path>) -> Result<PathBuf> {
    let (set, samples, points) = scan(cfg)?;
    let mut run = super::open_run(&cfg.out, "phase-scan", cfg.seed, config_path)?;
    run.write_with("samples.csv", |b| write_samples_csv(&samples, &set, b))?;
    let rows: Vec<_> = points
        .iter()
        .flat_map(|(p, _)| [(p.exact, ScanSource::Exact), (p.generated, ScanSource::Generated)])
        .collect();
    run.write_with("phase_scan.csv", |b| write_phase_scan_csv(&rows, b))?;
    let mut summary = String::from("g,final_w1,fidelity_to_exact,iterations\n");
    for (p, history) in &points {
        summary.push_str(&format!("{},{},{},{}\n", p.exact.g, p.final_w1, p.fidelity_to_exact, p.iterations));
        run.write_with(&format!("histories/history_g{}.csv", p.exact.g), |b| history.write_csv(b))?;
    }
    run.write("summary.csv", summary.as_bytes())?;
    if cfg.svg {
        let pick = |f: fn(&ScanPoint) -> (f64, f64)| points.iter().map(|(p, _)| f(p)).collect::<Vec<_>>();
        let chart = line_chart(
            "String order parameters",
            "g",
            "value",
            &[
                Series { name: "S1 exact", points: pick(|p| (p.exact.g, p.exact.s_one)), markers: false },
                Series { name: "SZY exact", points: pick(|p| (p.exact.g, p.exact.s_zy)), markers: false },
                Series { name: "S1 generated", points: pick(|p| (p.generated.g, p.generated.s_one)), markers: true },
                Series { name: "SZY generated", points: pick(|p| (p.generated.g, p.generated.s_zy)), markers: true },
            ],
        );
        run.write("phase_scan.svg", chart.as_bytes())?;
    }
    for (p, _) in &points {
        println!(
            "g={:+.3}  S1 {:.4} (exact {:.4})  SZY {:.4} (exact {:.4})  W1 {:.4}",
            p.exact.g, p.generated.s_one, p.exact.s_one, p.generated.s_zy, p.exact.s_zy, p.final_w1
        );
    }
    run.finish(cfg)
}
