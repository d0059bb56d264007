//! End-to-end experiment protocol: per-speed simulation, artificial mixing,
//! beamforming, evaluation and the cross-speed sweep report.

mod config;
mod scenario;
mod stages;
mod sweep;
pub mod tensor_io;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

pub use config::{scenario_name, Emit, ExperimentConfig};
pub use scenario::{
    artificial_mixture, beamform_mixture, evaluate_run, run_scenario, ArtificialMixture, Evaluation,
    EvaluationInputs, ScenarioResult, RTF_BAND_HZ,
};
pub use stages::{
    beamform_stage, evaluate_stage, find_scenarios, load_scenario, scenario_dir, simulate_stage, BeamformRecord,
    EvaluationRecord, Manifest, ScenarioRecord, SimulateRecord, SOFTWARE,
};
pub use sweep::{read_gain_csv, summarize, sweep_report, write_sweep_csv, SweepSummary, HIGH_BAND_HZ};

use crate::error::Result;

/// Runs `f` over `items` on up to `jobs` worker threads. Results keep the
/// input order; the first error by position is returned.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> Result<R> + Sync) -> Result<Vec<R>> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<R>>>> = items.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|s| {
        for _ in 0..jobs.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                *slots[i].lock().unwrap() = Some(f(&items[i]));
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every item is processed"))
        .collect()
}

/// Simulates, beamforms and evaluates every configured speed under `root`,
/// then writes `sweep_report.csv` when two or more speeds completed.
pub fn run_experiment(cfg: &ExperimentConfig, root: &Path, overwrite: bool, jobs: usize) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let dirs = parallel_map(&cfg.speeds_rev_s, jobs, |&speed| {
        let dir = simulate_stage(cfg, speed, root, overwrite)?;
        beamform_stage(&dir)?;
        evaluate_stage(&dir)?;
        Ok(dir)
    })?;
    if dirs.len() >= 2 && cfg.emit.csv {
        sweep_report(&dirs, &root.join("sweep_report.csv"))?;
    }
    Ok(dirs)
}
