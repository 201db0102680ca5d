//! Experiment orchestration: config, the three suites, aggregation and output.

mod config;
mod demo;
mod flowfield;
mod table;

pub use config::{
    DemoConfig, ExperimentConfig, ExperimentKind, InducingConfig, KernelConfig, Overrides, PlannerSection, SimConfig,
};
pub use demo::{demo_instance, run_bound_demo_1d, simulate_bound_demo_1d, write_bound_demo, DemoInstance, DemoOutcome, DemoRow};
pub use flowfield::{
    replay, run_baseline_comparison, run_flowfield, run_trial, simulate_flowfield, trial_dir, trial_table, write_flowfield,
    AggregateRow, Comparison, FlowfieldOutcome, PlannerKind, ReplayReport, Scenario, TrialManifest, TrialResult,
    ENTROPY_TOLERANCE,
};
pub use table::mean_ci;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

/// Per-trial RNG: the master seed selects the key, the trial index the stream.
/// Stream 0 is left for the ground-truth field.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

#[derive(Clone, Debug)]
pub enum RunOutcome {
    BoundDemo(DemoOutcome),
    Flowfield(FlowfieldOutcome),
    Comparison(Box<Comparison>),
}

/// Dispatches on the experiment kind and writes results to the output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    Ok(match cfg.experiment {
        ExperimentKind::BoundDemo1d => RunOutcome::BoundDemo(run_bound_demo_1d(cfg)?),
        ExperimentKind::FlowfieldEntropyMin => RunOutcome::Flowfield(run_flowfield(cfg)?),
        ExperimentKind::FlowfieldEntropyMax => RunOutcome::Comparison(Box::new(run_baseline_comparison(cfg)?)),
    })
}
