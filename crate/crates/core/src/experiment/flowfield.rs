//! Flow-field study: receding-horizon planning in a double gyre, repeated
//! over trials and horizons, with either the posterior-entropy cost or the
//! measurement-entropy baseline.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::table::{mean_ci, num, opt, write_file, Table};
use super::trial_rng;
use crate::error::{Error, Result};
use crate::kernels::{InducingSet, Point};
use crate::planner::{euclidean, plan_and_execute, MeasurementEntropy, PlannerConfig, PosteriorEntropy};
use crate::record::TrialRecord;
use crate::recursive::BeliefState;
use crate::sim::{make_ground_truth, GroundTruth};

/// Tolerance on per-step entropy increases before they count as a violation.
pub const ENTROPY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    /// Minimise the posterior entropy of the inducing values.
    EntropyMin,
    /// Maximise the measurement entropy `log det K_X`.
    EntropyMax,
}

impl PlannerKind {
    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::EntropyMin => "entropy_min",
            PlannerKind::EntropyMax => "entropy_max",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub planner: PlannerKind,
    pub horizon: usize,
    pub trial: usize,
    pub record: TrialRecord,
    /// Distance of the state from the centroid of the inducing points, per row.
    pub centroid_distance: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub horizon: usize,
    pub t: usize,
    pub trials: usize,
    pub error_mean: f64,
    pub error_half_width: f64,
    pub entropy_mean: f64,
    pub entropy_half_width: f64,
    pub centroid_distance_mean: f64,
}

#[derive(Clone, Debug)]
pub struct FlowfieldOutcome {
    pub config_hash: String,
    pub planner: PlannerKind,
    pub truth: GroundTruth,
    pub inducing: Arc<InducingSet>,
    pub trials: Vec<TrialResult>,
    pub aggregate: Vec<AggregateRow>,
    pub violations: Vec<String>,
}

impl FlowfieldOutcome {
    pub fn aggregate_at(&self, horizon: usize, t: usize) -> Option<&AggregateRow> {
        self.aggregate.iter().find(|r| r.horizon == horizon && r.t == t)
    }
}

/// The environment shared by every trial of a config.
pub struct Scenario {
    pub truth: GroundTruth,
    pub inducing: Arc<InducingSet>,
}

impl Scenario {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let domain = cfg.domain()?;
        let truth = make_ground_truth(cfg.seed, cfg.base_kernel(domain.dim())?, cfg.sim.truth_centers, &domain, cfg.sim.noise_bound)?;
        Ok(Self { truth, inducing: Arc::new(cfg.inducing_set()?) })
    }

    fn centroid(&self) -> Point {
        let pts = self.inducing.points();
        let n = pts.len() as f64;
        (0..pts[0].len()).map(|d| pts.iter().map(|p| p[d]).sum::<f64>() / n).collect()
    }
}

pub fn run_trial(cfg: &ExperimentConfig, scenario: &Scenario, planner: PlannerKind, horizon: usize, trial: usize) -> Result<TrialResult> {
    let dynamics = cfg.dynamics()?;
    let mut rng = trial_rng(cfg.seed, trial);
    let start = match &cfg.sim.start {
        Some(s) => s.clone(),
        None => dynamics.domain.sample(&mut rng),
    };
    let pc = PlannerConfig {
        horizon,
        steps: cfg.planner.steps,
        pruner: cfg.pruner()?,
        variant: cfg.planner.variant,
        error_resolution: cfg.sim.error_grid.clone(),
    };
    let belief = BeliefState::new(scenario.inducing.clone());
    let truth = &scenario.truth;
    let record = match planner {
        PlannerKind::EntropyMin => plan_and_execute(&start, belief, &dynamics, truth, &PosteriorEntropy, &pc, &mut rng)?,
        PlannerKind::EntropyMax => {
            let cost = MeasurementEntropy { kernel: *scenario.inducing.base(), noise_bound: cfg.sim.noise_bound };
            plan_and_execute(&start, belief, &dynamics, truth, &cost, &pc, &mut rng)?
        }
    };
    let c = scenario.centroid();
    let centroid_distance = record.rows.iter().map(|r| euclidean(&r.state, &c)).collect();
    Ok(TrialResult { planner, horizon, trial, record, centroid_distance })
}

fn entropy_violations(r: &TrialResult) -> Vec<String> {
    r.record
        .rows
        .windows(2)
        .filter(|w| w[1].entropy > w[0].entropy + ENTROPY_TOLERANCE)
        .map(|w| {
            format!(
                "{} horizon {} trial {}: entropy rose from {} to {} at step {}",
                r.planner.name(),
                r.horizon,
                r.trial,
                w[0].entropy,
                w[1].entropy,
                w[1].t
            )
        })
        .collect()
}

fn aggregate(trials: &[TrialResult], horizons: &[usize], steps: usize) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    for &h in horizons {
        let runs: Vec<&TrialResult> = trials.iter().filter(|r| r.horizon == h).collect();
        for t in 0..=steps {
            let col = |f: &dyn Fn(&TrialResult) -> f64| runs.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let (error_mean, error_half_width) = mean_ci(&col(&|r| r.record.rows[t].mean_abs_error));
            let (entropy_mean, entropy_half_width) = mean_ci(&col(&|r| r.record.rows[t].entropy));
            let (centroid_distance_mean, _) = mean_ci(&col(&|r| r.centroid_distance[t]));
            out.push(AggregateRow {
                horizon: h,
                t,
                trials: runs.len(),
                error_mean,
                error_half_width,
                entropy_mean,
                entropy_half_width,
                centroid_distance_mean,
            });
        }
    }
    out
}

/// Runs every (horizon, trial) pair in parallel and aggregates per step.
pub fn simulate_flowfield(cfg: &ExperimentConfig, planner: PlannerKind) -> Result<FlowfieldOutcome> {
    if cfg.experiment == ExperimentKind::BoundDemo1d {
        return Err(Error::Config("not a flow-field config".into()));
    }
    cfg.validate()?;
    let scenario = Scenario::new(cfg)?;
    let jobs: Vec<(usize, usize)> =
        cfg.planner.horizons.iter().flat_map(|&h| (0..cfg.trials).map(move |t| (h, t))).collect();
    let trials = jobs
        .par_iter()
        .map(|&(h, t)| run_trial(cfg, &scenario, planner, h, t))
        .collect::<Result<Vec<_>>>()?;
    let violations = trials.iter().flat_map(entropy_violations).collect();
    let aggregate = aggregate(&trials, &cfg.planner.horizons, cfg.planner.steps);
    Ok(FlowfieldOutcome {
        config_hash: cfg.hash()?,
        planner,
        truth: scenario.truth,
        inducing: scenario.inducing,
        trials,
        aggregate,
        violations,
    })
}

/// Everything needed to re-run one trial bit-for-bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialManifest {
    pub config_hash: String,
    pub planner: PlannerKind,
    pub horizon: usize,
    pub trial: usize,
    pub config: ExperimentConfig,
}

pub fn trial_dir(root: &Path, horizon: usize, trial: usize) -> PathBuf {
    root.join(format!("N{horizon}")).join(format!("trial_{trial:03}"))
}

pub fn trial_table(hash: &str, r: &TrialResult) -> Result<String> {
    let mut t = Table::new(
        hash,
        &[
            "planner",
            "horizon",
            "trial",
            "t",
            "x",
            "y",
            "control",
            "measurement",
            "entropy",
            "mean_abs_error",
            "centroid_distance",
            "nodes_expanded",
            "nodes_pruned",
            "leaves",
        ],
    )?;
    for (row, dist) in r.record.rows.iter().zip(&r.centroid_distance) {
        t.row([
            r.planner.name().to_string(),
            r.horizon.to_string(),
            r.trial.to_string(),
            row.t.to_string(),
            num(row.state[0]),
            num(row.state[1]),
            opt(row.control),
            opt(row.measurement),
            num(row.entropy),
            num(row.mean_abs_error),
            num(*dist),
            row.nodes_expanded.to_string(),
            row.nodes_pruned.to_string(),
            row.leaves.to_string(),
        ])?;
    }
    t.into_string()
}

fn write_trial(dir: &Path, cfg: &ExperimentConfig, out: &FlowfieldOutcome, r: &TrialResult) -> Result<()> {
    let hash = &out.config_hash;
    write_file(&dir.join("trial.csv"), &trial_table(hash, r)?)?;
    let manifest =
        TrialManifest { config_hash: hash.clone(), planner: r.planner, horizon: r.horizon, trial: r.trial, config: cfg.clone() };
    write_file(&dir.join("trial.toml"), &toml::to_string(&manifest)?)?;
    write_file(&dir.join("truth.json"), &serde_json::to_string_pretty(&out.truth)?)?;

    let belief = &r.record.final_belief;
    let m = belief.mean().len();
    let mut header: Vec<String> = ["index", "z_x", "z_y", "mean"].iter().map(|s| s.to_string()).collect();
    header.extend((0..m).map(|j| format!("cov_{j}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut fb = Table::new(hash, &header_refs)?;
    for (i, z) in out.inducing.points().iter().enumerate() {
        let mut fields = vec![i.to_string(), num(z[0]), num(z[1]), num(belief.mean()[i])];
        fields.extend((0..m).map(|j| num(belief.covariance()[(i, j)])));
        fb.row(fields)?;
    }
    fb.save(&dir.join("final_belief.csv"))?;

    let mut grid = Table::new(hash, &["x", "y", "truth", "mean", "variance", "abs_error"])?;
    for p in out.truth.domain.grid(&cfg.sim.error_grid) {
        let (mean, var) = belief.predict_field(&p, &p, cfg.planner.variant)?;
        let truth = out.truth.value(&p);
        grid.row([num(p[0]), num(p[1]), num(truth), num(mean), num(var), num((truth - mean).abs())])?;
    }
    grid.save(&dir.join("field_grid.csv"))
}

pub fn write_flowfield(out: &FlowfieldOutcome, cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let hash = &out.config_hash;
    write_file(&dir.join("resolved_config.toml"), &cfg.to_toml_string()?)?;
    write_file(&dir.join("truth.json"), &serde_json::to_string_pretty(&out.truth)?)?;
    let mut z = Table::new(hash, &["index", "x", "y"])?;
    for (i, p) in out.inducing.points().iter().enumerate() {
        z.row([i.to_string(), num(p[0]), num(p[1])])?;
    }
    z.save(&dir.join("inducing.csv"))?;

    let mut agg = Table::new(
        hash,
        &[
            "planner",
            "horizon",
            "t",
            "trials",
            "error_mean",
            "error_ci_low",
            "error_ci_high",
            "entropy_mean",
            "entropy_ci_low",
            "entropy_ci_high",
            "centroid_distance_mean",
        ],
    )?;
    for a in &out.aggregate {
        agg.row([
            out.planner.name().to_string(),
            a.horizon.to_string(),
            a.t.to_string(),
            a.trials.to_string(),
            num(a.error_mean),
            num(a.error_mean - a.error_half_width),
            num(a.error_mean + a.error_half_width),
            num(a.entropy_mean),
            num(a.entropy_mean - a.entropy_half_width),
            num(a.entropy_mean + a.entropy_half_width),
            num(a.centroid_distance_mean),
        ])?;
    }
    agg.save(&dir.join("aggregate.csv"))?;

    // wall time is the one non-deterministic output, so it lives on its own
    let mut timing = Table::new(hash, &["planner", "horizon", "trial", "wall_seconds"])?;
    for r in &out.trials {
        timing.row([r.planner.name().to_string(), r.horizon.to_string(), r.trial.to_string(), num(r.record.wall_time.as_secs_f64())])?;
        write_trial(&trial_dir(dir, r.horizon, r.trial), cfg, out, r)?;
    }
    timing.save(&dir.join("timing.csv"))
}

fn check(out: &FlowfieldOutcome) -> Result<()> {
    if out.violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvariantViolation(out.violations.join("; ")))
    }
}

/// The entropy-minimising planner over every configured horizon.
pub fn run_flowfield(cfg: &ExperimentConfig) -> Result<FlowfieldOutcome> {
    let out = simulate_flowfield(cfg, PlannerKind::EntropyMin)?;
    write_flowfield(&out, cfg, &cfg.output_dir)?;
    check(&out)?;
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub entropy_min: FlowfieldOutcome,
    pub entropy_max: FlowfieldOutcome,
}

/// Both planners under identical seeds, written to `entropy_min/` and
/// `entropy_max/` with a side-by-side table and the snapshot-step positions.
pub fn run_baseline_comparison(cfg: &ExperimentConfig) -> Result<Comparison> {
    let entropy_min = simulate_flowfield(cfg, PlannerKind::EntropyMin)?;
    let entropy_max = simulate_flowfield(cfg, PlannerKind::EntropyMax)?;
    let dir = &cfg.output_dir;
    write_flowfield(&entropy_min, cfg, &dir.join("entropy_min"))?;
    write_flowfield(&entropy_max, cfg, &dir.join("entropy_max"))?;
    write_file(&dir.join("resolved_config.toml"), &cfg.to_toml_string()?)?;
    let hash = &entropy_min.config_hash;

    let mut cmp = Table::new(
        hash,
        &[
            "horizon",
            "t",
            "error_mean_min",
            "error_mean_max",
            "entropy_mean_min",
            "entropy_mean_max",
            "centroid_distance_mean_min",
            "centroid_distance_mean_max",
        ],
    )?;
    for (a, b) in entropy_min.aggregate.iter().zip(&entropy_max.aggregate) {
        cmp.row([
            a.horizon.to_string(),
            a.t.to_string(),
            num(a.error_mean),
            num(b.error_mean),
            num(a.entropy_mean),
            num(b.entropy_mean),
            num(a.centroid_distance_mean),
            num(b.centroid_distance_mean),
        ])?;
    }
    cmp.save(&dir.join("comparison.csv"))?;

    let snap = cfg.sim.snapshot_step.min(cfg.planner.steps);
    let mut s = Table::new(hash, &["planner", "horizon", "trial", "t", "x", "y", "centroid_distance", "mean_abs_error", "entropy"])?;
    for r in entropy_min.trials.iter().chain(&entropy_max.trials) {
        let row = &r.record.rows[snap];
        s.row([
            r.planner.name().to_string(),
            r.horizon.to_string(),
            r.trial.to_string(),
            snap.to_string(),
            num(row.state[0]),
            num(row.state[1]),
            num(r.centroid_distance[snap]),
            num(row.mean_abs_error),
            num(row.entropy),
        ])?;
    }
    s.save(&dir.join("snapshot.csv"))?;

    let out = Comparison { entropy_min, entropy_max };
    check(&out.entropy_min)?;
    check(&out.entropy_max)?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayReport {
    pub rows: usize,
    /// First differing line of `trial.csv`, counting the header as line 1.
    pub first_mismatch: Option<usize>,
}

impl ReplayReport {
    pub fn matches(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

/// Re-runs the trial stored in `dir` and compares it with its `trial.csv`.
pub fn replay(dir: &Path) -> Result<ReplayReport> {
    let manifest: TrialManifest = toml::from_str(&std::fs::read_to_string(dir.join("trial.toml"))?)?;
    let cfg = &manifest.config;
    cfg.validate()?;
    if cfg.hash()? != manifest.config_hash {
        return Err(Error::Config("trial manifest hash does not match its config".into()));
    }
    let scenario = Scenario::new(cfg)?;
    let stored: GroundTruth = serde_json::from_str(&std::fs::read_to_string(dir.join("truth.json"))?)?;
    if stored != scenario.truth {
        return Err(Error::InvariantViolation("regenerated ground truth differs from truth.json".into()));
    }
    let result = run_trial(cfg, &scenario, manifest.planner, manifest.horizon, manifest.trial)?;
    let fresh = trial_table(&manifest.config_hash, &result)?;
    let old = std::fs::read_to_string(dir.join("trial.csv"))?;
    let first_mismatch = if fresh == old {
        None
    } else {
        let n = fresh.lines().zip(old.lines()).position(|(a, b)| a != b).unwrap_or(fresh.lines().count().min(old.lines().count()));
        Some(n + 1)
    };
    Ok(ReplayReport { rows: result.record.rows.len(), first_mismatch })
}
