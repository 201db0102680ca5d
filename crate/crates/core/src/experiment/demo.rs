//! One-dimensional bound demonstration: random kernel-expansion targets,
//! bounded noise, and the worst-case bound against the observed error.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::table::{num, write_file, Table};
use super::trial_rng;
use crate::error::{Error, Result};
use crate::gp::{batch_regress, Dataset, PowerFunction, RkhsFunction};
use crate::kernels::{KernelSpec, Point};
use crate::sim::{bounded_noise, Domain};

#[derive(Clone, Debug, PartialEq)]
pub struct DemoRow {
    pub x: f64,
    pub truth: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub bound: f64,
    pub abs_error: f64,
}

impl DemoRow {
    pub fn violates_bound(&self) -> bool {
        self.abs_error > self.bound
    }

    pub fn outside_one_sigma(&self) -> bool {
        self.abs_error > self.std_dev
    }
}

#[derive(Clone, Debug)]
pub struct DemoInstance {
    pub index: usize,
    pub target: RkhsFunction,
    pub data: Dataset,
    pub rows: Vec<DemoRow>,
}

impl DemoInstance {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.violates_bound()).count()
    }

    /// Grid points outside the 1σ band yet inside the bound.
    pub fn ci_breaks(&self) -> usize {
        self.rows.iter().filter(|r| r.outside_one_sigma() && !r.violates_bound()).count()
    }
}

#[derive(Clone, Debug)]
pub struct DemoOutcome {
    pub config_hash: String,
    pub instances: Vec<DemoInstance>,
}

impl DemoOutcome {
    pub fn violations(&self) -> usize {
        self.instances.iter().map(DemoInstance::violations).sum()
    }
}

pub fn demo_instance(cfg: &ExperimentConfig, index: usize) -> Result<DemoInstance> {
    let d = &cfg.demo;
    let kernel = cfg.base_kernel(1)?;
    let spec = KernelSpec::Exact(kernel);
    let bounds = [d.domain];
    let grid = Domain::new(bounds.to_vec())?.grid(&[d.grid]);
    let mut rng = trial_rng(cfg.seed, index);
    let target = RkhsFunction::random(&mut rng, kernel, d.centers, &bounds)?;
    let locations: Vec<Point> = if d.measure_on_grid {
        grid.clone()
    } else {
        let n = rng.random_range(d.min_measurements..=d.max_measurements);
        (0..n).map(|_| vec![rng.random_range(d.domain.0..=d.domain.1)]).collect()
    };
    let values = locations.iter().map(|x| target.eval(x) + bounded_noise(d.noise_bound, &mut rng)).collect();
    let data = Dataset::new(locations, values, d.noise_bound)?;

    let posterior = batch_regress(&data, &spec, false)?;
    let power = PowerFunction::new(&data.locations, &spec)?;
    let norm = target.rkhs_norm();
    let rows = grid
        .iter()
        .map(|x| {
            let truth = target.eval(x);
            let mean = posterior.mean(x)?;
            Ok(DemoRow {
                x: x[0],
                truth,
                mean,
                std_dev: posterior.std_dev(x)?,
                bound: power.error_bound(norm, d.noise_bound, x)?,
                abs_error: (truth - mean).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DemoInstance { index, target, data, rows })
}

pub fn simulate_bound_demo_1d(cfg: &ExperimentConfig) -> Result<DemoOutcome> {
    if cfg.experiment != ExperimentKind::BoundDemo1d {
        return Err(Error::Config("not a bound_demo_1d config".into()));
    }
    cfg.validate()?;
    let instances = (0..cfg.trials).into_par_iter().map(|i| demo_instance(cfg, i)).collect::<Result<Vec<_>>>()?;
    Ok(DemoOutcome { config_hash: cfg.hash()?, instances })
}

pub fn write_bound_demo(outcome: &DemoOutcome, cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let hash = &outcome.config_hash;
    write_file(&dir.join("resolved_config.toml"), &cfg.to_toml_string()?)?;
    let mut summary = Table::new(
        hash,
        &["instance", "measurements", "rkhs_norm", "violations", "outside_one_sigma", "max_error", "max_bound"],
    )?;
    for inst in &outcome.instances {
        let mut grid = Table::new(
            hash,
            &["instance", "x", "truth", "mean", "std_dev", "lower_1sigma", "upper_1sigma", "bound", "lower_bound", "upper_bound", "abs_error", "violation"],
        )?;
        for r in &inst.rows {
            grid.row([
                inst.index.to_string(),
                num(r.x),
                num(r.truth),
                num(r.mean),
                num(r.std_dev),
                num(r.mean - r.std_dev),
                num(r.mean + r.std_dev),
                num(r.bound),
                num(r.mean - r.bound),
                num(r.mean + r.bound),
                num(r.abs_error),
                r.violates_bound().to_string(),
            ])?;
        }
        grid.save(&dir.join(format!("instance_{:03}.csv", inst.index)))?;
        let mut meas = Table::new(hash, &["instance", "x", "y"])?;
        for (x, y) in inst.data.locations.iter().zip(&inst.data.values) {
            meas.row([inst.index.to_string(), num(x[0]), num(*y)])?;
        }
        meas.save(&dir.join(format!("measurements_{:03}.csv", inst.index)))?;
        let max = |f: fn(&DemoRow) -> f64| inst.rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        summary.row([
            inst.index.to_string(),
            inst.data.len().to_string(),
            num(inst.target.rkhs_norm()),
            inst.violations().to_string(),
            inst.rows.iter().filter(|r| r.outside_one_sigma()).count().to_string(),
            num(max(|r| r.abs_error)),
            num(max(|r| r.bound)),
        ])?;
    }
    summary.save(&dir.join("summary.csv"))
}

/// Simulates, writes the tables, then fails if any grid point broke the bound.
pub fn run_bound_demo_1d(cfg: &ExperimentConfig) -> Result<DemoOutcome> {
    let outcome = simulate_bound_demo_1d(cfg)?;
    write_bound_demo(&outcome, cfg, &cfg.output_dir)?;
    let v = outcome.violations();
    if v > 0 {
        return Err(Error::InvariantViolation(format!("{v} grid points exceed the worst-case bound")));
    }
    Ok(outcome)
}
