use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernels::{InducingSet, SquaredExponential, Variant};
use crate::planner::PrunerConfig;
use crate::sim::{DoubleGyre, Domain};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "bound_demo_1d")]
    BoundDemo1d,
    #[serde(rename = "flowfield_entropy_min")]
    FlowfieldEntropyMin,
    #[serde(rename = "flowfield_entropy_max")]
    FlowfieldEntropyMax,
}

/// Declarative scenario description. Every field has a default, so a config
/// file only needs `experiment = "..."`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub inducing: InducingConfig,
    #[serde(default)]
    pub planner: PlannerSection,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub demo: DemoConfig,
}

fn default_trials() -> usize {
    20
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub lengthscale: f64,
    pub signal_variance: f64,
    /// Diagonal jitter as a multiple of the signal variance.
    pub relative_jitter: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { lengthscale: 0.3, signal_variance: 1.0, relative_jitter: 1e-9 }
    }
}

/// Inducing points on a regular interior grid (cell centres), one count per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InducingConfig {
    pub grid: Vec<usize>,
}

impl Default for InducingConfig {
    fn default() -> Self {
        Self { grid: vec![3, 3] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSection {
    pub horizons: Vec<usize>,
    pub steps: usize,
    /// Number of uniformly spaced headings.
    pub controls: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub variant: Variant,
}

impl Default for PlannerSection {
    fn default() -> Self {
        Self { horizons: vec![1, 5, 10], steps: 100, controls: 8, delta: 0.03, epsilon: f64::INFINITY, variant: Variant::Fic }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub domain: Vec<(f64, f64)>,
    pub gyre_strength: f64,
    pub speed: f64,
    pub dt: f64,
    pub noise_bound: f64,
    pub error_grid: Vec<usize>,
    /// Number of kernel centres in the ground-truth field.
    pub truth_centers: usize,
    /// Fixed start state; random per trial when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    /// Step at which trajectories are summarised in the comparison table.
    pub snapshot_step: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            domain: vec![(0.0, 2.0), (0.0, 1.0)],
            gyre_strength: 0.3,
            speed: 0.2,
            dt: 0.1,
            noise_bound: 0.05,
            error_grid: vec![30, 30],
            truth_centers: 30,
            start: None,
            snapshot_step: 40,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    pub domain: (f64, f64),
    pub centers: usize,
    /// Inclusive range for the number of random measurement locations.
    pub min_measurements: usize,
    pub max_measurements: usize,
    /// Measure at every grid point instead of random locations.
    pub measure_on_grid: bool,
    pub grid: usize,
    pub noise_bound: f64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            domain: (0.0, 1.0),
            centers: 7,
            min_measurements: 5,
            max_measurements: 20,
            measure_on_grid: false,
            grid: 200,
            noise_bound: 0.1,
        }
    }
}

/// Command-line overrides of config scalars.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub trials: Option<usize>,
    pub horizon: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            seed: 0,
            trials: default_trials(),
            output_dir: default_output_dir(),
            kernel: KernelConfig::default(),
            inducing: InducingConfig::default(),
            planner: PlannerSection::default(),
            sim: SimConfig::default(),
            demo: DemoConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
        if let Some(h) = o.horizon {
            self.planner.horizons = vec![h];
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// First 16 hex digits of the SHA-256 of the resolved TOML. The output
    /// directory is blanked first so relocating a run keeps its hash.
    pub fn hash(&self) -> Result<String> {
        let mut keyed = self.clone();
        keyed.output_dir = PathBuf::new();
        let digest = Sha256::digest(keyed.to_toml_string()?.as_bytes());
        Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.seed > i64::MAX as u64 {
            return bad(format!("seed {} does not fit a TOML integer", self.seed));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        self.base_kernel(1)?;
        match self.experiment {
            ExperimentKind::BoundDemo1d => {
                let d = &self.demo;
                if !(d.domain.0 < d.domain.1) || !d.domain.0.is_finite() || !d.domain.1.is_finite() {
                    return bad(format!("demo domain {:?} is degenerate", d.domain));
                }
                if d.centers == 0 {
                    return bad("demo needs at least one kernel centre".into());
                }
                if d.min_measurements > d.max_measurements {
                    return bad("demo min_measurements exceeds max_measurements".into());
                }
                if d.grid == 0 {
                    return bad("demo grid must have at least one point".into());
                }
                if !(d.noise_bound >= 0.0 && d.noise_bound.is_finite()) {
                    return bad(format!("demo noise bound must be non-negative, got {}", d.noise_bound));
                }
            }
            ExperimentKind::FlowfieldEntropyMin | ExperimentKind::FlowfieldEntropyMax => {
                self.dynamics()?;
                self.inducing_set()?;
                self.pruner()?;
                let s = &self.sim;
                if self.planner.horizons.is_empty() || self.planner.horizons.contains(&0) {
                    return bad("planner horizons must be a non-empty list of positive integers".into());
                }
                if s.error_grid.len() != 2 || s.error_grid.contains(&0) {
                    return bad(format!("error grid must be two positive counts, got {:?}", s.error_grid));
                }
                if s.truth_centers == 0 {
                    return bad("ground truth needs at least one kernel centre".into());
                }
                if !(s.noise_bound >= 0.0 && s.noise_bound.is_finite()) {
                    return bad(format!("noise bound must be non-negative, got {}", s.noise_bound));
                }
                if let Some(start) = &s.start {
                    if !Domain::new(s.domain.clone())?.contains(start) {
                        return bad(format!("start {start:?} lies outside the domain"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn base_kernel(&self, dim: usize) -> Result<SquaredExponential> {
        let k = &self.kernel;
        SquaredExponential::with_jitter(dim, k.lengthscale, k.signal_variance, k.relative_jitter * k.signal_variance)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn domain(&self) -> Result<Domain> {
        Domain::new(self.sim.domain.clone()).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn dynamics(&self) -> Result<DoubleGyre> {
        let s = &self.sim;
        DoubleGyre::new(s.gyre_strength, s.speed, s.dt, self.domain()?).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn inducing_set(&self) -> Result<InducingSet> {
        let domain = self.domain()?;
        if self.inducing.grid.len() != domain.dim() {
            return Err(Error::Config(format!(
                "inducing grid {:?} does not match the {}-dimensional domain",
                self.inducing.grid,
                domain.dim()
            )));
        }
        InducingSet::interior_grid(self.base_kernel(domain.dim())?, &domain.bounds, &self.inducing.grid)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn pruner(&self) -> Result<PrunerConfig> {
        let p = &self.planner;
        PrunerConfig::headings(p.controls, p.delta, p.epsilon).map_err(|e| Error::Config(e.to_string()))
    }
}
