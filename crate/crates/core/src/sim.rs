//! Environment simulation: vehicle dynamics, ground-truth fields, bounded
//! measurement noise and grid-based reconstruction error.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::RkhsFunction;
use crate::kernels::{Point, SquaredExponential};
use crate::recursive::BeliefState;

/// Axis-aligned box `[lo_d, hi_d]` per dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub bounds: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidParameter("domain needs at least one dimension".into()));
        }
        for &(lo, hi) in &bounds {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidParameter(format!("degenerate domain interval [{lo}, {hi}]")));
            }
        }
        Ok(Self { bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.distance_outside(x) == 0.0
    }

    /// Euclidean distance from `x` to the box; zero inside.
    pub fn distance_outside(&self, x: &[f64]) -> f64 {
        self.bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| {
                let d = if v < lo { lo - v } else if v > hi { v - hi } else { 0.0 };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn clamp(&self, x: &[f64]) -> Point {
        self.bounds.iter().zip(x).map(|(&(lo, hi), &v)| v.clamp(lo, hi)).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        self.bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect()
    }

    /// Regular grid including the boundary; a single sample along an axis
    /// sits at the interval midpoint. First axis varies slowest.
    pub fn grid(&self, resolution: &[usize]) -> Vec<Point> {
        let axes: Vec<Vec<f64>> = self
            .bounds
            .iter()
            .zip(resolution)
            .map(|(&(lo, hi), &n)| match n {
                0 => vec![],
                1 => vec![0.5 * (lo + hi)],
                _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
            })
            .collect();
        let mut pts: Vec<Point> = vec![vec![]];
        for axis in &axes {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&c| {
                        let mut q = p.clone();
                        q.push(c);
                        q
                    })
                })
                .collect();
        }
        pts
    }
}

/// Discrete-time vehicle model `x_{t+1} = f(x_t, u_t)` with a scalar control.
pub trait Dynamics: Send + Sync {
    fn step(&self, state: &[f64], control: f64) -> Point;

    /// Distance of `state` outside the admissible region; zero when admissible.
    fn distance_outside(&self, _state: &[f64]) -> f64 {
        0.0
    }

    /// Nearest admissible state.
    fn project(&self, state: &[f64]) -> Point {
        state.to_vec()
    }
}

/// Kinematic vehicle in a stationary double-gyre current; the control is a heading in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleGyre {
    pub gyre_strength: f64,
    pub speed: f64,
    pub dt: f64,
    pub domain: Domain,
}

impl DoubleGyre {
    pub fn new(gyre_strength: f64, speed: f64, dt: f64, domain: Domain) -> Result<Self> {
        for (name, v) in [("gyre strength", gyre_strength), ("vehicle speed", speed), ("timestep", dt)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if domain.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: domain.dim() });
        }
        Ok(Self { gyre_strength, speed, dt, domain })
    }

    pub fn flow(&self, state: &[f64]) -> [f64; 2] {
        let (x, y) = (state[0], state[1]);
        [
            -self.gyre_strength * (PI * x).sin() * (PI * y).cos(),
            self.gyre_strength * (PI * x).cos() * (PI * y).sin(),
        ]
    }
}

pub fn double_gyre_step(cfg: &DoubleGyre, state: &[f64], heading: f64) -> Point {
    let f = cfg.flow(state);
    vec![
        state[0] + cfg.dt * (f[0] + cfg.speed * heading.cos()),
        state[1] + cfg.dt * (f[1] + cfg.speed * heading.sin()),
    ]
}

impl Dynamics for DoubleGyre {
    fn step(&self, state: &[f64], control: f64) -> Point {
        double_gyre_step(self, state, control)
    }

    fn distance_outside(&self, state: &[f64]) -> f64 {
        self.domain.distance_outside(state)
    }

    fn project(&self, state: &[f64]) -> Point {
        self.domain.clamp(state)
    }
}

/// The scalar field being mapped, plus the measurement-noise bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub field: RkhsFunction,
    pub noise_bound: f64,
    pub domain: Domain,
}

impl GroundTruth {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.field.eval(x)
    }

    pub fn rkhs_norm(&self) -> f64 {
        self.field.rkhs_norm()
    }

    /// `y = s(x) + ε` with `ε` uniform on the open interval `(-σ_ε, σ_ε)`.
    pub fn sample_measurement<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> f64 {
        self.value(x) + bounded_noise(self.noise_bound, rng)
    }
}

/// Uniform draw from `(-bound, bound)`; zero when the bound is zero.
pub fn bounded_noise<R: Rng + ?Sized>(bound: f64, rng: &mut R) -> f64 {
    if bound <= 0.0 {
        return 0.0;
    }
    loop {
        let e = rng.random_range(-bound..bound);
        if e.abs() < bound {
            return e;
        }
    }
}

/// Seeded random kernel expansion over `domain`.
pub fn make_ground_truth(
    seed: u64,
    kernel: SquaredExponential,
    m: usize,
    domain: &Domain,
    noise_bound: f64,
) -> Result<GroundTruth> {
    if !(noise_bound >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise bound must be non-negative, got {noise_bound}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = RkhsFunction::random(&mut rng, kernel, m, &domain.bounds)?;
    Ok(GroundTruth { field, noise_bound, domain: domain.clone() })
}

/// Pointwise absolute reconstruction error over a regular grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorGrid {
    pub resolution: Vec<usize>,
    pub points: Vec<Point>,
    pub errors: Vec<f64>,
    pub mean_abs_error: f64,
}

pub fn evaluate_error_grid(truth: &GroundTruth, belief: &BeliefState, resolution: &[usize]) -> ErrorGrid {
    let points = truth.domain.grid(resolution);
    let errors: Vec<f64> = points.iter().map(|p| (truth.value(p) - belief.field_mean(p)).abs()).collect();
    let mean_abs_error = if errors.is_empty() { 0.0 } else { errors.iter().sum::<f64>() / errors.len() as f64 };
    ErrorGrid { resolution: resolution.to_vec(), points, errors, mean_abs_error }
}
