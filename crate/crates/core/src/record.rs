use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::kernels::Point;
use crate::recursive::BeliefState;

/// Metrics after step `t`. Row `t = 0` is the initial state, before any action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub state: Point,
    pub control: Option<f64>,
    pub measurement: Option<f64>,
    /// `½ log det 2πe Σ_t` of the executed belief.
    pub entropy: f64,
    pub mean_abs_error: f64,
    /// Search-tree statistics of the planning that followed this step.
    pub nodes_expanded: usize,
    pub nodes_pruned: usize,
    pub leaves: usize,
}

#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub rows: Vec<StepRecord>,
    pub final_belief: BeliefState,
    pub wall_time: Duration,
}

impl TrialRecord {
    pub fn trajectory(&self) -> Vec<Point> {
        self.rows.iter().map(|r| r.state.clone()).collect()
    }

    pub fn entropies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.entropy).collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean_abs_error).collect()
    }

    pub fn executed_steps(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }
}
