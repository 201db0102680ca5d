//! Informative path planning for sparse Gaussian-process field estimation.
//!
//! The crate covers squared-exponential kernels with SoR/FIC inducing-point
//! approximations, worst-case error bounds, a recursive filter over inducing
//! values, a reduced-value-iteration planner and a double-gyre simulator.

pub mod error;
pub mod experiment;
pub mod gp;
pub mod kernels;
pub mod linalg;
pub mod planner;
pub mod record;
pub mod recursive;
pub mod sim;

pub use error::{Error, Result};
pub use gp::{
    batch_regress, lambda_factor, posterior_entropy_inducing, power_function, worst_case_bound,
    worst_case_bound_inducing, Dataset, Posterior, PowerFunction, RkhsFunction,
};
pub use kernels::{InducingSet, KernelSpec, Point, SquaredExponential, Variant};
pub use planner::{
    plan_and_execute, rvi_iterate, CovarianceModel, CovariancePropagator, MeasurementEntropy, NodeCost,
    PlannerConfig, PosteriorEntropy, PrunerConfig, SearchTree,
};
pub use record::{StepRecord, TrialRecord};
pub use recursive::{entropy_cost, propagate_covariance, BeliefState, MeasurementPrediction};
pub use sim::{DoubleGyre, Domain, Dynamics, GroundTruth};
