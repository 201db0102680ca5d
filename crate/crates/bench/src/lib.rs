//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use entropy_ipp::sim::{DoubleGyre, Domain};
use entropy_ipp::{InducingSet, Point, SquaredExponential};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn flow_domain() -> Domain {
    Domain::new(vec![(0.0, 2.0), (0.0, 1.0)]).unwrap()
}

pub fn inducing_grid(per_axis: usize) -> Arc<InducingSet> {
    let base = SquaredExponential::new(2, 0.3, 1.0).unwrap();
    Arc::new(InducingSet::interior_grid(base, &flow_domain().bounds, &[per_axis, per_axis]).unwrap())
}

pub fn gyre() -> DoubleGyre {
    DoubleGyre::new(0.3, 0.2, 0.1, flow_domain()).unwrap()
}

pub fn random_points(seed: u64, n: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| vec![rng.random_range(0.0..2.0), rng.random_range(0.0..1.0)]).collect()
}
