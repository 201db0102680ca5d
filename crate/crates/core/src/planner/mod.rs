//! Receding-horizon reduced value iteration over a tree of candidate
//! trajectories and their predicted inducing-value covariances.
//!
//! Each iteration deepens every leaf by every sampled control, keeps the
//! minimum-cost leaves unconditionally, then walks the remaining new leaves
//! in ascending cost order and drops a leaf when some already-kept leaf lies
//! within `δ` of it and the kept leaves' covariances make it ε-algebraically
//! redundant. Covariance propagation never needs measurement values, so the
//! whole search runs on predicted beliefs.

mod cost;
mod redundancy;

use std::collections::HashMap;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use std::sync::Arc;

pub use cost::{GramChain, MeasurementEntropy, NodeCost, PosteriorEntropy};
pub use redundancy::is_eps_alg_redundant;

use crate::error::{Error, Result};
use crate::kernels::{InducingSet, Point, Variant};
use crate::record::{StepRecord, TrialRecord};
use crate::recursive::{propagate_covariance, BeliefState};
use crate::sim::{evaluate_error_grid, Dynamics, GroundTruth};

/// Predicts the covariance after a measurement at a state.
pub trait CovariancePropagator: Send + Sync {
    fn propagate(&self, sigma: &DMatrix<f64>, state: &[f64]) -> Result<DMatrix<f64>>;
}

/// The recursive sparse-GP covariance update.
#[derive(Clone, Debug)]
pub struct CovarianceModel {
    pub inducing: Arc<InducingSet>,
    pub variant: Variant,
    pub noise_bound: f64,
}

impl CovariancePropagator for CovarianceModel {
    fn propagate(&self, sigma: &DMatrix<f64>, state: &[f64]) -> Result<DMatrix<f64>> {
        propagate_covariance(&self.inducing, sigma, state, self.variant, self.noise_bound)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrunerConfig {
    pub delta: f64,
    pub epsilon: f64,
    pub control_samples: Vec<f64>,
}

impl PrunerConfig {
    pub fn new(delta: f64, epsilon: f64, control_samples: Vec<f64>) -> Result<Self> {
        if control_samples.is_empty() {
            return Err(Error::InvalidParameter("control sample set is empty".into()));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta must be finite and non-negative, got {delta}")));
        }
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be non-negative, got {epsilon}")));
        }
        Ok(Self { delta, epsilon, control_samples })
    }

    /// `n` headings uniformly spaced on `[0, 2π)`.
    pub fn headings(n: usize, delta: f64, epsilon: f64) -> Result<Self> {
        let controls = (0..n).map(|i| 2.0 * std::f64::consts::PI * i as f64 / n as f64).collect();
        Self::new(delta, epsilon, controls)
    }
}

#[derive(Clone, Debug)]
pub struct SearchNode<A> {
    pub state: Point,
    pub sigma: DMatrix<f64>,
    pub cost: f64,
    pub parent: Option<usize>,
    pub action: Option<f64>,
    pub depth: usize,
    pub aux: A,
    children: Vec<usize>,
    alive: bool,
}

impl<A> SearchNode<A> {
    pub fn children(&self) -> &[usize] {
        &self.children
    }
}

/// Arena-backed search tree. The root is always node 0.
#[derive(Clone, Debug)]
pub struct SearchTree<A> {
    nodes: Vec<SearchNode<A>>,
    leaves: Vec<usize>,
    horizon: usize,
}

/// Counts from one iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IterationStats {
    pub expanded: usize,
    pub pruned: usize,
}

impl std::ops::AddAssign for IterationStats {
    fn add_assign(&mut self, o: Self) {
        self.expanded += o.expanded;
        self.pruned += o.pruned;
    }
}

impl<A: Clone + Send + Sync> SearchTree<A> {
    pub fn new<C: NodeCost<Aux = A>>(state: Point, sigma: DMatrix<f64>, depth: usize, horizon: usize, cost: &C) -> Result<Self> {
        let (aux, c) = cost.root(&sigma)?;
        let root = SearchNode { state, sigma, cost: c, parent: None, action: None, depth, aux, children: vec![], alive: true };
        Ok(Self { nodes: vec![root], leaves: vec![0], horizon })
    }

    pub fn root(&self) -> &SearchNode<A> {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> Option<&SearchNode<A>> {
        self.nodes.get(id).filter(|n| n.alive)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn leaf_ids(&self) -> &[usize] {
        &self.leaves
    }

    pub fn leaves(&self) -> impl Iterator<Item = &SearchNode<A>> {
        self.leaves.iter().map(|&i| &self.nodes[i])
    }

    /// Number of live nodes.
    pub fn len(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Depth of the leaves relative to the root.
    pub fn relative_depth(&self) -> usize {
        self.nodes[self.leaves[0]].depth - self.nodes[0].depth
    }

    /// Lowest-cost leaf; ties broken by lexicographic state, then insertion order.
    pub fn best_leaf(&self) -> usize {
        *self
            .leaves
            .iter()
            .min_by(|&&a, &&b| node_order(&self.nodes[a], a, &self.nodes[b], b))
            .expect("tree has at least one leaf")
    }

    /// Root-to-node control sequence.
    pub fn backtrace(&self, id: usize) -> Result<Vec<f64>> {
        let mut actions = Vec::new();
        let mut cur = id;
        loop {
            let n = self.node(cur).ok_or(Error::DetachedNode(id))?;
            match n.parent {
                None if cur == 0 => break,
                None => return Err(Error::DetachedNode(id)),
                Some(p) => {
                    actions.push(n.action.expect("non-root nodes carry an action"));
                    cur = p;
                }
            }
        }
        actions.reverse();
        Ok(actions)
    }

    /// The root's child on the path to `id`.
    pub fn first_step_toward(&self, id: usize) -> Result<usize> {
        let mut cur = id;
        loop {
            let n = self.node(cur).ok_or(Error::DetachedNode(id))?;
            match n.parent {
                Some(0) => return Ok(cur),
                Some(p) => cur = p,
                None => return Err(Error::DetachedNode(id)),
            }
        }
    }

    /// The subtree rooted at `id`, compacted into a fresh arena. Leaf order is preserved.
    pub fn reroot(&self, id: usize) -> Result<SearchTree<A>> {
        self.node(id).ok_or(Error::DetachedNode(id))?;
        let mut map: HashMap<usize, usize> = HashMap::new();
        let mut order = vec![id];
        let mut i = 0;
        while i < order.len() {
            let cur = order[i];
            order.extend(self.nodes[cur].children.iter().copied());
            i += 1;
        }
        // keep arena order so that insertion order, and hence tie-breaking, survives
        order.sort_unstable();
        for (new, &old) in order.iter().enumerate() {
            map.insert(old, new);
        }
        let nodes = order
            .iter()
            .map(|&old| {
                let n = &self.nodes[old];
                SearchNode {
                    state: n.state.clone(),
                    sigma: n.sigma.clone(),
                    cost: n.cost,
                    parent: if old == id { None } else { n.parent.map(|p| map[&p]) },
                    action: if old == id { None } else { n.action },
                    depth: n.depth,
                    aux: n.aux.clone(),
                    children: n.children.iter().map(|c| map[c]).collect(),
                    alive: true,
                }
            })
            .collect();
        let leaves = self.leaves.iter().filter_map(|l| map.get(l).copied()).collect();
        Ok(SearchTree { nodes, leaves, horizon: self.horizon })
    }

    fn remove_dead_branch(&mut self, mut id: usize) {
        while id != 0 && self.nodes[id].children.is_empty() {
            self.nodes[id].alive = false;
            let p = self.nodes[id].parent.expect("non-root node has a parent");
            self.nodes[p].children.retain(|&c| c != id);
            id = p;
        }
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn node_order<A>(a: &SearchNode<A>, ia: usize, b: &SearchNode<A>, ib: usize) -> std::cmp::Ordering {
    a.cost
        .total_cmp(&b.cost)
        .then_with(|| lexicographic(&a.state, &b.state))
        .then_with(|| ia.cmp(&ib))
}

/// Successor states of `state` under every control, after the boundary policy:
/// successors outside the admissible region are dropped; if none remain, the
/// control landing nearest to the region is kept and its successor projected.
pub fn successors<D: Dynamics + ?Sized>(dynamics: &D, state: &[f64], controls: &[f64]) -> Vec<(f64, Point)> {
    let all: Vec<(f64, Point, f64)> = controls
        .iter()
        .map(|&u| {
            let s = dynamics.step(state, u);
            let d = dynamics.distance_outside(&s);
            (u, s, d)
        })
        .collect();
    let legal: Vec<(f64, Point)> = all.iter().filter(|c| c.2 == 0.0).map(|c| (c.0, c.1.clone())).collect();
    if !legal.is_empty() {
        return legal;
    }
    let best = all.iter().min_by(|a, b| a.2.total_cmp(&b.2)).expect("controls are non-empty");
    vec![(best.0, dynamics.project(&best.1))]
}

/// Buckets kept states so the `δ`-neighbourhood query is local.
struct NeighbourIndex {
    delta: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl NeighbourIndex {
    fn new(delta: f64) -> Self {
        Self { delta, cells: HashMap::new() }
    }

    fn key(&self, x: &[f64]) -> Vec<i64> {
        if self.delta == 0.0 {
            x.iter().map(|v| (v + 0.0).to_bits() as i64).collect()
        } else {
            x.iter().map(|v| (v / self.delta).floor() as i64).collect()
        }
    }

    fn insert(&mut self, id: usize, x: &[f64]) {
        self.cells.entry(self.key(x)).or_default().push(id);
    }

    fn query(&self, x: &[f64], states: &[&[f64]]) -> Vec<usize> {
        let key = self.key(x);
        let mut out = Vec::new();
        let mut visit = |k: &Vec<i64>| {
            if let Some(ids) = self.cells.get(k) {
                for &id in ids {
                    if euclidean(states[id], x) <= self.delta {
                        out.push(id);
                    }
                }
            }
        };
        if self.delta == 0.0 {
            visit(&key);
        } else {
            let d = key.len();
            for code in 0..3usize.pow(d as u32) {
                let mut k = key.clone();
                let mut c = code;
                for v in k.iter_mut() {
                    *v += (c % 3) as i64 - 1;
                    c /= 3;
                }
                visit(&k);
            }
        }
        out.sort_unstable();
        out
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

struct Candidate<A> {
    parent: usize,
    action: f64,
    state: Point,
    sigma: DMatrix<f64>,
    cost: f64,
    aux: A,
}

/// One reduced-value-iteration pass: deepens the tree by one layer.
pub fn rvi_iterate<D, P, C>(
    tree: &mut SearchTree<C::Aux>,
    dynamics: &D,
    propagator: &P,
    cost: &C,
    pruner: &PrunerConfig,
) -> Result<IterationStats>
where
    D: Dynamics + ?Sized,
    P: CovariancePropagator + ?Sized,
    C: NodeCost,
{
    if pruner.control_samples.is_empty() {
        return Err(Error::InvalidParameter("control sample set is empty".into()));
    }
    let expansions: Vec<Vec<Candidate<C::Aux>>> = tree
        .leaves
        .par_iter()
        .map(|&leaf| {
            let node = &tree.nodes[leaf];
            successors(dynamics, &node.state, &pruner.control_samples)
                .into_iter()
                .map(|(action, state)| {
                    let sigma = propagator.propagate(&node.sigma, &state)?;
                    let (aux, c) = cost.child(&node.aux, &state, &sigma)?;
                    Ok(Candidate { parent: leaf, action, state, sigma, cost: c, aux })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let candidates: Vec<Candidate<C::Aux>> = expansions.into_iter().flatten().collect();
    let expanded = candidates.len();

    let min_cost = candidates.iter().map(|c| c.cost).fold(f64::INFINITY, f64::min);
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&candidates[a], &candidates[b]);
        ca.cost.total_cmp(&cb.cost).then_with(|| lexicographic(&ca.state, &cb.state)).then_with(|| a.cmp(&b))
    });

    let states: Vec<&[f64]> = candidates.iter().map(|c| c.state.as_slice()).collect();
    let mut index = NeighbourIndex::new(pruner.delta);
    let mut keep = vec![false; candidates.len()];
    for &i in order.iter().filter(|&&i| candidates[i].cost == min_cost) {
        keep[i] = true;
        index.insert(i, &candidates[i].state);
    }
    for &i in order.iter().filter(|&&i| candidates[i].cost != min_cost) {
        let q = index.query(&candidates[i].state, &states);
        let redundant = !q.is_empty() && {
            let qs: Vec<&DMatrix<f64>> = q.iter().map(|&j| &candidates[j].sigma).collect();
            is_eps_alg_redundant(&candidates[i].sigma, &qs, pruner.epsilon)
        };
        if !redundant {
            keep[i] = true;
            index.insert(i, &candidates[i].state);
        }
    }

    let old_leaves = std::mem::take(&mut tree.leaves);
    let mut pruned = 0;
    for (c, kept) in candidates.into_iter().zip(keep) {
        if !kept {
            pruned += 1;
            continue;
        }
        let id = tree.nodes.len();
        let depth = tree.nodes[c.parent].depth + 1;
        tree.nodes[c.parent].children.push(id);
        tree.nodes.push(SearchNode {
            state: c.state,
            sigma: c.sigma,
            cost: c.cost,
            parent: Some(c.parent),
            action: Some(c.action),
            depth,
            aux: c.aux,
            children: vec![],
            alive: true,
        });
        tree.leaves.push(id);
    }
    for leaf in old_leaves {
        tree.remove_dead_branch(leaf);
    }
    Ok(IterationStats { expanded, pruned })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannerConfig {
    pub horizon: usize,
    pub steps: usize,
    pub pruner: PrunerConfig,
    pub variant: Variant,
    pub error_resolution: Vec<usize>,
}

/// Builds the depth-`N` tree, then repeatedly executes the first action of
/// the best leaf, measures, updates the belief and re-plans on the reused subtree.
pub fn plan_and_execute<D, C, R>(
    initial_state: &[f64],
    initial_belief: BeliefState,
    dynamics: &D,
    truth: &GroundTruth,
    cost: &C,
    config: &PlannerConfig,
    rng: &mut R,
) -> Result<TrialRecord>
where
    D: Dynamics + ?Sized,
    C: NodeCost,
    R: Rng + ?Sized,
{
    if config.horizon == 0 {
        return Err(Error::InvalidParameter("planning horizon must be at least 1".into()));
    }
    let started = Instant::now();
    let variant = config.variant;
    let noise = truth.noise_bound;
    let model = CovarianceModel { inducing: initial_belief.inducing().clone(), variant, noise_bound: noise };

    let mut belief = initial_belief;
    let mut tree = SearchTree::new(initial_state.to_vec(), belief.covariance().clone(), 0, config.horizon, cost)?;
    let mut stats = IterationStats::default();
    for _ in 0..config.horizon {
        stats += rvi_iterate(&mut tree, dynamics, &model, cost, &config.pruner)?;
    }

    let mut rows = Vec::with_capacity(config.steps + 1);
    rows.push(StepRecord {
        t: 0,
        state: initial_state.to_vec(),
        control: None,
        measurement: None,
        entropy: belief.entropy()?,
        mean_abs_error: evaluate_error_grid(truth, &belief, &config.error_resolution).mean_abs_error,
        nodes_expanded: stats.expanded,
        nodes_pruned: stats.pruned,
        leaves: tree.leaf_ids().len(),
    });

    for t in 1..=config.steps {
        let best = tree.best_leaf();
        let next = tree.first_step_toward(best)?;
        let node = &tree.nodes[next];
        let control = node.action.expect("child carries an action");
        let state = node.state.clone();
        let y = truth.sample_measurement(&state, rng);
        belief = belief.observe(&state, y, variant, noise)?;

        tree = tree.reroot(next)?;
        let stats = rvi_iterate(&mut tree, dynamics, &model, cost, &config.pruner)?;

        rows.push(StepRecord {
            t,
            state,
            control: Some(control),
            measurement: Some(y),
            entropy: belief.entropy()?,
            mean_abs_error: evaluate_error_grid(truth, &belief, &config.error_resolution).mean_abs_error,
            nodes_expanded: stats.expanded,
            nodes_pruned: stats.pruned,
            leaves: tree.leaf_ids().len(),
        });
    }
    Ok(TrialRecord { rows, final_belief: belief, wall_time: started.elapsed() })
}
