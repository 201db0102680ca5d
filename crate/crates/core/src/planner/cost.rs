//! Node cost functionals for the search tree.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{Point, SquaredExponential};
use crate::recursive::entropy_cost;

/// Scalar cost attached to every search node.
///
/// `Aux` is per-node bookkeeping a cost may need beyond the covariance,
/// derived from the parent's bookkeeping and the child's state.
pub trait NodeCost: Send + Sync {
    type Aux: Clone + Send + Sync;

    fn root(&self, sigma: &DMatrix<f64>) -> Result<(Self::Aux, f64)>;

    fn child(&self, parent: &Self::Aux, state: &[f64], sigma: &DMatrix<f64>) -> Result<(Self::Aux, f64)>;
}

/// Posterior entropy of the inducing values, `½ log det 2πe Σ`.
#[derive(Clone, Copy, Debug, Default)]
pub struct PosteriorEntropy;

impl NodeCost for PosteriorEntropy {
    type Aux = ();

    fn root(&self, sigma: &DMatrix<f64>) -> Result<((), f64)> {
        Ok(((), entropy_cost(sigma)?))
    }

    fn child(&self, _: &(), _: &[f64], sigma: &DMatrix<f64>) -> Result<((), f64)> {
        Ok(((), entropy_cost(sigma)?))
    }
}

/// Persistent list of measurement locations with the matching rows of the
/// Cholesky factor of `K_X + (σ_ε² + jitter) I`. Siblings share their prefix.
#[derive(Debug)]
pub struct GramChain {
    location: Point,
    row: Vec<f64>,
    log_det: f64,
    parent: Option<Arc<GramChain>>,
}

impl GramChain {
    pub fn len(&self) -> usize {
        self.row.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row.is_empty()
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Locations root-first.
    pub fn locations(&self) -> Vec<Point> {
        let mut out: Vec<Point> = Self::walk(self).map(|c| c.location.clone()).collect();
        out.reverse();
        out
    }

    fn walk(start: &GramChain) -> impl Iterator<Item = &GramChain> {
        std::iter::successors(Some(start), |c| c.parent.as_deref())
    }
}

/// Measurement-entropy baseline: cost `-log det(K_X + σ_ε² I)` over every
/// measurement location so far, executed and planned, under the exact kernel.
#[derive(Clone, Debug)]
pub struct MeasurementEntropy {
    pub kernel: SquaredExponential,
    pub noise_bound: f64,
}

impl MeasurementEntropy {
    fn extend(&self, parent: &Option<Arc<GramChain>>, state: &[f64]) -> Result<Arc<GramChain>> {
        let chain: Vec<&GramChain> = match parent {
            None => vec![],
            Some(p) => {
                let mut v: Vec<&GramChain> = GramChain::walk(p).collect();
                v.reverse();
                v
            }
        };
        let mut w = Vec::with_capacity(chain.len() + 1);
        for (i, link) in chain.iter().enumerate() {
            let dot: f64 = link.row[..i].iter().zip(&w).map(|(a, b)| a * b).sum();
            w.push((self.kernel.k(state, &link.location) - dot) / link.row[i]);
        }
        let diag2 = self.kernel.k(state, state) + self.noise_bound * self.noise_bound + self.kernel.jitter
            - w.iter().map(|v| v * v).sum::<f64>();
        if !(diag2 > 0.0) {
            return Err(Error::Factorization("measurement Gram chain"));
        }
        let diag = diag2.sqrt();
        w.push(diag);
        let prev = parent.as_ref().map_or(0.0, |p| p.log_det);
        Ok(Arc::new(GramChain {
            location: state.to_vec(),
            row: w,
            log_det: prev + 2.0 * diag.ln(),
            parent: parent.clone(),
        }))
    }
}

impl NodeCost for MeasurementEntropy {
    type Aux = Option<Arc<GramChain>>;

    fn root(&self, _: &DMatrix<f64>) -> Result<(Self::Aux, f64)> {
        Ok((None, 0.0))
    }

    fn child(&self, parent: &Self::Aux, state: &[f64], _: &DMatrix<f64>) -> Result<(Self::Aux, f64)> {
        let c = self.extend(parent, state)?;
        let cost = -c.log_det;
        Ok((Some(c), cost))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSpec;
    use crate::linalg;

    #[test]
    fn chain_log_det_matches_dense_factorization() {
        let k = SquaredExponential::new(2, 0.3, 1.0).unwrap();
        let cost = MeasurementEntropy { kernel: k, noise_bound: 0.05 };
        let locs: Vec<Point> = (0..12).map(|i| vec![(i as f64 * 0.31).fract() * 2.0, (i as f64 * 0.57).fract()]).collect();
        let sigma = DMatrix::zeros(1, 1);
        let (mut aux, c0) = cost.root(&sigma).unwrap();
        assert_eq!(c0, 0.0);
        let mut last = 0.0;
        for l in &locs {
            let (a, c) = cost.child(&aux, l, &sigma).unwrap();
            aux = a;
            last = c;
        }
        let g = KernelSpec::Exact(k).gram_matrix(&locs).unwrap();
        let chol = linalg::cholesky_jittered(&g, 0.05 * 0.05 + k.jitter, "t").unwrap();
        assert!((last + linalg::log_det(&chol)).abs() < 1e-10);
        let chain = aux.unwrap();
        assert_eq!(chain.len(), 12);
        assert_eq!(chain.locations(), locs);
    }
}
