//! Fixed-dimension recursive filter over the inducing values `y_Z`.
//!
//! The belief `(μ_t, Σ_t)` is the posterior mean and covariance of `y_Z`
//! given all measurements so far. Each scalar measurement is folded in with
//! a Kalman-style update whose cost is `O(M²)` regardless of how many
//! measurements have already been absorbed.
//!
//! Jitter convention: the prior covariance is `K_Z + jitter·I` and every
//! innovation variance carries the same jitter, which keeps the filter
//! exactly consistent with batch conditioning on the jittered Gram matrices.

use std::f64::consts::{E, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::{InducingSet, Variant};
use crate::linalg;

#[derive(Clone, Debug)]
pub struct BeliefState {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    steps: usize,
    inducing: Arc<InducingSet>,
}

/// Predicted measurement statistics at a location.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementPrediction {
    pub y_hat: f64,
    /// Innovation variance.
    pub s_yy: f64,
    /// Cross-covariance between the measurement and `y_Z`.
    pub s_yz: DVector<f64>,
}

impl BeliefState {
    /// `μ_0 = 0`, `Σ_0 = K_Z + jitter·I`.
    pub fn new(inducing: Arc<InducingSet>) -> Self {
        let m = inducing.len();
        let mut sigma = inducing.gram().clone();
        for i in 0..m {
            sigma[(i, i)] += inducing.base().jitter;
        }
        Self { mu: DVector::zeros(m), sigma, steps: 0, inducing }
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn inducing(&self) -> &Arc<InducingSet> {
        &self.inducing
    }

    pub fn predict(&self, x: &[f64], variant: Variant, noise_bound: f64) -> Result<MeasurementPrediction> {
        self.inducing.base().check_point(x)?;
        let (q, s_yz, s_yy) = innovation(&self.inducing, &self.sigma, x, variant, noise_bound);
        Ok(MeasurementPrediction { y_hat: q.dot(&self.mu), s_yy, s_yz })
    }

    pub fn update(&self, pred: &MeasurementPrediction, y: f64) -> Result<BeliefState> {
        if !(pred.s_yy > 0.0) {
            return Err(Error::NumericalBreakdown(pred.s_yy));
        }
        if pred.s_yz.len() != self.mu.len() {
            return Err(Error::DimensionMismatch { expected: self.mu.len(), found: pred.s_yz.len() });
        }
        if !y.is_finite() {
            return Err(Error::NonFinite("measurement"));
        }
        let mu = &self.mu + &pred.s_yz * ((y - pred.y_hat) / pred.s_yy);
        let sigma = downdate(&self.sigma, &pred.s_yz, pred.s_yy);
        Ok(BeliefState { mu, sigma, steps: self.steps + 1, inducing: self.inducing.clone() })
    }

    /// Prediction followed by update with measurement `y` taken at `x`.
    pub fn observe(&self, x: &[f64], y: f64, variant: Variant, noise_bound: f64) -> Result<BeliefState> {
        let pred = self.predict(x, variant, noise_bound)?;
        self.update(&pred, y)
    }

    pub fn entropy(&self) -> Result<f64> {
        entropy_cost(&self.sigma)
    }

    /// Posterior field mean at `x` and covariance between `x` and `x2`.
    pub fn predict_field(&self, x: &[f64], x2: &[f64], variant: Variant) -> Result<(f64, f64)> {
        let base = self.inducing.base();
        base.check_point(x)?;
        base.check_point(x2)?;
        let kx = self.inducing.cross(x);
        let qx = self.inducing.factor().solve(&kx);
        let mean = qx.dot(&self.mu);
        let mut cov = if x == x2 {
            qx.dot(&(&self.sigma * &qx))
        } else {
            self.inducing.weights(x2).dot(&(&self.sigma * &qx))
        };
        if variant == Variant::Fic && x == x2 {
            cov += base.k(x, x) - kx.dot(&qx);
        }
        Ok((mean, cov))
    }

    /// Field mean only; cheaper than [`predict_field`](Self::predict_field).
    pub fn field_mean(&self, x: &[f64]) -> f64 {
        self.inducing.weights(x).dot(&self.mu)
    }
}

/// `(q(x), Σ q(x), s_yy)` for a measurement at `x`.
fn innovation(
    inducing: &InducingSet,
    sigma: &DMatrix<f64>,
    x: &[f64],
    variant: Variant,
    noise_bound: f64,
) -> (DVector<f64>, DVector<f64>, f64) {
    let base = inducing.base();
    let kx = inducing.cross(x);
    let q = inducing.factor().solve(&kx);
    let s_yz = sigma * &q;
    let mut s_yy = q.dot(&s_yz) + noise_bound * noise_bound + base.jitter;
    if variant == Variant::Fic {
        s_yy += base.k(x, x) - kx.dot(&q);
    }
    (q, s_yz, s_yy)
}

fn downdate(sigma: &DMatrix<f64>, s_yz: &DVector<f64>, s_yy: f64) -> DMatrix<f64> {
    let mut out = sigma.clone();
    out.ger(-1.0 / s_yy, s_yz, s_yz, 1.0);
    linalg::symmetrize(&mut out);
    out
}

/// Covariance after a measurement at `x`; identical to the `Σ` produced by
/// [`BeliefState::update`], without needing the measurement value.
pub fn propagate_covariance(
    inducing: &InducingSet,
    sigma: &DMatrix<f64>,
    x: &[f64],
    variant: Variant,
    noise_bound: f64,
) -> Result<DMatrix<f64>> {
    let (_, s_yz, s_yy) = innovation(inducing, sigma, x, variant, noise_bound);
    if !(s_yy > 0.0) {
        return Err(Error::NumericalBreakdown(s_yy));
    }
    Ok(downdate(sigma, &s_yz, s_yy))
}

/// `c(Σ) = ½ log det(2πe Σ)`.
pub fn entropy_cost(sigma: &DMatrix<f64>) -> Result<f64> {
    let m = sigma.nrows();
    if sigma.ncols() != m {
        return Err(Error::DimensionMismatch { expected: m, found: sigma.ncols() });
    }
    let chol = linalg::cholesky_jittered(sigma, 0.0, "belief covariance")?;
    Ok(0.5 * (m as f64 * (2.0 * PI * E).ln() + linalg::log_det(&chol)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::SquaredExponential;

    fn inducing(jitter: f64) -> Arc<InducingSet> {
        let base = SquaredExponential::with_jitter(2, 0.35, 1.0, jitter).unwrap();
        Arc::new(InducingSet::new(base, vec![vec![0.2, 0.2], vec![0.8, 0.3], vec![0.5, 0.8]]).unwrap())
    }

    #[test]
    fn initial_belief_single_point() {
        let base = SquaredExponential::with_jitter(1, 0.3, 1.0, 0.0).unwrap();
        let z = Arc::new(InducingSet::new(base, vec![vec![0.0]]).unwrap());
        let b = BeliefState::new(z);
        assert_eq!(b.mean().as_slice(), &[0.0]);
        assert_eq!(b.covariance()[(0, 0)], 1.0);
        assert_eq!(b.steps(), 0);
    }

    #[test]
    fn initial_entropy_is_prior_entropy() {
        let z = inducing(1e-9);
        let b = BeliefState::new(z.clone());
        let c = linalg::cholesky_jittered(z.gram(), 1e-9, "t").unwrap();
        let oracle = 0.5 * (3.0 * (2.0 * PI * E).ln() + linalg::log_det(&c));
        assert!((b.entropy().unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn entropy_cost_examples() {
        let s = DMatrix::from_element(1, 1, 1.0 / (2.0 * PI * E));
        assert!(entropy_cost(&s).unwrap().abs() < 1e-15);
        let i2 = DMatrix::<f64>::identity(2, 2);
        assert!((entropy_cost(&i2).unwrap() - (2.0 * PI * E).ln()).abs() < 1e-15);
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(entropy_cost(&indefinite).is_err());
    }

    #[test]
    fn prior_prediction_at_inducing_point() {
        let z = inducing(0.0);
        let b = BeliefState::new(z.clone());
        let x = z.points()[1].clone();
        let p = b.predict(&x, Variant::Sor, 0.1).unwrap();
        assert_eq!(p.y_hat, 0.0);
        assert!((p.s_yy - (1.0 + 0.01)).abs() < 1e-10);
        assert!(p.s_yy >= 0.01 - 1e-12);
    }

    #[test]
    fn fic_surcharge_is_nystrom_gap() {
        let z = inducing(1e-9);
        let b = BeliefState::new(z.clone());
        let x = [0.9, 0.95];
        let sor = b.predict(&x, Variant::Sor, 0.05).unwrap();
        let fic = b.predict(&x, Variant::Fic, 0.05).unwrap();
        let gap = z.base().k(&x, &x) - z.nystrom(&x, &x);
        assert!(gap >= -1e-10);
        assert!((fic.s_yy - sor.s_yy - gap).abs() < 1e-12);
    }

    #[test]
    fn covariance_update_ignores_measurement_value() {
        let z = inducing(1e-9);
        let b = BeliefState::new(z);
        let p = b.predict(&[0.4, 0.4], Variant::Fic, 0.05).unwrap();
        let same = b.update(&p, p.y_hat).unwrap();
        let other = b.update(&p, 3.0).unwrap();
        assert_eq!(same.mean(), b.mean());
        assert_eq!(same.covariance(), other.covariance());
        let shrink = b.covariance() - same.covariance();
        assert!(linalg::min_eigenvalue(&shrink) >= -1e-10);
        assert_eq!(
            &propagate_covariance(b.inducing(), b.covariance(), &[0.4, 0.4], Variant::Fic, 0.05).unwrap(),
            same.covariance()
        );
    }

    #[test]
    fn update_rejects_non_positive_innovation() {
        let z = inducing(1e-9);
        let b = BeliefState::new(z);
        let mut p = b.predict(&[0.4, 0.4], Variant::Sor, 0.0).unwrap();
        p.s_yy = 0.0;
        assert!(matches!(b.update(&p, 1.0), Err(Error::NumericalBreakdown(_))));
    }

    #[test]
    fn exact_observation_of_inducing_points() {
        let z = inducing(1e-12);
        let truth = [0.3, -1.2, 0.7];
        let mut b = BeliefState::new(z.clone());
        for (p, y) in z.points().iter().zip(truth) {
            b = b.observe(p, y, Variant::Sor, 0.0).unwrap();
        }
        assert!(b.covariance().amax() < 1e-6);
        for (m, t) in b.mean().iter().zip(truth) {
            assert!((m - t).abs() < 1e-6);
        }
    }

    #[test]
    fn prior_field() {
        let z = inducing(1e-9);
        let b = BeliefState::new(z.clone());
        let x = [0.1, 0.9];
        let (m, v) = b.predict_field(&x, &x, Variant::Sor).unwrap();
        assert_eq!(m, 0.0);
        assert!((v - z.nystrom(&x, &x)).abs() < 1e-8);
        let (_, v_fic) = b.predict_field(&x, &x, Variant::Fic).unwrap();
        assert!((v_fic - 1.0).abs() < 1e-8);
    }

    #[test]
    fn entropy_non_increasing_along_sequence() {
        let z = inducing(1e-9);
        let mut b = BeliefState::new(z);
        let mut last = b.entropy().unwrap();
        for i in 0..30 {
            let x = [(i as f64 * 0.37).fract(), (i as f64 * 0.61).fract()];
            b = b.observe(&x, 0.1 * i as f64, Variant::Fic, 0.05).unwrap();
            let h = b.entropy().unwrap();
            assert!(h <= last + 1e-12);
            last = h;
        }
        assert_eq!(b.steps(), 30);
    }
}
