//! Batch GP regression, RKHS target functions, the power function and the
//! deterministic worst-case error bounds built from it.

use std::f64::consts::{E, PI};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{InducingSet, KernelSpec, Point, SquaredExponential};
use crate::linalg;

/// Variances above `-VARIANCE_CLAMP` are treated as round-off and clamped to zero.
pub const VARIANCE_CLAMP: f64 = 1e-10;

/// A finite kernel expansion `s(x) = Σ αᵢ k(x, xᵢ)`, which lies in the RKHS of `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RkhsFunction {
    kernel: SquaredExponential,
    centers: Vec<Point>,
    weights: Vec<f64>,
}

impl RkhsFunction {
    pub fn new(kernel: SquaredExponential, centers: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if centers.is_empty() || centers.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "expansion needs matching, non-empty centers ({}) and weights ({})",
                centers.len(),
                weights.len()
            )));
        }
        for c in &centers {
            kernel.check_point(c)?;
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("expansion weights"));
        }
        Ok(Self { kernel, centers, weights })
    }

    /// `m` centres uniform on the box `domain`, weights standard normal.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        kernel: SquaredExponential,
        m: usize,
        domain: &[(f64, f64)],
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("expansion needs at least one center".into()));
        }
        if domain.len() != kernel.dim {
            return Err(Error::DimensionMismatch { expected: kernel.dim, found: domain.len() });
        }
        let centers: Vec<Point> = (0..m)
            .map(|_| domain.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect())
            .collect();
        let weights: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        Self::new(kernel, centers, weights)
    }

    pub fn kernel(&self) -> &SquaredExponential {
        &self.kernel
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.centers.iter().zip(&self.weights).map(|(c, a)| a * self.kernel.k(x, c)).sum()
    }

    /// `‖s‖² = αᵀ K α`.
    pub fn rkhs_norm_squared(&self) -> f64 {
        let g = self.kernel.gram(&self.centers);
        let a = DVector::from_column_slice(&self.weights);
        a.dot(&(&g * &a)).max(0.0)
    }

    pub fn rkhs_norm(&self) -> f64 {
        self.rkhs_norm_squared().sqrt()
    }
}

/// Measurement locations `X`, values `y_X` and the noise bound `σ_ε`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub locations: Vec<Point>,
    pub values: Vec<f64>,
    pub noise_bound: f64,
}

impl Dataset {
    pub fn new(locations: Vec<Point>, values: Vec<f64>, noise_bound: f64) -> Result<Self> {
        if locations.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: locations.len(), found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("measurement values"));
        }
        if !(noise_bound >= 0.0 && noise_bound.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise bound must be non-negative, got {noise_bound}")));
        }
        Ok(Self { locations, values, noise_bound })
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }
}

/// Factorized Gram matrix of a set of locations; empty sets are allowed and
/// behave like the prior.
#[derive(Clone, Debug)]
struct Factored {
    kernel: KernelSpec,
    locations: Vec<Point>,
    chol: Option<Cholesky<f64, Dyn>>,
}

impl Factored {
    fn new(kernel: &KernelSpec, locations: &[Point], extra_diag: f64) -> Result<Self> {
        let chol = if locations.is_empty() { None } else { Some(kernel.factorize(locations, extra_diag)?) };
        Ok(Self { kernel: kernel.clone(), locations: locations.to_vec(), chol })
    }

    /// `(k_X(x), L⁻¹ k_X(x))`.
    fn whitened(&self, x: &[f64]) -> Option<(DVector<f64>, DVector<f64>)> {
        let chol = self.chol.as_ref()?;
        let kx = self.kernel.cross_unchecked(&self.locations, x);
        let v = chol.l_dirty().solve_lower_triangular(&kx).expect("non-singular factor");
        Some((kx, v))
    }

    fn variance(&self, x: &[f64]) -> f64 {
        let prior = self.kernel.eval_unchecked(x, x);
        match self.whitened(x) {
            None => prior,
            Some((_, v)) => prior - v.norm_squared(),
        }
    }
}

/// Posterior mean and covariance functions after batch conditioning.
#[derive(Clone, Debug)]
pub struct Posterior {
    gram: Factored,
    alpha: DVector<f64>,
}

impl Posterior {
    pub fn kernel(&self) -> &KernelSpec {
        &self.gram.kernel
    }

    /// `μ(x | y_X) = k_X(x)ᵀ K_X⁻¹ y_X`.
    pub fn mean(&self, x: &[f64]) -> Result<f64> {
        self.gram.kernel.check_point(x)?;
        if self.gram.locations.is_empty() {
            return Ok(0.0);
        }
        Ok(self.gram.kernel.cross_unchecked(&self.gram.locations, x).dot(&self.alpha))
    }

    /// `σ²(x, x' | y_X) = k(x, x') - k_X(x)ᵀ K_X⁻¹ k_X(x')`.
    pub fn covariance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let k = &self.gram.kernel;
        let prior = k.eval(x, y)?;
        let Some(chol) = &self.gram.chol else { return Ok(prior) };
        let kx = k.cross_unchecked(&self.gram.locations, x);
        let ky = k.cross_unchecked(&self.gram.locations, y);
        Ok(prior - kx.dot(&chol.solve(&ky)))
    }

    pub fn variance(&self, x: &[f64]) -> Result<f64> {
        self.gram.kernel.check_point(x)?;
        Ok(self.gram.variance(x))
    }

    /// Posterior standard deviation with round-off negatives clamped.
    pub fn std_dev(&self, x: &[f64]) -> Result<f64> {
        Ok(clamp_variance(self.variance(x)?).sqrt())
    }
}

fn clamp_variance(v: f64) -> f64 {
    if (-VARIANCE_CLAMP..0.0).contains(&v) {
        0.0
    } else {
        v.max(0.0)
    }
}

/// Conditions the zero-mean GP on `data`. With `noise_on_diag` the Gram matrix
/// is `K_X + σ_ε² I`; otherwise the noise-free interpolation form is used.
pub fn batch_regress(data: &Dataset, kernel: &KernelSpec, noise_on_diag: bool) -> Result<Posterior> {
    for x in &data.locations {
        kernel.check_point(x)?;
    }
    let extra = if noise_on_diag { data.noise_bound * data.noise_bound } else { 0.0 };
    let gram = Factored::new(kernel, &data.locations, extra)?;
    let alpha = match &gram.chol {
        None => DVector::zeros(0),
        Some(c) => c.solve(&DVector::from_column_slice(&data.values)),
    };
    Ok(Posterior { gram, alpha })
}

/// Power function and noise-amplification factor of a fixed location set.
///
/// Reuses one factorization across many query points.
#[derive(Clone, Debug)]
pub struct PowerFunction {
    gram: Factored,
}

impl PowerFunction {
    pub fn new(locations: &[Point], kernel: &KernelSpec) -> Result<Self> {
        Ok(Self { gram: Factored::new(kernel, locations, 0.0)? })
    }

    pub fn len(&self) -> usize {
        self.gram.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gram.locations.is_empty()
    }

    /// `P_X(x) = √σ²(x, x | y_X)`.
    pub fn power(&self, x: &[f64]) -> Result<f64> {
        self.gram.kernel.check_point(x)?;
        Ok(clamp_variance(self.gram.variance(x)).sqrt())
    }

    /// `Λ(x) = ‖K_X⁻¹ k_X(x)‖`, zero for an empty set.
    pub fn lambda(&self, x: &[f64]) -> Result<f64> {
        self.gram.kernel.check_point(x)?;
        let Some(chol) = &self.gram.chol else { return Ok(0.0) };
        let kx = self.gram.kernel.cross_unchecked(&self.gram.locations, x);
        Ok(chol.solve(&kx).norm())
    }

    /// `‖s‖ P_X(x) + √(σ_ε² N Λ²(x))`.
    pub fn error_bound(&self, s_norm: f64, noise_bound: f64, x: &[f64]) -> Result<f64> {
        if !(s_norm >= 0.0) {
            return Err(Error::InvalidParameter(format!("RKHS norm must be non-negative, got {s_norm}")));
        }
        let n = self.len() as f64;
        let lambda = self.lambda(x)?;
        Ok(s_norm * self.power(x)? + (noise_bound * noise_bound * n * lambda * lambda).sqrt())
    }
}

pub fn power_function(locations: &[Point], kernel: &KernelSpec, x: &[f64]) -> Result<f64> {
    PowerFunction::new(locations, kernel)?.power(x)
}

pub fn lambda_factor(locations: &[Point], kernel: &KernelSpec, x: &[f64]) -> Result<f64> {
    PowerFunction::new(locations, kernel)?.lambda(x)
}

/// Deterministic worst-case error bound for `s` with RKHS norm `s_norm`,
/// measured at `data` with noise strictly inside `±σ_ε`.
pub fn worst_case_bound(s_norm: f64, data: &Dataset, kernel: &KernelSpec, x: &[f64]) -> Result<f64> {
    PowerFunction::new(&data.locations, kernel)?.error_bound(s_norm, data.noise_bound, x)
}

/// Differential entropy of the inducing values given measurements at `xs`:
/// `½ log((2πe)^M det K_{Z∪X} / det K_X)`.
///
/// The inducing block and the inducing/measurement cross block use the base
/// kernel, which is what the approximate kernels reproduce there; the
/// measurement block uses `kernel`. Every diagonal entry carries the kernel
/// jitter, and the measurement block additionally carries `noise_var`.
pub fn posterior_entropy_inducing(
    xs: &[Point],
    inducing: &InducingSet,
    kernel: &KernelSpec,
    noise_var: f64,
) -> Result<f64> {
    let m = inducing.len();
    let n = xs.len();
    let jitter = kernel.jitter();
    let base = inducing.base();
    let kx = if xs.is_empty() { DMatrix::zeros(0, 0) } else { kernel.gram_matrix(xs)? };
    let mut joint = DMatrix::zeros(m + n, m + n);
    joint.view_mut((0, 0), (m, m)).copy_from(inducing.gram());
    joint.view_mut((m, m), (n, n)).copy_from(&kx);
    for (i, z) in inducing.points().iter().enumerate() {
        for (j, x) in xs.iter().enumerate() {
            let v = base.k(z, x);
            joint[(i, m + j)] = v;
            joint[(m + j, i)] = v;
        }
    }
    for i in 0..m + n {
        joint[(i, i)] += if i < m { jitter } else { jitter + noise_var };
    }
    let joint_chol = linalg::cholesky_jittered(&joint, 0.0, "joint inducing/measurement Gram")?;
    let log_ratio = if xs.is_empty() {
        linalg::log_det(&joint_chol)
    } else {
        let cx = linalg::cholesky_jittered(&kx, jitter + noise_var, "measurement Gram")?;
        linalg::log_det(&joint_chol) - linalg::log_det(&cx)
    };
    Ok(0.5 * (m as f64 * (2.0 * PI * E).ln() + log_ratio))
}

/// Error bound through the inducing points:
/// `‖s‖ P_Z(x) exp H(y_Z | y_X) + √(σ_ε² N Λ²(x))`.
pub fn worst_case_bound_inducing(s_norm: f64, data: &Dataset, kernel: &KernelSpec, x: &[f64]) -> Result<f64> {
    let inducing = kernel.inducing().ok_or(Error::NotConditionallyIndependent)?;
    let p_z = power_function(inducing.points(), kernel, x)?;
    let h = posterior_entropy_inducing(&data.locations, inducing, kernel, 0.0)?;
    let n = data.len() as f64;
    let lambda = lambda_factor(&data.locations, kernel, x)?;
    Ok(s_norm * p_z * h.exp() + (data.noise_bound * data.noise_bound * n * lambda * lambda).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn se(dim: usize, jitter: f64) -> SquaredExponential {
        SquaredExponential::with_jitter(dim, 0.25, 1.0, jitter).unwrap()
    }

    fn pts(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Point> {
        (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect()
    }

    #[test]
    fn single_measurement_interpolated() {
        let k = KernelSpec::Exact(se(1, 0.0));
        let d = Dataset::new(vec![vec![0.3]], vec![1.7], 0.0).unwrap();
        let post = batch_regress(&d, &k, false).unwrap();
        assert!((post.mean(&[0.3]).unwrap() - 1.7).abs() < 1e-9);
        assert!(post.variance(&[0.3]).unwrap().abs() < 1e-9);
    }

    #[test]
    fn empty_dataset_recovers_prior() {
        let k = KernelSpec::Exact(se(2, 1e-9));
        let post = batch_regress(&Dataset::default(), &k, false).unwrap();
        assert_eq!(post.mean(&[0.1, 0.2]).unwrap(), 0.0);
        assert_eq!(post.variance(&[0.1, 0.2]).unwrap(), 1.0);
        assert_eq!(power_function(&[], &k, &[0.1, 0.2]).unwrap(), 1.0);
        assert_eq!(lambda_factor(&[], &k, &[0.1, 0.2]).unwrap(), 0.0);
        let b = worst_case_bound(2.5, &Dataset::default(), &k, &[0.1, 0.2]).unwrap();
        assert!((b - 2.5).abs() < 1e-15);
    }

    #[test]
    fn regression_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let k = KernelSpec::Exact(se(1, 1e-9));
        let xs: Vec<Point> = (0..6).map(|i| vec![(i as f64 + 0.3 * rng.random::<f64>()) / 5.0]).collect();
        let ys: Vec<f64> = (0..6).map(|_| rng.random::<f64>() - 0.5).collect();
        let data = Dataset::new(xs.clone(), ys.clone(), 0.0).unwrap();
        let post = batch_regress(&data, &k, false).unwrap();
        let mut g = k.gram_matrix(&xs).unwrap();
        g += DMatrix::identity(6, 6) * 1e-9;
        let lu = g.clone().lu();
        for q in [0.05, 0.41, 0.93] {
            let kx = k.cross_vector(&xs, &[q]).unwrap();
            let w = lu.solve(&kx).unwrap();
            let mean = w.dot(&DVector::from_vec(ys.clone()));
            let var = 1.0 - kx.dot(&w);
            assert!((post.mean(&[q]).unwrap() - mean).abs() < 1e-10);
            assert!((post.variance(&[q]).unwrap() - var).abs() < 1e-10);
        }
    }

    #[test]
    fn noise_on_diagonal_smooths() {
        let k = KernelSpec::Exact(se(1, 1e-9));
        let d = Dataset::new(vec![vec![0.5]], vec![1.0], 1.0).unwrap();
        let post = batch_regress(&d, &k, true).unwrap();
        assert!((post.mean(&[0.5]).unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn power_vanishes_on_data() {
        let k = KernelSpec::Exact(se(1, 0.0));
        let xs = vec![vec![0.1], vec![0.5], vec![0.8]];
        for x in &xs {
            assert!(power_function(&xs, &k, x).unwrap() < 1e-6);
        }
    }

    #[test]
    fn lambda_for_single_point() {
        let k = KernelSpec::Exact(se(1, 0.0));
        assert!((lambda_factor(&[vec![0.4]], &k, &[0.4]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_matches_explicit_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k = KernelSpec::Exact(se(2, 1e-9));
        let xs = pts(&mut rng, 7, 2);
        let mut g = k.gram_matrix(&xs).unwrap();
        g += DMatrix::identity(7, 7) * 1e-9;
        let inv = g.try_inverse().unwrap();
        for _ in 0..5 {
            let x: Point = vec![rng.random(), rng.random()];
            let oracle = (&inv * k.cross_vector(&xs, &x).unwrap()).norm();
            let got = lambda_factor(&xs, &k, &x).unwrap();
            assert!((got - oracle).abs() < 1e-10 * oracle.max(1.0));
        }
    }

    #[test]
    fn bound_vanishes_on_data_without_noise() {
        let k = KernelSpec::Exact(se(1, 1e-12));
        let d = Dataset::new(vec![vec![0.2], vec![0.6]], vec![0.1, -0.3], 0.0).unwrap();
        assert!(worst_case_bound(3.0, &d, &k, &[0.6]).unwrap() < 1e-5);
    }

    #[test]
    fn determinant_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for d in [1, 2] {
            let k = KernelSpec::Exact(se(d, 0.0));
            for _ in 0..20 {
                let xs = pts(&mut rng, 5, d);
                let x: Point = (0..d).map(|_| rng.random()).collect();
                let mut all = xs.clone();
                all.push(x.clone());
                let num = k.gram_matrix(&all).unwrap().determinant();
                let den = k.gram_matrix(&xs).unwrap().determinant();
                let oracle = (num / den).sqrt();
                let p = power_function(&xs, &k, &x).unwrap();
                assert!((p - oracle).abs() <= 1e-6 * oracle, "{p} vs {oracle}");
            }
        }
    }

    #[test]
    fn rkhs_norm_single_center() {
        let f = RkhsFunction::new(SquaredExponential::new(2, 0.3, 4.0).unwrap(), vec![vec![0.5, 0.5]], vec![1.0])
            .unwrap();
        assert_eq!(f.eval(&[0.5, 0.5]), 4.0);
        assert!((f.rkhs_norm() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rkhs_norm_matches_reproducing_expansion() {
        // ⟨s, s⟩ = Σ_i α_i s(x_i) by the reproducing property.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for m in 1..=4 {
            let f = RkhsFunction::random(&mut rng, se(1, 0.0), m, &[(0.0, 1.0)]).unwrap();
            let inner: f64 = f.centers().iter().zip(f.weights()).map(|(c, a)| a * f.eval(c)).sum();
            assert!((f.rkhs_norm_squared() - inner).abs() < 1e-12);
        }
    }

    #[test]
    fn inducing_bound_rejects_exact_kernel() {
        let k = KernelSpec::Exact(se(1, 1e-9));
        let d = Dataset::new(vec![vec![0.2]], vec![0.0], 0.0).unwrap();
        assert!(matches!(worst_case_bound_inducing(1.0, &d, &k, &[0.1]), Err(Error::NotConditionallyIndependent)));
    }

    #[test]
    fn inducing_bound_zero_at_observed_inducing_point() {
        let base = se(1, 1e-12);
        let z = Arc::new(InducingSet::new(base, vec![vec![0.4]]).unwrap());
        let k = KernelSpec::SoR(z);
        let d = Dataset::new(vec![vec![0.4]], vec![0.3], 0.0).unwrap();
        assert!(worst_case_bound_inducing(2.0, &d, &k, &[0.4]).unwrap() < 1e-5);
    }

    #[test]
    fn unconditional_inducing_entropy() {
        let base = se(1, 1e-9);
        let z = InducingSet::new(base, vec![vec![0.1], vec![0.5], vec![0.7]]).unwrap();
        let k = KernelSpec::SoR(Arc::new(z.clone()));
        let h = posterior_entropy_inducing(&[], &z, &k, 0.0).unwrap();
        let c = linalg::cholesky_jittered(z.gram(), 1e-9, "t").unwrap();
        let oracle = 0.5 * (3.0 * (2.0 * PI * E).ln() + linalg::log_det(&c));
        assert!((h - oracle).abs() < 1e-12);
    }

    #[test]
    fn lower_sandwich_for_fic() {
        // P_Z(x) ≤ P_X(x) for queries off the measurement set.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let base = se(2, 1e-10);
            let z = Arc::new(InducingSet::new(base, pts(&mut rng, 4, 2)).unwrap());
            let k = KernelSpec::Fic(z.clone());
            let xs = pts(&mut rng, 6, 2);
            let x: Point = vec![rng.random(), rng.random()];
            let pz = power_function(z.points(), &k, &x).unwrap();
            let px = power_function(&xs, &k, &x).unwrap();
            assert!(pz <= px + 1e-8, "{pz} > {px}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn interpolates_noise_free(seed in any::<u64>(), n in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = KernelSpec::Exact(se(1, 1e-12));
            let xs: Vec<Point> = (0..n).map(|i| vec![(i as f64 + rng.random::<f64>() * 0.5) / n as f64]).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let post = batch_regress(&Dataset::new(xs.clone(), ys.clone(), 0.0).unwrap(), &k, false).unwrap();
            for (x, y) in xs.iter().zip(&ys) {
                prop_assert!((post.mean(x).unwrap() - y).abs() < 1e-8);
            }
        }

        #[test]
        fn variance_monotone_in_data(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = KernelSpec::Exact(se(2, 1e-9));
            let xs = pts(&mut rng, 4, 2);
            let extra: Point = vec![rng.random(), rng.random()];
            let mut more = xs.clone();
            more.push(extra);
            let before = PowerFunction::new(&xs, &k).unwrap();
            let after = PowerFunction::new(&more, &k).unwrap();
            for _ in 0..10 {
                let q: Point = vec![rng.random(), rng.random()];
                prop_assert!(after.gram.variance(&q) <= before.gram.variance(&q) + 1e-10);
            }
        }

        #[test]
        fn posterior_variance_never_negative(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let base = se(2, 1e-9);
            let z = Arc::new(InducingSet::new(base, pts(&mut rng, 3, 2)).unwrap());
            for k in [KernelSpec::Exact(base), KernelSpec::Fic(z.clone())] {
                let xs = pts(&mut rng, 5, 2);
                let post = batch_regress(&Dataset::new(xs.clone(), vec![0.0; 5], 0.0).unwrap(), &k, false).unwrap();
                for x in xs.iter().chain(pts(&mut rng, 5, 2).iter()) {
                    prop_assert!(post.variance(x).unwrap() >= -1e-10);
                }
            }
        }

        #[test]
        fn inducing_entropy_decreases_with_data(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let base = se(2, 1e-9);
            let z = Arc::new(InducingSet::new(base, pts(&mut rng, 4, 2)).unwrap());
            let k = KernelSpec::Fic(z.clone());
            let mut xs = pts(&mut rng, 3, 2);
            let h0 = posterior_entropy_inducing(&xs, &z, &k, 0.01).unwrap();
            xs.push(vec![rng.random(), rng.random()]);
            let h1 = posterior_entropy_inducing(&xs, &z, &k, 0.01).unwrap();
            prop_assert!(h1 <= h0 + 1e-9);
        }
    }
}
