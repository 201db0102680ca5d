//! Positive-definite kernels, Gram assembly and the inducing-point
//! (subset-of-regressors and fully-independent-conditional) approximations.
//!
//! The base kernel is the squared exponential
//! `k(x, x') = σ² exp(-‖x - x'‖² / (2ℓ²))`. The approximate kernels are built
//! from an [`InducingSet`] `Z` through the Nyström form
//! `k̂_SoR(x, x') = k_Z(x)ᵀ K_Z⁻¹ k_Z(x')`; FIC additionally restores the
//! exact kernel whenever both arguments are the same point.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// A point of the domain, `R^D`.
pub type Point = Vec<f64>;

/// Relative jitter applied to Gram diagonals when none is given explicitly.
pub const DEFAULT_RELATIVE_JITTER: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquaredExponential {
    pub dim: usize,
    pub lengthscale: f64,
    pub signal_variance: f64,
    pub jitter: f64,
}

impl SquaredExponential {
    /// Builds a kernel with the default jitter of `1e-9 · σ²`.
    pub fn new(dim: usize, lengthscale: f64, signal_variance: f64) -> Result<Self> {
        Self::with_jitter(dim, lengthscale, signal_variance, DEFAULT_RELATIVE_JITTER * signal_variance)
    }

    pub fn with_jitter(dim: usize, lengthscale: f64, signal_variance: f64, jitter: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("kernel dimension must be at least 1".into()));
        }
        if !(lengthscale > 0.0 && lengthscale.is_finite()) {
            return Err(Error::InvalidParameter(format!("lengthscale must be positive, got {lengthscale}")));
        }
        if !(signal_variance > 0.0 && signal_variance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "signal variance must be positive, got {signal_variance}"
            )));
        }
        if !(jitter >= 0.0 && jitter.is_finite()) {
            return Err(Error::InvalidParameter(format!("jitter must be non-negative, got {jitter}")));
        }
        Ok(Self { dim, lengthscale, signal_variance, jitter })
    }

    #[inline]
    pub(crate) fn k(&self, a: &[f64], b: &[f64]) -> f64 {
        let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        self.signal_variance * (-0.5 * d2 / (self.lengthscale * self.lengthscale)).exp()
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point coordinates"));
        }
        Ok(())
    }

    pub(crate) fn gram(&self, xs: &[Point]) -> DMatrix<f64> {
        let n = xs.len();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            g[(i, i)] = self.k(&xs[i], &xs[i]);
            for j in 0..i {
                let v = self.k(&xs[i], &xs[j]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }
}

/// The inducing points `Z` with their Gram matrix and its cached factor.
#[derive(Clone, Debug)]
pub struct InducingSet {
    points: Vec<Point>,
    base: SquaredExponential,
    gram: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl InducingSet {
    pub fn new(base: SquaredExponential, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("inducing set must contain at least one point".into()));
        }
        for p in &points {
            base.check_point(p)?;
        }
        if let Some(i) = first_duplicate(&points) {
            return Err(Error::DuplicatePoints(i));
        }
        let gram = base.gram(&points);
        let chol = linalg::cholesky_jittered(&gram, base.jitter, "inducing Gram matrix")?;
        Ok(Self { points, base, gram, chol })
    }

    /// A uniform interior grid: `counts[d]` cell centres along each axis of `domain`.
    pub fn interior_grid(base: SquaredExponential, domain: &[(f64, f64)], counts: &[usize]) -> Result<Self> {
        if domain.len() != base.dim || counts.len() != base.dim {
            return Err(Error::DimensionMismatch { expected: base.dim, found: counts.len().min(domain.len()) });
        }
        let axes: Vec<Vec<f64>> = domain
            .iter()
            .zip(counts)
            .map(|(&(lo, hi), &n)| (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect())
            .collect();
        let mut points: Vec<Point> = vec![vec![]];
        for axis in &axes {
            points = points
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
        Self::new(base, points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn base(&self) -> &SquaredExponential {
        &self.base
    }

    /// `K_Z` without jitter.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Cholesky factor of `K_Z + jitter·I`.
    pub fn factor(&self) -> &Cholesky<f64, Dyn> {
        &self.chol
    }

    /// `k_Z(x)`.
    pub fn cross(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.points.len(), self.points.iter().map(|z| self.base.k(x, z)))
    }

    /// `q(x) = K_Z⁻¹ k_Z(x)`.
    pub fn weights(&self, x: &[f64]) -> DVector<f64> {
        self.chol.solve(&self.cross(x))
    }

    /// `k̂_SoR(x, x')`.
    pub fn nystrom(&self, x: &[f64], y: &[f64]) -> f64 {
        let l = self.chol.l_dirty();
        let vx = l.solve_lower_triangular(&self.cross(x)).expect("triangular factor is non-singular");
        if x == y {
            return vx.norm_squared();
        }
        let vy = l.solve_lower_triangular(&self.cross(y)).expect("triangular factor is non-singular");
        vx.dot(&vy)
    }

    /// `L⁻¹ K_{Z,X}`, so that the Nyström Gram of `X` is `VᵀV`.
    fn whitened_cross(&self, xs: &[Point]) -> DMatrix<f64> {
        let m = self.points.len();
        let mut kzx = DMatrix::zeros(m, xs.len());
        for (j, x) in xs.iter().enumerate() {
            for (i, z) in self.points.iter().enumerate() {
                kzx[(i, j)] = self.base.k(z, x);
            }
        }
        self.chol.l_dirty().solve_lower_triangular(&kzx).expect("triangular factor is non-singular")
    }
}

fn first_duplicate(points: &[Point]) -> Option<usize> {
    (0..points.len()).find(|&i| (0..i).any(|j| points[i] == points[j]))
}

/// Approximation family of a conditionally independent kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Sor,
    Fic,
}

/// A covariance function: the exact base kernel or one of its CI approximations.
#[derive(Clone, Debug)]
pub enum KernelSpec {
    Exact(SquaredExponential),
    SoR(Arc<InducingSet>),
    Fic(Arc<InducingSet>),
}

impl KernelSpec {
    pub fn approximate(variant: Variant, inducing: Arc<InducingSet>) -> Self {
        match variant {
            Variant::Sor => KernelSpec::SoR(inducing),
            Variant::Fic => KernelSpec::Fic(inducing),
        }
    }

    pub fn base(&self) -> &SquaredExponential {
        match self {
            KernelSpec::Exact(b) => b,
            KernelSpec::SoR(z) | KernelSpec::Fic(z) => z.base(),
        }
    }

    pub fn dim(&self) -> usize {
        self.base().dim
    }

    pub fn jitter(&self) -> f64 {
        self.base().jitter
    }

    pub fn inducing(&self) -> Option<&Arc<InducingSet>> {
        match self {
            KernelSpec::Exact(_) => None,
            KernelSpec::SoR(z) | KernelSpec::Fic(z) => Some(z),
        }
    }

    pub fn is_conditionally_independent(&self) -> bool {
        !matches!(self, KernelSpec::Exact(_))
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        self.base().check_point(x)
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            KernelSpec::Exact(b) => b.k(x, y),
            KernelSpec::SoR(z) => z.nystrom(x, y),
            KernelSpec::Fic(z) => {
                if x == y {
                    z.base().k(x, y)
                } else {
                    z.nystrom(x, y)
                }
            }
        }
    }

    /// `[K_X]_{ij} = k(x_i, x_j)`, without jitter.
    pub fn gram_matrix(&self, xs: &[Point]) -> Result<DMatrix<f64>> {
        if xs.is_empty() {
            return Err(Error::InvalidParameter("Gram matrix of an empty point set".into()));
        }
        for x in xs {
            self.check_point(x)?;
        }
        Ok(self.gram_unchecked(xs))
    }

    pub(crate) fn gram_unchecked(&self, xs: &[Point]) -> DMatrix<f64> {
        match self {
            KernelSpec::Exact(b) => b.gram(xs),
            KernelSpec::SoR(z) | KernelSpec::Fic(z) => {
                let v = z.whitened_cross(xs);
                let mut g = v.tr_mul(&v);
                linalg::symmetrize(&mut g);
                if let KernelSpec::Fic(_) = self {
                    for i in 0..xs.len() {
                        for j in 0..=i {
                            if xs[i] == xs[j] {
                                let exact = z.base().k(&xs[i], &xs[j]);
                                g[(i, j)] = exact;
                                g[(j, i)] = exact;
                            }
                        }
                    }
                }
                g
            }
        }
    }

    /// `[k_X(x)]_i = k(x, x_i)`.
    pub fn cross_vector(&self, xs: &[Point], x: &[f64]) -> Result<DVector<f64>> {
        self.check_point(x)?;
        for p in xs {
            self.check_point(p)?;
        }
        Ok(self.cross_unchecked(xs, x))
    }

    pub(crate) fn cross_unchecked(&self, xs: &[Point], x: &[f64]) -> DVector<f64> {
        match self {
            KernelSpec::Exact(b) => DVector::from_iterator(xs.len(), xs.iter().map(|p| b.k(x, p))),
            KernelSpec::SoR(z) | KernelSpec::Fic(z) => {
                let qx = z.weights(x);
                let fic = matches!(self, KernelSpec::Fic(_));
                DVector::from_iterator(
                    xs.len(),
                    xs.iter().map(|p| {
                        if fic && p.as_slice() == x {
                            z.base().k(x, p)
                        } else {
                            qx.dot(&z.cross(p))
                        }
                    }),
                )
            }
        }
    }

    /// Cholesky factor of `K_X + (jitter + extra_diag)·I`.
    ///
    /// Under the noise-free SoR kernel repeated locations are rejected, since
    /// the Nyström Gram matrix is then rank deficient by construction.
    pub fn factorize(&self, xs: &[Point], extra_diag: f64) -> Result<Cholesky<f64, Dyn>> {
        let g = self.gram_matrix(xs)?;
        if matches!(self, KernelSpec::SoR(_)) && extra_diag == 0.0 {
            if let Some(i) = first_duplicate(xs) {
                return Err(Error::DuplicatePoints(i));
            }
        }
        linalg::cholesky_jittered(&g, self.jitter() + extra_diag, "Gram matrix")
    }
}
