//! Test objectives and their smoothness constants.

use std::fmt;

use crate::error::{Error, Result};
use crate::linops::{
    dot, max_abs_entry, spectral_radius, DenseMatrix, DualVec, NormKind, PrimalVec,
    DEFAULT_POWER_MAX_ITERS, DEFAULT_POWER_TOL,
};
use crate::rng::SeededRng;

/// A differentiable convex function on the feasible set.
pub trait Objective: fmt::Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &PrimalVec) -> f64;
    fn gradient(&self, x: &PrimalVec) -> DualVec;

    fn eval_grad(&self, x: &PrimalVec) -> (f64, DualVec) {
        (self.value(x), self.gradient(x))
    }

    /// Lipschitz constant of the gradient from `primal_norm` to its dual, when known.
    fn smoothness(&self, primal_norm: NormKind) -> Option<f64>;
}

/// `f(x) = 1/2 (x - c)^T G (x - c)` with `G = B^T B`; `c = 0` unless a center is set.
#[derive(Clone, Debug)]
pub struct QuadraticObjective {
    gram: DenseMatrix,
    center: Option<PrimalVec>,
}

impl QuadraticObjective {
    pub fn from_factor(b: &DenseMatrix) -> Self {
        Self {
            gram: b.gram(),
            center: None,
        }
    }

    /// `G` must be symmetric; positive semidefiniteness is the caller's promise.
    pub fn from_gram(gram: DenseMatrix) -> Result<Self> {
        let scale = max_abs_entry(&gram).unwrap_or(0.0).max(1.0);
        let asym = gram.asymmetry()?;
        if asym > 1e-12 * scale {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        Ok(Self { gram, center: None })
    }

    /// The experiment instance: `B` with i.i.d. standard normal entries.
    pub fn random(d: usize, rng: &mut SeededRng) -> Self {
        Self::from_factor(&DenseMatrix::random_normal(d, d, rng))
    }

    pub fn with_center(mut self, center: PrimalVec) -> Result<Self> {
        if center.len() != self.gram.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.gram.rows(),
                found: center.len(),
            });
        }
        self.center = Some(center);
        Ok(self)
    }

    pub fn gram(&self) -> &DenseMatrix {
        &self.gram
    }

    pub fn center(&self) -> Option<&PrimalVec> {
        self.center.as_ref()
    }

    fn shifted(&self, x: &PrimalVec) -> Vec<f64> {
        match &self.center {
            Some(c) => x.iter().zip(c.iter()).map(|(a, b)| a - b).collect(),
            None => x.to_vec(),
        }
    }

    /// `(f(x), G (x - c))` with a dimension check.
    pub fn eval_grad_checked(&self, x: &PrimalVec) -> Result<(f64, DualVec)> {
        if x.len() != self.gram.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.gram.cols(),
                found: x.len(),
            });
        }
        Ok(self.eval_grad(x))
    }

    /// `m(G) = max |G_ij|`, the l1 -> linf operator norm of `G`.
    pub fn absolute_smoothness(&self) -> f64 {
        max_abs_entry(&self.gram).unwrap_or(0.0)
    }

    /// Spectral radius of `D(z)^{1/2} G D(z)^{1/2}`: the curvature of `f`
    /// measured against the entropy Hessian at `z`. Slightly negative
    /// components of `z` are treated as zero.
    pub fn relative_smoothness(&self, z: &PrimalVec) -> Result<f64> {
        let s: Vec<f64> = z.iter().map(|v| v.max(0.0).sqrt()).collect();
        let m = self.gram.congruence_diag(&s)?;
        spectral_radius(&m, DEFAULT_POWER_TOL, DEFAULT_POWER_MAX_ITERS)
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.gram.rows()
    }

    fn value(&self, x: &PrimalVec) -> f64 {
        let u = self.shifted(x);
        0.5 * dot(&u, &self.gram.matvec_unchecked(&u))
    }

    fn gradient(&self, x: &PrimalVec) -> DualVec {
        DualVec::new(self.gram.matvec_unchecked(&self.shifted(x)))
    }

    fn eval_grad(&self, x: &PrimalVec) -> (f64, DualVec) {
        let u = self.shifted(x);
        let g = self.gram.matvec_unchecked(&u);
        (0.5 * dot(&u, &g), DualVec::new(g))
    }

    fn smoothness(&self, primal_norm: NormKind) -> Option<f64> {
        match primal_norm {
            NormKind::L1 => Some(self.absolute_smoothness()),
            NormKind::L2 => {
                spectral_radius(&self.gram, DEFAULT_POWER_TOL, DEFAULT_POWER_MAX_ITERS).ok()
            }
            // linf -> l1 norm of G is not needed by any geometry here.
            NormKind::Linf => None,
        }
    }
}

/// `f(x) = (1/p) sum_i (x_i - 1/2)^p` on the two-dimensional simplex.
#[derive(Clone, Debug)]
pub struct PowerObjective {
    p: u32,
}

impl PowerObjective {
    pub fn new(p: u32) -> Result<Self> {
        if p == 0 || p % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "power objective needs an even positive exponent, got {p}"
            )));
        }
        Ok(Self { p })
    }

    pub fn exponent(&self) -> u32 {
        self.p
    }

    /// The minimiser over the simplex (and over R^2).
    pub fn minimizer(&self) -> PrimalVec {
        PrimalVec::new(vec![0.5, 0.5])
    }

    pub fn eval_grad_checked(&self, x: &PrimalVec) -> Result<(f64, DualVec)> {
        if x.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: x.len(),
            });
        }
        Ok(self.eval_grad(x))
    }
}

impl Objective for PowerObjective {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &PrimalVec) -> f64 {
        let p = self.p as i32;
        x.iter().map(|v| (v - 0.5).powi(p)).sum::<f64>() / self.p as f64
    }

    fn gradient(&self, x: &PrimalVec) -> DualVec {
        let q = self.p as i32 - 1;
        DualVec::new(x.iter().map(|v| (v - 0.5).powi(q)).collect())
    }

    /// Not available: the experiments with this objective use a fixed step.
    fn smoothness(&self, _primal_norm: NormKind) -> Option<f64> {
        None
    }
}

/// An objective assembled from closures.
pub struct ClosureObjective<F, G> {
    dim: usize,
    value: F,
    gradient: G,
    smoothness: Option<f64>,
}

impl<F, G> ClosureObjective<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(dim: usize, value: F, gradient: G) -> Self {
        Self {
            dim,
            value,
            gradient,
            smoothness: None,
        }
    }

    /// Declares a smoothness constant, assumed valid for every norm.
    pub fn with_smoothness(mut self, l: f64) -> Self {
        self.smoothness = Some(l);
        self
    }
}

impl<F, G> fmt::Debug for ClosureObjective<F, G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClosureObjective(d={})", self.dim)
    }
}

impl<F, G> Objective for ClosureObjective<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &PrimalVec) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &PrimalVec) -> DualVec {
        DualVec::new((self.gradient)(x))
    }
    fn smoothness(&self, _primal_norm: NormKind) -> Option<f64> {
        self.smoothness
    }
}
