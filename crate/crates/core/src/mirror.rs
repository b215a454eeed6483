//! Mirror-map geometries.
//!
//! A geometry bundles the mirror map `chi = grad psi*` from E* onto the
//! relative interior of the feasible set, the primal potential `phi` whose
//! gradient is a right inverse of `chi`, and the two Bregman divergences.
//!
//! Three geometries ship: the unconstrained Euclidean space, the probability
//! simplex with the entropic map (softmax), and the unit hypercube with the
//! componentwise sigmoid. New geometries implement [`MirrorMap`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{dot, DualVec, NormKind, PrimalVec};

/// Components at or below this value count as boundary (underflowed) ones.
pub const INTERIOR_FLOOR: f64 = 1e-300;
/// Slack used by the membership predicates.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Euclidean,
    Simplex,
    Hypercube,
}

impl Geometry {
    pub fn mirror(self, d: usize) -> Box<dyn MirrorMap> {
        match self {
            Geometry::Euclidean => Box::new(EuclideanMirror::new(d)),
            Geometry::Simplex => Box::new(EntropicSimplex::new(d)),
            Geometry::Hypercube => Box::new(SigmoidHypercube::new(d)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Geometry::Euclidean => "euclidean",
            Geometry::Simplex => "simplex",
            Geometry::Hypercube => "hypercube",
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Geometry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Geometry::Euclidean),
            "simplex" => Ok(Geometry::Simplex),
            "hypercube" => Ok(Geometry::Hypercube),
            other => Err(Error::InvalidParameter(format!("unknown geometry '{other}'"))),
        }
    }
}

/// The closed convex set on which a geometry lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeasibleSet {
    pub geometry: Geometry,
    pub dim: usize,
}

impl FeasibleSet {
    /// Membership up to `tol` (sum constraint) and `tol * 1e-3` (sign constraints).
    pub fn contains_with_tol(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim || !x.iter().all(|v| v.is_finite()) {
            return false;
        }
        let neg = -1e-3 * tol;
        match self.geometry {
            Geometry::Euclidean => true,
            Geometry::Simplex => {
                (x.iter().sum::<f64>() - 1.0).abs() <= tol && x.iter().all(|&v| v >= neg)
            }
            Geometry::Hypercube => x.iter().all(|&v| v >= neg && v <= 1.0 - neg),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_with_tol(x, MEMBERSHIP_TOL)
    }

    /// Membership with every inequality constraint strictly inactive.
    pub fn in_relative_interior(&self, x: &[f64]) -> bool {
        if !self.contains(x) {
            return false;
        }
        match self.geometry {
            Geometry::Euclidean => true,
            Geometry::Simplex => x.iter().all(|&v| v > INTERIOR_FLOOR),
            Geometry::Hypercube => x
                .iter()
                .all(|&v| v > INTERIOR_FLOOR && 1.0 - v > INTERIOR_FLOOR),
        }
    }
}

/// A mirror map together with its primal potential.
pub trait MirrorMap: fmt::Debug + Send + Sync {
    fn geometry(&self) -> Geometry;
    fn dim(&self) -> usize;
    /// Norm on E; the dual norm measures gradients.
    fn primal_norm(&self) -> NormKind;
    /// Lipschitz constant of `chi` from the dual norm to the primal norm.
    fn l_chi(&self) -> f64;
    /// Dimension of the normal space (dual forms vanishing on the set's directions).
    fn normal_space_dim(&self) -> usize;

    fn chi(&self, zeta: &DualVec) -> PrimalVec;
    /// The conjugate potential `psi*`.
    fn psi_star(&self, zeta: &DualVec) -> f64;
    /// Gradient of `phi`; requires a relative-interior point.
    fn grad_phi(&self, z: &PrimalVec) -> Result<DualVec>;
    /// `D_psi*(xi, zeta)`.
    fn bregman_dual(&self, xi: &DualVec, zeta: &DualVec) -> f64;
    /// `D_phi(x, z)` for `x` in the set (boundary allowed) and interior `z`.
    fn bregman_primal(&self, x: &PrimalVec, z: &PrimalVec) -> Result<f64>;
    /// `D_phi(x, chi(zeta))`, evaluated without materialising `chi(zeta)` so that
    /// components of `chi(zeta)` too small to represent do not break it.
    fn bregman_primal_to_image(&self, x: &PrimalVec, zeta: &DualVec) -> f64;
    /// Action of the Jacobian `chi'(grad phi(z))` on `v`.
    fn chi_jacobian_at_primal(&self, z: &PrimalVec, v: &DualVec) -> PrimalVec;

    fn feasible_set(&self) -> FeasibleSet {
        FeasibleSet {
            geometry: self.geometry(),
            dim: self.dim(),
        }
    }

    fn dual_norm(&self) -> NormKind {
        self.primal_norm().dual()
    }

    /// `grad phi(chi(zeta)) - zeta`, an element of the normal space.
    fn project_normal(&self, zeta: &DualVec) -> DualVec;

    /// A dual point whose mirror image is `x0`.
    fn initial_dual(&self, x0: &PrimalVec) -> Result<DualVec> {
        self.grad_phi(x0)
    }

    /// `chi(grad phi(z) + v)`. Geometries with a multiplicative form accept
    /// boundary points `z`; their zero components stay zero.
    fn mirror_step(&self, z: &PrimalVec, v: &DualVec) -> Result<PrimalVec> {
        Ok(self.chi(&self.grad_phi(z)?.add_scaled(1.0, v)))
    }
}

fn require_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `x log(x / z)` with `0 log 0 = 0`, expressed through `log z`.
fn xlogx_over(x: f64, log_z: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * (x.ln() - log_z)
    }
}

// ---------------------------------------------------------------------------

/// `X = R^d`, `chi` the identity.
#[derive(Clone, Debug)]
pub struct EuclideanMirror {
    d: usize,
}

impl EuclideanMirror {
    pub fn new(d: usize) -> Self {
        Self { d }
    }
}

impl MirrorMap for EuclideanMirror {
    fn geometry(&self) -> Geometry {
        Geometry::Euclidean
    }
    fn dim(&self) -> usize {
        self.d
    }
    fn primal_norm(&self) -> NormKind {
        NormKind::L2
    }
    fn l_chi(&self) -> f64 {
        1.0
    }
    fn normal_space_dim(&self) -> usize {
        0
    }

    fn chi(&self, zeta: &DualVec) -> PrimalVec {
        zeta.identify_primal()
    }

    fn psi_star(&self, zeta: &DualVec) -> f64 {
        0.5 * dot(zeta, zeta)
    }

    fn grad_phi(&self, z: &PrimalVec) -> Result<DualVec> {
        require_dim(self.d, z.len())?;
        Ok(z.identify_dual())
    }

    fn bregman_dual(&self, xi: &DualVec, zeta: &DualVec) -> f64 {
        0.5 * xi.iter().zip(zeta.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    }

    fn bregman_primal(&self, x: &PrimalVec, z: &PrimalVec) -> Result<f64> {
        require_dim(self.d, z.len())?;
        require_dim(self.d, x.len())?;
        Ok(0.5 * x.iter().zip(z.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
    }

    fn bregman_primal_to_image(&self, x: &PrimalVec, zeta: &DualVec) -> f64 {
        self.bregman_dual(&x.identify_dual(), zeta)
    }

    fn chi_jacobian_at_primal(&self, _z: &PrimalVec, v: &DualVec) -> PrimalVec {
        v.identify_primal()
    }

    fn project_normal(&self, zeta: &DualVec) -> DualVec {
        DualVec::zeros(zeta.len())
    }
}

// ---------------------------------------------------------------------------

/// Probability simplex with the softmax mirror map and negative entropy.
#[derive(Clone, Debug)]
pub struct EntropicSimplex {
    d: usize,
}

impl EntropicSimplex {
    pub fn new(d: usize) -> Self {
        Self { d }
    }

    /// `(max, log sum exp(zeta - max))`.
    fn lse_parts(zeta: &[f64]) -> (f64, f64) {
        let m = zeta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = zeta.iter().map(|z| (z - m).exp()).sum();
        (m, s.ln())
    }

    /// `log chi(zeta)`, finite even where `chi(zeta)` underflows.
    pub fn log_softmax(zeta: &[f64]) -> Vec<f64> {
        let (m, ls) = Self::lse_parts(zeta);
        zeta.iter().map(|z| z - m - ls).collect()
    }
}

impl MirrorMap for EntropicSimplex {
    fn geometry(&self) -> Geometry {
        Geometry::Simplex
    }
    fn dim(&self) -> usize {
        self.d
    }
    fn primal_norm(&self) -> NormKind {
        NormKind::L1
    }
    fn l_chi(&self) -> f64 {
        1.0
    }
    fn normal_space_dim(&self) -> usize {
        1
    }

    fn chi(&self, zeta: &DualVec) -> PrimalVec {
        let m = zeta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut e: Vec<f64> = zeta.iter().map(|z| (z - m).exp()).collect();
        let s: f64 = e.iter().sum();
        e.iter_mut().for_each(|v| *v /= s);
        PrimalVec::new(e)
    }

    fn psi_star(&self, zeta: &DualVec) -> f64 {
        let (m, ls) = Self::lse_parts(zeta);
        m + ls
    }

    fn mirror_step(&self, z: &PrimalVec, v: &DualVec) -> Result<PrimalVec> {
        require_dim(self.d, z.len())?;
        require_dim(self.d, v.len())?;
        if let Some((i, w)) = z.iter().enumerate().find(|(_, &w)| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::Domain(format!("simplex point has z[{i}] = {w:e}")));
        }
        // z_i exp(v_i), normalised in log space.
        let logs: Vec<f64> = z
            .iter()
            .zip(v.iter())
            .map(|(&w, &a)| if w > 0.0 { w.ln() + a } else { f64::NEG_INFINITY })
            .collect();
        let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return Err(Error::Domain(format!("no usable mass in simplex step from {z:?}")));
        }
        let mut e: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
        let s: f64 = e.iter().sum();
        e.iter_mut().for_each(|w| *w /= s);
        Ok(PrimalVec::new(e))
    }

    fn grad_phi(&self, z: &PrimalVec) -> Result<DualVec> {
        require_dim(self.d, z.len())?;
        if let Some((i, v)) = z.iter().enumerate().find(|(_, &v)| v <= INTERIOR_FLOOR) {
            return Err(Error::Domain(format!(
                "simplex gradient of entropy needs positive components, z[{i}] = {v:e}"
            )));
        }
        Ok(DualVec::new(z.iter().map(|v| 1.0 + v.ln()).collect()))
    }

    fn bregman_dual(&self, xi: &DualVec, zeta: &DualVec) -> f64 {
        // D_psi*(xi, zeta) = KL(chi(zeta) || chi(xi)).
        let lp = Self::log_softmax(zeta);
        let lq = Self::log_softmax(xi);
        let kl: f64 = lp
            .iter()
            .zip(&lq)
            .map(|(a, b)| {
                let p = a.exp();
                if p == 0.0 {
                    0.0
                } else {
                    p * (a - b)
                }
            })
            .sum();
        kl.max(0.0)
    }

    fn bregman_primal(&self, x: &PrimalVec, z: &PrimalVec) -> Result<f64> {
        require_dim(self.d, x.len())?;
        require_dim(self.d, z.len())?;
        if let Some((i, v)) = z.iter().enumerate().find(|(_, &v)| v <= INTERIOR_FLOOR) {
            return Err(Error::Domain(format!(
                "second argument of the entropy divergence is on the boundary, z[{i}] = {v:e}"
            )));
        }
        let val: f64 = x
            .iter()
            .zip(z.iter())
            .map(|(&xi, &zi)| xlogx_over(xi, zi.ln()) - xi.max(0.0) + zi)
            .sum();
        Ok(val.max(0.0))
    }

    fn bregman_primal_to_image(&self, x: &PrimalVec, zeta: &DualVec) -> f64 {
        let lz = Self::log_softmax(zeta);
        let val: f64 = x
            .iter()
            .zip(&lz)
            .map(|(&xi, &l)| xlogx_over(xi, l) - xi.max(0.0) + l.exp())
            .sum();
        val.max(0.0)
    }

    fn chi_jacobian_at_primal(&self, z: &PrimalVec, v: &DualVec) -> PrimalVec {
        // D(z)(v - <v, z> 1)
        let c = dot(v, z);
        PrimalVec::new(z.iter().zip(v.iter()).map(|(zi, vi)| zi * (vi - c)).collect())
    }

    fn project_normal(&self, zeta: &DualVec) -> DualVec {
        let lz = Self::log_softmax(zeta);
        DualVec::new(lz.iter().zip(zeta.iter()).map(|(l, z)| 1.0 + l - z).collect())
    }
}

// ---------------------------------------------------------------------------

/// `[0, 1]^d` with the componentwise logistic map and bit entropy.
#[derive(Clone, Debug)]
pub struct SigmoidHypercube {
    d: usize,
}

impl SigmoidHypercube {
    pub fn new(d: usize) -> Self {
        Self { d }
    }
}

fn softplus(a: f64) -> f64 {
    a.max(0.0) + (-a.abs()).exp().ln_1p()
}

fn sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// `(log sigma(a), log(1 - sigma(a)))`.
fn log_sigmoid_pair(a: f64) -> (f64, f64) {
    (-softplus(-a), -softplus(a))
}

impl MirrorMap for SigmoidHypercube {
    fn geometry(&self) -> Geometry {
        Geometry::Hypercube
    }
    fn dim(&self) -> usize {
        self.d
    }
    fn primal_norm(&self) -> NormKind {
        NormKind::L2
    }
    fn l_chi(&self) -> f64 {
        0.25
    }
    fn normal_space_dim(&self) -> usize {
        0
    }

    fn chi(&self, zeta: &DualVec) -> PrimalVec {
        PrimalVec::new(zeta.iter().map(|&z| sigmoid(z)).collect())
    }

    fn psi_star(&self, zeta: &DualVec) -> f64 {
        zeta.iter().map(|&z| softplus(z)).sum()
    }

    fn mirror_step(&self, z: &PrimalVec, v: &DualVec) -> Result<PrimalVec> {
        require_dim(self.d, z.len())?;
        require_dim(self.d, v.len())?;
        z.iter()
            .zip(v.iter())
            .enumerate()
            .map(|(i, (&w, &a))| match w {
                _ if !(0.0..=1.0).contains(&w) => {
                    Err(Error::Domain(format!("hypercube point has z[{i}] = {w:e}")))
                }
                0.0 | 1.0 => Ok(w),
                _ => Ok(sigmoid(w.ln() - (-w).ln_1p() + a)),
            })
            .collect::<Result<Vec<f64>>>()
            .map(PrimalVec::new)
    }

    fn grad_phi(&self, z: &PrimalVec) -> Result<DualVec> {
        require_dim(self.d, z.len())?;
        if let Some((i, v)) = z
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v > INTERIOR_FLOOR && 1.0 - v > INTERIOR_FLOOR))
        {
            return Err(Error::Domain(format!(
                "bit-entropy gradient needs components in (0, 1), z[{i}] = {v:e}"
            )));
        }
        Ok(DualVec::new(z.iter().map(|&v| (v / (1.0 - v)).ln()).collect()))
    }

    fn bregman_dual(&self, xi: &DualVec, zeta: &DualVec) -> f64 {
        // Sum of Bernoulli KL(sigma(zeta) || sigma(xi)).
        let val: f64 = zeta
            .iter()
            .zip(xi.iter())
            .map(|(&a, &b)| {
                let (lp, l1p) = log_sigmoid_pair(a);
                let (lq, l1q) = log_sigmoid_pair(b);
                let p = lp.exp();
                let q1 = l1p.exp();
                let t1 = if p == 0.0 { 0.0 } else { p * (lp - lq) };
                let t2 = if q1 == 0.0 { 0.0 } else { q1 * (l1p - l1q) };
                t1 + t2
            })
            .sum();
        val.max(0.0)
    }

    fn bregman_primal(&self, x: &PrimalVec, z: &PrimalVec) -> Result<f64> {
        require_dim(self.d, x.len())?;
        require_dim(self.d, z.len())?;
        if let Some((i, v)) = z
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v > INTERIOR_FLOOR && 1.0 - v > INTERIOR_FLOOR))
        {
            return Err(Error::Domain(format!(
                "second argument of the bit-entropy divergence is on the boundary, z[{i}] = {v:e}"
            )));
        }
        let val: f64 = x
            .iter()
            .zip(z.iter())
            .map(|(&xi, &zi)| xlogx_over(xi, zi.ln()) + xlogx_over(1.0 - xi, (1.0 - zi).ln()))
            .sum();
        Ok(val.max(0.0))
    }

    fn bregman_primal_to_image(&self, x: &PrimalVec, zeta: &DualVec) -> f64 {
        let val: f64 = x
            .iter()
            .zip(zeta.iter())
            .map(|(&xi, &a)| {
                let (lz, l1z) = log_sigmoid_pair(a);
                xlogx_over(xi, lz) + xlogx_over(1.0 - xi, l1z)
            })
            .sum();
        val.max(0.0)
    }

    fn chi_jacobian_at_primal(&self, z: &PrimalVec, v: &DualVec) -> PrimalVec {
        PrimalVec::new(z.iter().zip(v.iter()).map(|(zi, vi)| zi * (1.0 - zi) * vi).collect())
    }

    fn project_normal(&self, zeta: &DualVec) -> DualVec {
        // The normal space of the open cube is trivial.
        DualVec::zeros(zeta.len())
    }
}
