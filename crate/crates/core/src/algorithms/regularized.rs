//! The proximal subproblem of the regularised accelerated method:
//! `argmin_{x in X} tau <g, x> + R(x, y)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{DualVec, PrimalVec};
use crate::mirror::{Geometry, MirrorMap};

/// Bisection stops once the simplex constraint holds to this accuracy.
pub const BISECTION_TOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularizer {
    /// `R(x, y) = 1/2 |x - y|_2^2` on `R^d`.
    Euclidean,
    /// `R(x, y) = sum_i (x_i + eps) log((x_i + eps) / (y_i + eps))` on the simplex.
    ShiftedEntropy { eps: f64 },
}

impl Regularizer {
    /// `(l_R, L_R)` with `l_R/2 |x-y|^2 <= R(x,y) <= L_R/2 |x-y|^2` in the
    /// geometry's primal norm (l1 on the simplex of dimension `d`).
    pub fn bounds(&self, d: usize) -> (f64, f64) {
        match *self {
            Regularizer::Euclidean => (1.0, 1.0),
            // Pinsker for measures of mass 1 + d eps below; KL <= chi^2 above.
            Regularizer::ShiftedEntropy { eps } => (1.0 / (1.0 + d as f64 * eps), 2.0 / eps),
        }
    }

    pub fn value(&self, x: &PrimalVec, y: &PrimalVec) -> f64 {
        match *self {
            Regularizer::Euclidean => {
                0.5 * x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            }
            Regularizer::ShiftedEntropy { eps } => x
                .iter()
                .zip(y.iter())
                .map(|(&a, &b)| (a + eps) * ((a + eps) / (b + eps)).ln())
                .sum(),
        }
    }

    fn check_geometry(&self, geometry: Geometry) -> Result<()> {
        match (self, geometry) {
            (Regularizer::Euclidean, Geometry::Euclidean)
            | (Regularizer::ShiftedEntropy { .. }, Geometry::Simplex) => Ok(()),
            _ => Err(Error::InvalidParameter(format!(
                "regularizer {self:?} is not supported on the {geometry} geometry"
            ))),
        }
    }
}

/// Minimiser of `tau <g, x> + R(x, y)` over the geometry's feasible set.
///
/// For the shifted entropy on the simplex the optimality conditions give
/// `x_i = max(0, (y_i + eps) exp(-tau g_i - nu) - eps)` for a scalar `nu`
/// making the entries sum to one. `nu` is located by bisection; once the
/// active set is known `nu` follows in closed form.
pub fn regularized_argmin(
    reg: &Regularizer,
    map: &dyn MirrorMap,
    g: &DualVec,
    y: &PrimalVec,
    tau: f64,
) -> Result<PrimalVec> {
    reg.check_geometry(map.geometry())?;
    if g.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: g.len(),
        });
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::BracketFailure(format!("step tau = {tau} must be positive")));
    }
    match *reg {
        Regularizer::Euclidean => Ok(y.add_scaled(-tau, &g.identify_primal())),
        Regularizer::ShiftedEntropy { eps } => shifted_entropy_argmin(g, y, tau, eps),
    }
}

fn shifted_entropy_argmin(g: &DualVec, y: &PrimalVec, tau: f64, eps: f64) -> Result<PrimalVec> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::BracketFailure(format!("eps = {eps} must be positive")));
    }
    // log of the unconstrained minimiser shifted by eps: a_i - nu.
    let a: Vec<f64> = y
        .iter()
        .zip(g.iter())
        .map(|(&yi, &gi)| (yi.max(0.0) + eps).ln() - tau * gi)
        .collect();
    if a.is_empty() || !a.iter().all(|v| v.is_finite()) {
        return Err(Error::BracketFailure(
            "non-finite gradient or point".to_string(),
        ));
    }
    let amax = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mass = |nu: f64| -> f64 { a.iter().map(|ai| ((ai - nu).exp() - eps).max(0.0)).sum() };

    // At nu_lo the largest entry alone exceeds one (by a margin, so that a
    // vertex solution stays bracketed under rounding); at nu_hi every entry is zero.
    let mut lo = amax - (1.0 + eps).ln() - 1.0;
    let mut hi = amax - eps.ln();
    if !(mass(lo) >= 1.0 && mass(hi) <= 1.0) {
        return Err(Error::BracketFailure(format!(
            "mass({lo:e}) = {:e}, mass({hi:e}) = {:e}",
            mass(lo),
            mass(hi)
        )));
    }
    let mut nu = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTIONS {
        nu = 0.5 * (lo + hi);
        let m = mass(nu);
        if (m - 1.0).abs() <= BISECTION_TOL {
            break;
        }
        if m > 1.0 {
            lo = nu;
        } else {
            hi = nu;
        }
        if hi - lo <= f64::EPSILON * nu.abs().max(1.0) {
            break;
        }
    }

    // Closed form on the active set: sum_{i in S} (e^{a_i - nu} - eps) = 1.
    let active: Vec<usize> = (0..a.len()).filter(|&i| a[i] - nu > eps.ln()).collect();
    if !active.is_empty() {
        let m = active.iter().map(|&i| a[i]).fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = active.iter().map(|&i| (a[i] - m).exp()).sum();
        let exact = m + s.ln() - (1.0 + active.len() as f64 * eps).ln();
        // Accept only if the active set is self-consistent.
        let consistent = (0..a.len()).all(|i| (a[i] - exact > eps.ln()) == active.contains(&i));
        if consistent {
            nu = exact;
        }
    }
    let x: Vec<f64> = a.iter().map(|ai| ((ai - nu).exp() - eps).max(0.0)).collect();
    let total: f64 = x.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::NoConvergence {
            what: "regularized argmin bisection",
            iterations: MAX_BISECTIONS,
        });
    }
    Ok(PrimalVec::new(x))
}
