//! Dense vectors and matrices, the primal/dual pairing, and power iteration.
//!
//! Primal points (elements of E) and dual points (elements of E*) share a
//! representation but not a type: the only sanctioned way to combine them is
//! [`pairing`]. Geometries whose spaces can be identified (Euclidean) convert
//! explicitly.

use std::fmt;
use std::ops::{Deref, Index};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Default relative tolerance for [`spectral_radius`].
pub const DEFAULT_POWER_TOL: f64 = 1e-10;
/// Default iteration cap for [`spectral_radius`].
pub const DEFAULT_POWER_MAX_ITERS: usize = 10_000;
const POWER_SEED: u64 = 0x5eed_0f_90_e7;

macro_rules! vector_newtype {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Vec<f64>);

        impl $name {
            pub fn new(entries: Vec<f64>) -> Self {
                Self(entries)
            }

            /// Like [`Self::new`] but rejects NaN and infinite entries.
            pub fn checked(entries: Vec<f64>) -> Result<Self> {
                if entries.iter().all(|v| v.is_finite()) {
                    Ok(Self(entries))
                } else {
                    Err(Error::InvalidParameter(format!(
                        "{} has non-finite entries",
                        stringify!($name)
                    )))
                }
            }

            pub fn zeros(d: usize) -> Self {
                Self(vec![0.0; d])
            }

            pub fn filled(d: usize, value: f64) -> Self {
                Self(vec![value; d])
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn as_mut_slice(&mut self) -> &mut [f64] {
                &mut self.0
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|v| v.is_finite())
            }

            /// `self + alpha * other`.
            pub fn add_scaled(&self, alpha: f64, other: &Self) -> Self {
                debug_assert_eq!(self.len(), other.len());
                Self(
                    self.0
                        .iter()
                        .zip(&other.0)
                        .map(|(a, b)| a + alpha * b)
                        .collect(),
                )
            }

            /// `self + t * (other - self)`.
            pub fn lerp(&self, other: &Self, t: f64) -> Self {
                debug_assert_eq!(self.len(), other.len());
                Self(
                    self.0
                        .iter()
                        .zip(&other.0)
                        .map(|(a, b)| a + t * (b - a))
                        .collect(),
                )
            }

            pub fn sub(&self, other: &Self) -> Self {
                self.add_scaled(-1.0, other)
            }

            pub fn scale(&self, alpha: f64) -> Self {
                Self(self.0.iter().map(|a| alpha * a).collect())
            }

            pub fn norm(&self, kind: NormKind) -> f64 {
                norm(&self.0, kind)
            }

            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.0
                    .iter()
                    .zip(&other.0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            }
        }

        impl Deref for $name {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl Index<usize> for $name {
            type Output = f64;
            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{:?}", stringify!($name), self.0)
            }
        }
    };
}

vector_newtype!(PrimalVec, "A point or direction in the primal space E.");
vector_newtype!(DualVec, "A linear form on E, i.e. an element of the dual space E*.");

impl PrimalVec {
    /// Reinterprets a primal vector as a dual one. Only meaningful for
    /// geometries where E and E* are identified.
    pub fn identify_dual(&self) -> DualVec {
        DualVec(self.0.clone())
    }
}

impl DualVec {
    /// Reinterprets a dual vector as a primal one (Euclidean identification).
    pub fn identify_primal(&self) -> PrimalVec {
        PrimalVec(self.0.clone())
    }
}

/// The norms used to measure primal and dual vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    pub fn dual(self) -> NormKind {
        match self {
            NormKind::L1 => NormKind::Linf,
            NormKind::L2 => NormKind::L2,
            NormKind::Linf => NormKind::L1,
        }
    }
}

/// The value of the linear form `zeta` at `x`.
pub fn pairing(zeta: &DualVec, x: &PrimalVec) -> Result<f64> {
    check_len(zeta.len(), x.len())?;
    Ok(dot(zeta, x))
}

pub fn norm(v: &[f64], kind: NormKind) -> f64 {
    match kind {
        NormKind::L1 => v.iter().map(|a| a.abs()).sum(),
        NormKind::L2 => v.iter().map(|a| a * a).sum::<f64>().sqrt(),
        NormKind::Linf => v.iter().fold(0.0, |m, a| m.max(a.abs())),
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix({}x{})", self.rows, self.cols)
    }
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        check_len(rows * cols, entries.len())?;
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_len(cols, r.len())?;
            entries.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.entries[i * n + i] = v;
        }
        m
    }

    /// Entries i.i.d. standard normal, drawn row by row.
    pub fn random_normal(rows: usize, cols: usize, rng: &mut SeededRng) -> Self {
        Self {
            rows,
            cols,
            entries: rng.normals(rows * cols),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        Ok(self.matvec_unchecked(x))
    }

    pub(crate) fn matvec_unchecked(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `B^T B`.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut g = DenseMatrix::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                let out = &mut g.entries[i * n..(i + 1) * n];
                for (o, &rj) in out.iter_mut().zip(row) {
                    *o += ri * rj;
                }
            }
        }
        // Exact symmetry regardless of summation order.
        for i in 0..n {
            for j in 0..i {
                let v = g.entries[i * n + j];
                g.entries[j * n + i] = v;
            }
        }
        g
    }

    /// `diag(s) M diag(s)` for a square matrix.
    pub fn congruence_diag(&self, s: &[f64]) -> Result<DenseMatrix> {
        self.require_square()?;
        check_len(self.rows, s.len())?;
        let n = self.rows;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.entries[i * n + j] *= s[i] * s[j];
            }
        }
        Ok(out)
    }

    /// Largest `|M_ij - M_ji|`.
    pub fn asymmetry(&self) -> Result<f64> {
        self.require_square()?;
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        Ok(worst)
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }
}

pub fn matvec(m: &DenseMatrix, x: &PrimalVec) -> Result<Vec<f64>> {
    m.matvec(x)
}

pub fn max_abs_entry(m: &DenseMatrix) -> Result<f64> {
    if m.entries.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    Ok(m.entries.iter().fold(0.0, |acc, v| acc.max(v.abs())))
}

/// Spectral radius of a symmetric matrix by power iteration.
///
/// The estimate at each sweep is `|M v|` for the current unit vector `v`,
/// i.e. the square root of the Rayleigh quotient of `M^2`; this converges to
/// the spectral radius even when `lambda` and `-lambda` are both dominant.
/// Iteration stops once the estimate changes by less than `tol` relatively.
pub fn spectral_radius(m: &DenseMatrix, tol: f64, max_iters: usize) -> Result<f64> {
    let scale = max_abs_entry(m)?;
    let asym = m.asymmetry()?;
    if asym > 1e-10 * scale.max(1.0) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    let n = m.rows();
    let mut rng = SeededRng::new(POWER_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| 1.0 + 0.1 * rng.normal()).collect();
    normalize(&mut v);
    let mut prev = f64::NAN;
    for _ in 0..max_iters {
        let mut w = m.matvec_unchecked(&v);
        let est = norm(&w, NormKind::L2);
        if est == 0.0 {
            return Ok(0.0);
        }
        w.iter_mut().for_each(|x| *x /= est);
        v = w;
        if (est - prev).abs() <= tol * est {
            return Ok(est);
        }
        prev = est;
    }
    Err(Error::NoConvergence {
        what: "power iteration",
        iterations: max_iters,
    })
}

fn normalize(v: &mut [f64]) {
    let n = norm(v, NormKind::L2);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}
