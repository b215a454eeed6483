//! Log-log rate estimation from a trace.

use serde::Serialize;

use crate::algorithms::TraceRecord;
use crate::error::{Error, Result};
use crate::ode::consistency::least_squares;

/// Fewest usable records accepted by [`fit_rate`].
pub const MIN_RECORDS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub k_lo: usize,
    pub k_hi: usize,
    /// Fitted exponent: `f_gap ~ C k^slope`.
    pub slope: f64,
    /// `ln C`.
    pub intercept: f64,
    /// Root-mean-square residual in natural-log units.
    pub residual: f64,
    pub used: usize,
}

/// The last decade `[k_max/10, k_max]` of a trace.
pub fn default_window(records: &[TraceRecord]) -> Option<(usize, usize)> {
    let k_max = records.iter().map(|r| r.k).max()?;
    Some(((k_max / 10).max(1), k_max))
}

/// Least-squares fit of `ln f_gap` against `ln k` over `k_lo <= k <= k_hi`,
/// using only records with `k >= 1` and `f_gap > 0`.
pub fn fit_rate(records: &[TraceRecord], window: Option<(usize, usize)>) -> Result<RateFit> {
    let (k_lo, k_hi) = match window {
        Some(w) => w,
        None => default_window(records)
            .ok_or_else(|| Error::InvalidParameter("empty trace".into()))?,
    };
    if k_lo > k_hi {
        return Err(Error::InvalidParameter(format!("empty window [{k_lo}, {k_hi}]")));
    }
    let in_window: Vec<&TraceRecord> = records
        .iter()
        .filter(|r| r.k >= k_lo.max(1) && r.k <= k_hi)
        .collect();
    let usable: Vec<&TraceRecord> = in_window
        .iter()
        .copied()
        .filter(|r| r.f_gap > 0.0 && r.f_gap.is_finite())
        .collect();
    if usable.is_empty() && !in_window.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "all gaps in [{k_lo}, {k_hi}] are nonpositive"
        )));
    }
    if usable.len() < MIN_RECORDS {
        return Err(Error::InvalidParameter(format!(
            "only {} usable records in [{k_lo}, {k_hi}], need {MIN_RECORDS}",
            usable.len()
        )));
    }
    let xs: Vec<f64> = usable.iter().map(|r| (r.k as f64).ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|r| r.f_gap.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    Ok(RateFit {
        k_lo,
        k_hi,
        slope,
        intercept,
        residual: (ss / xs.len() as f64).sqrt(),
        used: usable.len(),
    })
}
