use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient sequences `gamma_k` with `gamma_0 = 1` driving the accelerated methods.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GammaSchedule {
    /// `gamma_k = (1 + sqrt(1 + 4 gamma_{k-1}^2)) / 2`, equality in `gamma_k^2 - gamma_{k-1}^2 = gamma_k`.
    NesterovRecurrence,
    /// `gamma_k = (k + r) / r`.
    Linear { r: f64 },
}

impl GammaSchedule {
    pub const INITIAL: f64 = 1.0;

    /// `gamma_k` given `gamma_{k-1}`.
    pub fn next(&self, k: usize, prev: f64) -> f64 {
        match *self {
            GammaSchedule::NesterovRecurrence => 0.5 * (1.0 + (1.0 + 4.0 * prev * prev).sqrt()),
            GammaSchedule::Linear { r } => (k as f64 + r) / r,
        }
    }

    /// Schedules usable with AMD must satisfy `gamma_k^2 - gamma_{k-1}^2 - gamma_k <= 0`,
    /// which for the linear family means `r >= 2`.
    pub fn validate_for_amd(&self) -> Result<()> {
        match *self {
            GammaSchedule::NesterovRecurrence => Ok(()),
            GammaSchedule::Linear { r } if r >= 2.0 && r.is_finite() => Ok(()),
            GammaSchedule::Linear { r } => Err(Error::InvalidParameter(format!(
                "linear gamma schedule needs r >= 2 for AMD, got r = {r}"
            ))),
        }
    }

    pub fn sequence(&self) -> GammaSequence {
        GammaSequence {
            schedule: *self,
            k: 0,
            gamma: Self::INITIAL,
        }
    }
}

impl fmt::Display for GammaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaSchedule::NesterovRecurrence => f.write_str("recurrence"),
            GammaSchedule::Linear { r } => write!(f, "linear:{r}"),
        }
    }
}

impl FromStr for GammaSchedule {
    type Err = Error;

    /// `recurrence` or `linear:R` with `R > 0`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "recurrence" {
            return Ok(GammaSchedule::NesterovRecurrence);
        }
        if let Some(r) = s.strip_prefix("linear:") {
            let r: f64 = r.trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("bad r in gamma schedule '{s}'"))
            })?;
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "gamma schedule needs r > 0, got '{s}'"
                )));
            }
            return Ok(GammaSchedule::Linear { r });
        }
        Err(Error::InvalidParameter(format!(
            "unknown gamma schedule '{s}' (expected recurrence or linear:R)"
        )))
    }
}

/// A running `gamma_k` value.
#[derive(Clone, Debug)]
pub struct GammaSequence {
    schedule: GammaSchedule,
    k: usize,
    gamma: f64,
}

impl GammaSequence {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn current(&self) -> f64 {
        self.gamma
    }

    /// Advances to `gamma_{k+1}` and returns it.
    pub fn gamma_next(&mut self) -> f64 {
        self.k += 1;
        self.gamma = self.schedule.next(self.k, self.gamma);
        self.gamma
    }
}

impl Iterator for GammaSequence {
    type Item = f64;

    /// Yields `gamma_0, gamma_1, ...`.
    fn next(&mut self) -> Option<f64> {
        let out = self.gamma;
        self.gamma_next();
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn recurrence_first_values() {
        let mut s = GammaSchedule::NesterovRecurrence.sequence();
        assert_eq!(s.current(), 1.0);
        let g1 = s.gamma_next();
        assert_abs_diff_eq!(g1, (1.0 + 5f64.sqrt()) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g1, 1.61803, epsilon = 1e-5);
        let g2 = s.gamma_next();
        let expect = 0.5 * (1.0 + (1.0 + 4.0 * g1 * g1).sqrt());
        assert_eq!(g2, expect);
        assert_abs_diff_eq!(g2, 2.19353, epsilon = 1e-5);
    }

    #[test]
    fn linear_values() {
        let g: Vec<f64> = GammaSchedule::Linear { r: 2.0 }.sequence().take(4).collect();
        assert_eq!(g, vec![1.0, 1.5, 2.0, 2.5]);
    }

    #[test]
    fn recurrence_is_tight_and_linear_r2_satisfies_condition() {
        for sched in [
            GammaSchedule::NesterovRecurrence,
            GammaSchedule::Linear { r: 2.0 },
            GammaSchedule::Linear { r: 3.0 },
        ] {
            let g: Vec<f64> = sched.sequence().take(10_000).collect();
            assert_eq!(g[0], 1.0);
            for k in 1..g.len() {
                assert!(g[k] >= 1.0);
                let defect = g[k] * g[k] - g[k - 1] * g[k - 1] - g[k];
                assert!(defect <= 1e-12 * g[k] * g[k], "{sched} k={k} defect={defect}");
                if sched == GammaSchedule::NesterovRecurrence {
                    assert!(defect.abs() <= 1e-12 * g[k] * g[k]);
                }
            }
        }
    }

    #[test]
    fn linear_below_two_violates_condition() {
        let g: Vec<f64> = GammaSchedule::Linear { r: 1.5 }.sequence().take(5).collect();
        assert!(g[1] * g[1] - g[0] * g[0] - g[1] > 0.0);
        assert!(GammaSchedule::Linear { r: 1.5 }.validate_for_amd().is_err());
        assert!(GammaSchedule::Linear { r: 2.0 }.validate_for_amd().is_ok());
    }

    #[test]
    fn recurrence_grows_like_half_k() {
        let g: Vec<f64> = GammaSchedule::NesterovRecurrence.sequence().take(100_001).collect();
        let k = 100_000f64;
        let excess = g[100_000] - k / 2.0;
        // k/2 + (1/4) log k + o(log k)
        assert!((excess / k.ln() - 0.25).abs() < 0.1, "{excess}");
    }

    #[test]
    fn parse_round_trip() {
        for s in ["recurrence", "linear:3"] {
            let g: GammaSchedule = s.parse().unwrap();
            assert_eq!(g.to_string(), s);
        }
        assert!("linear:0".parse::<GammaSchedule>().is_err());
        assert!("linear:x".parse::<GammaSchedule>().is_err());
        assert!("cubic".parse::<GammaSchedule>().is_err());
    }
}
