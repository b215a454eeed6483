//! Adaptive Dormand–Prince 5(4) integrator with dense output.

use crate::error::{Error, Result};

// Dormand–Prince coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Difference between the 5th- and 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.4 / 5.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorOptions {
    /// Used as both the absolute and the relative tolerance.
    pub tol: f64,
    pub max_steps: usize,
    /// Upper bound on the step; `None` for no bound.
    pub max_step: Option<f64>,
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            max_steps: 2_000_000,
            max_step: None,
        }
    }
}

/// Accepted steps of an integration, queryable at any time in range.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub derivatives: Vec<Vec<f64>>,
    pub rejected: usize,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory is never empty")
    }

    /// State at `t` by cubic Hermite interpolation between accepted steps.
    pub fn at(&self, t: f64) -> Result<Vec<f64>> {
        let (t0, t1) = (self.t_start(), self.t_end());
        let slack = 1e-12 * t1.abs().max(1.0);
        if !(t >= t0 - slack && t <= t1 + slack) {
            return Err(Error::InvalidParameter(format!(
                "t = {t} outside the integrated range [{t0}, {t1}]"
            )));
        }
        let i = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            n if n >= self.times.len() => self.times.len() - 2,
            n => n - 1,
        };
        if self.times.len() == 1 {
            return Ok(self.states[0].clone());
        }
        let (ta, tb) = (self.times[i], self.times[i + 1]);
        let h = tb - ta;
        let s = ((t - ta) / h).clamp(0.0, 1.0);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let (ya, yb) = (&self.states[i], &self.states[i + 1]);
        let (fa, fb) = (&self.derivatives[i], &self.derivatives[i + 1]);
        Ok((0..ya.len())
            .map(|j| h00 * ya[j] + h10 * h * fa[j] + h01 * yb[j] + h11 * h * fb[j])
            .collect())
    }
}

fn error_norm(err: &[f64], y: &[f64], y_new: &[f64], tol: f64) -> f64 {
    let n = err.len().max(1) as f64;
    let sum: f64 = err
        .iter()
        .zip(y.iter().zip(y_new))
        .map(|(e, (a, b))| {
            let sc = tol + tol * a.abs().max(b.abs());
            (e / sc) * (e / sc)
        })
        .sum();
    (sum / n).sqrt()
}

fn initial_step(
    rhs: &mut impl FnMut(f64, &[f64]) -> Result<Vec<f64>>,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    tol: f64,
    span: f64,
) -> f64 {
    let scale: Vec<f64> = y0.iter().map(|v| tol + tol * v.abs()).collect();
    let rms = |v: &[f64]| {
        (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len().max(1) as f64).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let d2 = match rhs(t0 + h0, &y1) {
        Ok(f1) => {
            let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
            rms(&diff) / h0
        }
        Err(_) => return h0 * 1e-3,
    };
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates `y' = rhs(t, y)` from `(t0, y0)` to `t1 > t0`.
///
/// A step is accepted when the embedded error estimate, measured in the RMS
/// norm with absolute and relative tolerance `tol`, is at most one. Failing
/// right-hand side evaluations inside a trial step shrink the step; an
/// error at the initial state is returned as is.
pub fn integrate(
    mut rhs: impl FnMut(f64, &[f64]) -> Result<Vec<f64>>,
    t0: f64,
    t1: f64,
    y0: &[f64],
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "integration interval [{t0}, {t1}] is empty"
        )));
    }
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let n = y0.len();
    let f0 = rhs(t0, y0)?;
    let span = t1 - t0;
    let max_step = opts.max_step.unwrap_or(span).min(span);
    let mut h = initial_step(&mut rhs, t0, y0, &f0, opts.tol, span).min(max_step);
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0.to_vec()],
        derivatives: vec![f0],
        rejected: 0,
    };
    let mut t = t0;
    let mut err_prev: f64 = 1e-4;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut y_stage = vec![0.0; n];
    let mut accepted = 0usize;

    while t < t1 {
        if accepted + traj.rejected >= opts.max_steps {
            return Err(Error::NoConvergence {
                what: "reference integrator",
                iterations: opts.max_steps,
            });
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }
        let last = t + h >= t1 - 1e-12 * t1.abs().max(1.0);
        if last {
            h = t1 - t;
        }
        let y = traj.states.last().unwrap().clone();
        k[0].clone_from(traj.derivatives.last().unwrap());
        let mut failed = false;
        for s in 1..7 {
            for j in 0..n {
                let mut acc = y[j];
                for (m, km) in k.iter().enumerate().take(s) {
                    acc += h * A[s][m] * km[j];
                }
                y_stage[j] = acc;
            }
            match rhs(t + C[s] * h, &y_stage) {
                Ok(v) => k[s] = v,
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            traj.rejected += 1;
            h *= 0.25;
            continue;
        }
        // Stage 7 is evaluated at the 5th-order solution (FSAL).
        let y_new = y_stage.clone();
        let err: Vec<f64> = (0..n)
            .map(|j| h * (0..7).map(|s| E[s] * k[s][j]).sum::<f64>())
            .collect();
        let en = error_norm(&err, &y, &y_new, opts.tol);
        if !en.is_finite() {
            traj.rejected += 1;
            h *= 0.25;
            continue;
        }
        if en <= 1.0 {
            let fac = if en == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * en.powf(-ALPHA) * err_prev.powf(BETA)).clamp(FAC_MIN, FAC_MAX)
            };
            err_prev = en.max(1e-4);
            t = if last { t1 } else { t + h };
            traj.times.push(t);
            traj.states.push(y_new);
            traj.derivatives.push(k[6].clone());
            accepted += 1;
            h = (h * fac).min(max_step);
        } else {
            traj.rejected += 1;
            h *= (SAFETY * en.powf(-ALPHA)).clamp(FAC_MIN, 1.0);
        }
    }
    Ok(traj)
}
