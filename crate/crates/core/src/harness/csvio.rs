//! Trace CSV files: `k,f_gap,lyap_primal,lyap_dual`, blank when undefined.

use std::fmt::Write as _;

use crate::algorithms::TraceRecord;
use crate::error::{Error, Result};

pub const HEADER: &str = "k,f_gap,lyap_primal,lyap_dual";

/// Shortest decimal that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_trace(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in records {
        let dual = r.lyapunov_dual.map(format_number).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.k,
            format_number(r.f_gap),
            format_number(r.lyapunov_primal),
            dual
        );
    }
    out
}

fn field<'a>(fields: &[&'a str], i: usize, line: usize) -> Result<&'a str> {
    fields.get(i).map(|s| s.trim()).ok_or_else(|| Error::Parse {
        line,
        message: format!("expected 4 fields, found {}", fields.len()),
    })
}

fn number(s: &str, name: &str, line: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("bad {name} '{s}'"),
    })
}

/// Parses a trace written by [`write_trace`]. Iteration numbers must be
/// strictly increasing; a blank `f_gap` or `lyap_primal` is an error.
pub fn read_trace(text: &str) -> Result<Vec<TraceRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        Some((_, h)) => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header '{HEADER}', found '{}'", h.trim()),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
    }
    let mut out: Vec<TraceRecord> = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let k_str = field(&fields, 0, line)?;
        let k: usize = k_str.parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad iteration '{k_str}'"),
        })?;
        if let Some(prev) = out.last() {
            if k <= prev.k {
                return Err(Error::Parse {
                    line,
                    message: format!("iteration {k} does not follow {}", prev.k),
                });
            }
        }
        let f_gap = number(field(&fields, 1, line)?, "f_gap", line)?;
        let lyapunov_primal = number(field(&fields, 2, line)?, "lyap_primal", line)?;
        let dual = field(&fields, 3, line)?;
        let lyapunov_dual = if dual.is_empty() {
            None
        } else {
            Some(number(dual, "lyap_dual", line)?)
        };
        out.push(TraceRecord {
            k,
            f_gap,
            lyapunov_primal,
            lyapunov_dual,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn blank_dual_field() {
        let recs = vec![
            TraceRecord {
                k: 0,
                f_gap: 0.5,
                lyapunov_primal: 1.25,
                lyapunov_dual: None,
            },
            TraceRecord {
                k: 1,
                f_gap: -1e-17,
                lyapunov_primal: 1.0,
                lyapunov_dual: Some(0.1),
            },
        ];
        let text = write_trace(&recs);
        assert_eq!(text, "k,f_gap,lyap_primal,lyap_dual\n0,5e-1,1.25e0,\n1,-1e-17,1e0,1e-1\n");
        assert_eq!(read_trace(&text).unwrap(), recs);
    }

    #[test]
    fn errors_report_lines() {
        for (text, line) in [
            ("", 1),
            ("k,f\n", 1),
            ("k,f_gap,lyap_primal,lyap_dual\n0,1,1\n", 2),
            ("k,f_gap,lyap_primal,lyap_dual\n0,1,1,\n0,1,1,\n", 3),
            ("k,f_gap,lyap_primal,lyap_dual\n0,1,1,\n\n1,x,1,\n", 4),
            ("k,f_gap,lyap_primal,lyap_dual\n-1,1,1,\n", 2),
            ("k,f_gap,lyap_primal,lyap_dual\n0,,1,\n", 2),
        ] {
            match read_trace(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(
            gaps in proptest::collection::vec((any::<f64>(), any::<f64>(), proptest::option::of(any::<f64>())), 0..20)
        ) {
            let recs: Vec<TraceRecord> = gaps
                .into_iter()
                .enumerate()
                .filter(|(_, (a, b, c))| !a.is_nan() && !b.is_nan() && !c.is_some_and(f64::is_nan))
                .map(|(k, (f_gap, lyapunov_primal, lyapunov_dual))| TraceRecord { k, f_gap, lyapunov_primal, lyapunov_dual })
                .collect();
            let back = read_trace(&write_trace(&recs)).unwrap();
            prop_assert_eq!(back, recs);
        }
    }
}
