//! Log-log SVG plots of optimality gaps.

use std::path::Path;

use plotters::prelude::*;

use crate::algorithms::TraceRecord;
use crate::error::{Error, Result};

const PALETTE: [RGBColor; 4] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
];

fn plot_err(e: impl std::fmt::Display) -> Error {
    Error::Plot(e.to_string())
}

fn positive_points(records: &[TraceRecord]) -> Vec<(f64, f64)> {
    records
        .iter()
        .filter(|r| r.k >= 1 && r.f_gap > 0.0 && r.f_gap.is_finite())
        .map(|r| (r.k as f64, r.f_gap))
        .collect()
}

/// Renders one polyline per `(label, trace)` plus guide lines of slope -1
/// and -2 through the first point of the first trace.
pub fn render_svg(traces: &[(&str, &[TraceRecord])]) -> Result<String> {
    if traces.is_empty() {
        return Err(Error::Plot("no traces to plot".into()));
    }
    let series: Vec<(&str, Vec<(f64, f64)>)> = traces
        .iter()
        .map(|(label, recs)| (*label, positive_points(recs)))
        .collect();
    let all = series.iter().flat_map(|(_, pts)| pts.iter());
    let (mut k_max, mut y_lo, mut y_hi) = (1.0f64, f64::INFINITY, 0.0f64);
    for &(k, y) in all {
        k_max = k_max.max(k);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if !y_lo.is_finite() {
        // Nothing positive to show; keep a valid empty frame.
        y_lo = 1e-16;
        y_hi = 1.0;
    }
    let (y_lo, y_hi) = (y_lo * 0.5, y_hi * 2.0);
    let k_max = k_max.max(2.0);

    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (800, 600)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .margin(20)
            .x_label_area_size(40)
            .y_label_area_size(60)
            .build_cartesian_2d((1.0..k_max).log_scale(), (y_lo..y_hi).log_scale())
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc("k")
            .y_desc("f(x_k) - f*")
            .draw()
            .map_err(plot_err)?;

        for (i, (label, pts)) in series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            chart
                .draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(2)))
                .map_err(plot_err)?
                .label(*label)
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
        }

        if let Some(&(k0, y0)) = series[0].1.first() {
            for (slope, name) in [(-1.0, "slope -1"), (-2.0, "slope -2")] {
                let n = 200;
                let guide: Vec<(f64, f64)> = (0..=n)
                    .map(|i| k0 * (k_max / k0).powf(i as f64 / n as f64))
                    .map(|k| (k, y0 * (k / k0).powf(slope)))
                    .filter(|&(_, y)| y >= y_lo && y <= y_hi)
                    .collect();
                let style = BLACK.mix(if slope == -1.0 { 0.6 } else { 0.35 });
                chart
                    .draw_series(DashedLineSeries::new(guide, 6, 4, style.into()))
                    .map_err(plot_err)?
                    .label(name)
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], style));
            }
        }

        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    Ok(svg)
}

pub fn emit_plot(traces: &[(&str, &[TraceRecord])], path: &Path) -> Result<()> {
    let svg = render_svg(traces)?;
    std::fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(n: usize) -> Vec<TraceRecord> {
        (0..=n)
            .map(|k| TraceRecord {
                k,
                f_gap: 1.0 / (1.0 + k as f64).powi(2),
                lyapunov_primal: 1.0,
                lyapunov_dual: None,
            })
            .collect()
    }

    #[test]
    fn single_trace_has_three_lines() {
        let t = trace(100);
        let svg = render_svg(&[("amd", &t)]).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("amd"));
        assert!(svg.contains("slope -1") && svg.contains("slope -2"));
        assert!(svg.matches("<polyline").count() >= 3);
    }

    #[test]
    fn empty_list_is_an_error() {
        assert!(matches!(render_svg(&[]), Err(Error::Plot(_))));
    }

    #[test]
    fn unwritable_path() {
        let t = trace(10);
        let err = emit_plot(&[("md", &t)], Path::new("/nonexistent-dir/x/plot.svg")).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
