//! Deterministic SVG rendering of simulation reports.
//!
//! The figure shows false discovery rate against signal strength, one facet
//! per `(m, s_frac)` cell, one polyline per `(procedure, t)` pair, and a
//! dashed horizontal reference at each target level. The output is built as a
//! plain string with fixed formatting and iteration order, so the same report
//! always renders to the same bytes.

use crate::io::MetricsRow;
use anyhow::{bail, Result};
use std::fmt::Write;

const FACET_W: f64 = 300.0;
const FACET_H: f64 = 220.0;
const MARGIN_L: f64 = 52.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 40.0;
const LEGEND_H: f64 = 26.0;

/// Fixed palette keyed by procedure name; unknown names reuse the last color.
fn procedure_color(name: &str) -> &'static str {
    match name {
        "ell" => "#1b6ca8",
        "cl" => "#c2571a",
        "q" => "#2e7d32",
        "bh" => "#6a4c93",
        _ => "#555555",
    }
}

/// Dash pattern per level index, cycling for many levels.
fn level_dash(level_index: usize) -> &'static str {
    match level_index % 3 {
        0 => "",
        1 => "6,3",
        _ => "2,3",
    }
}

fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

/// Renders the report to an SVG document string. Fails on an empty report.
pub fn render_svg(rows: &[MetricsRow]) -> Result<String> {
    if rows.is_empty() {
        bail!("cannot render an empty report");
    }

    // Facet keys ordered by first appearance; the runner emits scenarios in a
    // fixed order, so this is stable across runs.
    let mut facets: Vec<(u64, f64)> = Vec::new();
    for row in rows {
        let key = (row.m, row.s_frac);
        if !facets.contains(&key) {
            facets.push(key);
        }
    }
    let mut series: Vec<(String, f64)> = Vec::new();
    for row in rows {
        let key = (row.procedure.clone(), row.t);
        if !series.contains(&key) {
            series.push(key);
        }
    }
    let mut levels: Vec<f64> = Vec::new();
    for row in rows {
        if !levels.contains(&row.t) {
            levels.push(row.t);
        }
    }

    let ncol = facets.len().clamp(1, 3);
    let nrow = facets.len().div_ceil(ncol);
    let width = ncol as f64 * FACET_W;
    let height = nrow as f64 * FACET_H + LEGEND_H;

    let x_min = rows.iter().map(|r| r.theta0).fold(f64::INFINITY, f64::min);
    let x_max = rows
        .iter()
        .map(|r| r.theta0)
        .fold(f64::NEG_INFINITY, f64::max);
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let y_top = rows
        .iter()
        .map(|r| r.fdr_mean)
        .chain(levels.iter().copied())
        .fold(0.0f64, f64::max)
        .max(1e-3)
        * 1.15;

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"11\">",
        fmt2(width),
        fmt2(height),
        fmt2(width),
        fmt2(height)
    )?;
    writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>")?;

    for (fi, &(m, s_frac)) in facets.iter().enumerate() {
        let fx = (fi % ncol) as f64 * FACET_W;
        let fy = (fi / ncol) as f64 * FACET_H;
        let plot_x = fx + MARGIN_L;
        let plot_y = fy + MARGIN_T;
        let plot_w = FACET_W - MARGIN_L - MARGIN_R;
        let plot_h = FACET_H - MARGIN_T - MARGIN_B;
        let to_x = |v: f64| plot_x + (v - x_min) / x_span * plot_w;
        let to_y = |v: f64| plot_y + plot_h - (v / y_top).clamp(0.0, 1.0) * plot_h;

        writeln!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999\"/>",
            fmt2(plot_x),
            fmt2(plot_y),
            fmt2(plot_w),
            fmt2(plot_h)
        )?;
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-weight=\"bold\">m={m} s_frac={s_frac}</text>",
            fmt2(plot_x + plot_w / 2.0),
            fmt2(fy + 20.0)
        )?;
        // Axis extremes as tick labels.
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            fmt2(to_x(x_min)),
            fmt2(plot_y + plot_h + 16.0),
            x_min
        )?;
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            fmt2(to_x(x_max)),
            fmt2(plot_y + plot_h + 16.0),
            x_max
        )?;
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            fmt2(plot_x - 4.0),
            fmt2(to_y(0.0) + 4.0),
            0.0
        )?;
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3}</text>",
            fmt2(plot_x - 4.0),
            fmt2(to_y(y_top) + 4.0),
            y_top
        )?;
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">signal strength</text>",
            fmt2(plot_x + plot_w / 2.0),
            fmt2(plot_y + plot_h + 32.0)
        )?;

        // Target-level reference lines.
        for &t in &levels {
            if t <= y_top {
                writeln!(
                    svg,
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#777\" stroke-dasharray=\"4,4\"/>",
                    fmt2(plot_x),
                    fmt2(to_y(t)),
                    fmt2(plot_x + plot_w),
                    fmt2(to_y(t))
                )?;
            }
        }

        for (proc_name, t) in &series {
            let mut pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| {
                    r.m == m && r.s_frac == s_frac && &r.procedure == proc_name && r.t == *t
                })
                .map(|r| (r.theta0, r.fdr_mean))
                .collect();
            if pts.is_empty() {
                continue;
            }
            pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let level_index = levels.iter().position(|&l| l == *t).unwrap_or(0);
            let color = procedure_color(proc_name);
            if pts.len() > 1 {
                let path: Vec<String> = pts
                    .iter()
                    .map(|&(x, y)| format!("{},{}", fmt2(to_x(x)), fmt2(to_y(y))))
                    .collect();
                writeln!(
                    svg,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" stroke-dasharray=\"{}\"/>",
                    path.join(" "),
                    color,
                    level_dash(level_index)
                )?;
            }
            for &(x, y) in &pts {
                writeln!(
                    svg,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"2\" fill=\"{}\"/>",
                    fmt2(to_x(x)),
                    fmt2(to_y(y)),
                    color
                )?;
            }
        }
    }

    // Legend strip across the bottom.
    let mut lx = 10.0;
    let ly = nrow as f64 * FACET_H + LEGEND_H / 2.0;
    for (proc_name, t) in &series {
        let color = procedure_color(proc_name);
        writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>",
            fmt2(lx),
            fmt2(ly),
            fmt2(lx + 22.0),
            fmt2(ly),
            color
        )?;
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\">{} t={}</text>",
            fmt2(lx + 27.0),
            fmt2(ly + 4.0),
            proc_name,
            t
        )?;
        lx += 110.0;
    }
    writeln!(svg, "</svg>")?;
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<MetricsRow> {
        let mut rows = Vec::new();
        for (pi, name) in ["ell", "cl", "q"].iter().enumerate() {
            for (i, theta0) in [0.6, 0.8, 1.0].iter().enumerate() {
                rows.push(MetricsRow {
                    procedure: name.to_string(),
                    t: 0.1,
                    m: 200,
                    s_frac: 0.01,
                    theta0: *theta0,
                    replicates: 10,
                    fdr_mean: 0.02 * (pi + 1) as f64 + 0.001 * i as f64,
                    fdr_mcse: 0.001,
                    fnr_mean: 0.5,
                    fnr_mcse: 0.01,
                    risk_mean: 0.55,
                });
            }
        }
        rows
    }

    #[test]
    fn renders_deterministically() {
        let rows = sample_rows();
        let a = render_svg(&rows).unwrap();
        let b = render_svg(&rows).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert_eq!(a.matches("<polyline").count(), 3);
        // One reference line per facet per level.
        assert_eq!(a.matches("stroke-dasharray=\"4,4\"").count(), 1);
    }

    #[test]
    fn empty_report_is_an_error() {
        assert!(render_svg(&[]).is_err());
    }
}
