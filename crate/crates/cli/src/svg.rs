//! Minimal SVG plots.

use std::fmt::Write;

use hiersim::analysis::BoundaryPoint;

use crate::table::SweepCsvRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 90.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

// Viridis endpoints and midpoints.
const STOPS: [(f64, [u8; 3]); 5] = [
    (0.0, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.5, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.0, [253, 231, 37]),
];

fn color(v: f64) -> String {
    if !v.is_finite() {
        return "#bbbbbb".into();
    }
    let v = v.clamp(0.0, 1.0);
    let k = STOPS.iter().position(|s| s.0 >= v).unwrap_or(4).max(1);
    let ((a, ca), (b, cb)) = (STOPS[k - 1], STOPS[k]);
    let s = (v - a) / (b - a);
    let mix = |i: usize| (ca[i] as f64 + s * (cb[i] as f64 - ca[i] as f64)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(0), mix(1), mix(2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64)) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<g stroke="black" fill="none"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>
<text x="{x0}" y="{}" text-anchor="middle">{:.2}</text>
<text x="{x1}" y="{}" text-anchor="middle">{:.2}</text>
<text x="{}" y="{y0}" text-anchor="end">{:.2}</text>
<text x="{}" y="{}" text-anchor="end">{:.2}</text>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        y0 + 16.0,
        x.0,
        y0 + 16.0,
        x.1,
        x0 - 6.0,
        y.0,
        x0 - 6.0,
        y1 + 4.0,
        y.1,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label),
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label),
    );
}

/// Heat map over the Ω–N plane with the phase boundary overlaid.
/// `value` selects the plotted column. Values above 1 are rescaled by the maximum.
pub fn heat_map(
    rows: &[SweepCsvRow],
    boundary: &[BoundaryPoint],
    title: &str,
    label: &str,
    value: impl Fn(&SweepCsvRow) -> f64,
) -> String {
    let mut out = String::new();
    open(&mut out, title);

    let mut omegas: Vec<f64> = rows.iter().map(|r| r.omega).collect();
    omegas.sort_by(f64::total_cmp);
    omegas.dedup();
    let (n_lo, n_hi) = rows
        .iter()
        .fold((usize::MAX, 0), |(lo, hi), r| (lo.min(r.n), hi.max(r.n)));
    if rows.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let vmax = rows
        .iter()
        .map(&value)
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let scale = if vmax > 1.0 { vmax } else { 1.0 };

    let (w_lo, w_hi) = (omegas[0], omegas[omegas.len() - 1]);
    let w_step = if omegas.len() > 1 {
        (w_hi - w_lo) / (omegas.len() - 1) as f64
    } else {
        1.0
    };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let cell_w = plot_w / omegas.len() as f64;
    let cell_h = plot_h / (n_hi - n_lo + 1) as f64;
    let px = |omega: f64| LEFT + ((omega - w_lo) / w_step + 0.5) * cell_w;
    let py = |n: f64| HEIGHT - BOTTOM - (n - n_lo as f64 + 0.5) * cell_h;

    out.push_str("<g shape-rendering=\"crispEdges\">\n");
    for r in rows {
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            px(r.omega) - cell_w / 2.0,
            py(r.n as f64) - cell_h / 2.0,
            cell_w + 0.05,
            cell_h + 0.05,
            color(value(r) / scale)
        );
    }
    out.push_str("</g>\n");

    let points: Vec<String> = boundary
        .iter()
        .filter_map(|b| {
            b.omega
                .map(|w| format!("{:.2},{:.2}", px(w), py(b.n as f64)))
        })
        .collect();
    if !points.is_empty() {
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="red" stroke-width="2"/>"#,
            points.join(" ")
        );
    }

    axes(
        &mut out,
        "Ω / Ω₀",
        "N",
        (w_lo, w_hi),
        (n_lo as f64, n_hi as f64),
    );

    let bar_x = WIDTH - RIGHT + 20.0;
    for k in 0..50 {
        let v = k as f64 / 49.0;
        let _ = writeln!(
            out,
            r#"<rect x="{bar_x}" y="{:.2}" width="14" height="{:.2}" fill="{}"/>"#,
            HEIGHT - BOTTOM - (k + 1) as f64 * plot_h / 50.0,
            plot_h / 50.0 + 0.05,
            color(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}">{:.3}</text>
<text x="{}" y="{}">0</text>
<text x="{}" y="{}" text-anchor="middle">{}</text>
</svg>"#,
        bar_x + 18.0,
        TOP + 10.0,
        scale,
        bar_x + 18.0,
        HEIGHT - BOTTOM,
        bar_x + 7.0,
        TOP - 6.0,
        escape(label)
    );
    out
}

/// Line plot of `(x, y)` samples.
pub fn line_plot(points: &[(f64, f64)], title: &str, x_label: &str, y_label: &str) -> String {
    let mut out = String::new();
    open(&mut out, title);
    if points.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let (x_lo, x_hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.0), b.max(p.0))
        });
    let y_hi = points.iter().map(|p| p.1).fold(1.0, f64::max);
    let x_span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let px = |x: f64| LEFT + (x - x_lo) / x_span * (WIDTH - LEFT - RIGHT);
    let py = |y: f64| HEIGHT - BOTTOM - y / y_hi * (HEIGHT - TOP - BOTTOM);

    let coords: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        coords.join(" ")
    );
    axes(&mut out, x_label, y_label, (x_lo, x_hi), (0.0, y_hi));
    out.push_str("</svg>\n");
    out
}
