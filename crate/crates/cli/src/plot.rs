//! Minimal self-contained SVG line charts: axes, ticks, legend, polylines.

use std::fmt::Write as _;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf",
];

fn finite_bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return None;
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return Some((lo - pad, hi + pad));
    }
    let pad = (hi - lo) * 0.05;
    Some((lo - pad, hi + pad))
}

fn tick_label(x: f64) -> String {
    let s = format!("{x:.4}");
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    if trimmed.is_empty() || trimmed == "-" {
        "0".into()
    } else {
        trimmed.into()
    }
}

/// Render a line chart of the series to an SVG document.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1) = finite_bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)))
        .unwrap_or((0.0, 1.0));
    let (y0, y1) = finite_bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)))
        .unwrap_or((0.0, 1.0));

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = move |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * plot_w;
    let sy = move |y: f64| MARGIN_T + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    );

    // Frame.
    let _ = writeln!(
        svg,
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333\"/>"
    );

    // Ticks and grid.
    let n_ticks = 5usize;
    for k in 0..=n_ticks {
        let f = k as f64 / n_ticks as f64;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let xp = sx(xv);
        let yp = sy(yv);
        let _ = writeln!(
            svg,
            "<line x1=\"{xp}\" y1=\"{}\" x2=\"{xp}\" y2=\"{}\" stroke=\"#ccc\" stroke-width=\"0.5\"/>",
            MARGIN_T,
            MARGIN_T + plot_h
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{yp}\" x2=\"{}\" y2=\"{yp}\" stroke=\"#ccc\" stroke-width=\"0.5\"/>",
            MARGIN_L,
            MARGIN_L + plot_w
        );
        let _ = writeln!(
            svg,
            "<text x=\"{xp}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            MARGIN_T + plot_h + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            MARGIN_L - 6.0,
            yp + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        escape(y_label)
    );

    // Polylines: breaks at non-finite points.
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut chunk: Vec<String> = Vec::new();
        let flush = |chunk: &mut Vec<String>, svg: &mut String| {
            if chunk.len() > 1 {
                let _ = writeln!(
                    svg,
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
                    chunk.join(" ")
                );
            }
            chunk.clear();
        };
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                chunk.push(format!("{:.2},{:.2}", sx(x), sy(y)));
            } else {
                flush(&mut chunk, &mut svg);
            }
        }
        flush(&mut chunk, &mut svg);
    }

    // Legend.
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let yp = MARGIN_T + 14.0 + 16.0 * k as f64;
        let xp = MARGIN_L + plot_w - 130.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{xp}\" y1=\"{yp}\" x2=\"{}\" y2=\"{yp}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            xp + 22.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\">{}</text>",
            xp + 28.0,
            yp + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
