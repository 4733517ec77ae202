use std::fmt::Write;

use super::ScalingSummary;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
/// Label, achieved points and predicted points in log10 coordinates.
type Series = (String, Vec<(f64, f64)>, Vec<(f64, f64)>);

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Static log-log line chart of median achieved (solid) and predicted (dashed) values against `n`.
pub fn render_svg(summary: &ScalingSummary) -> String {
    let series: Vec<Series> = summary
        .groups
        .iter()
        .map(|g| {
            let pick = |f: fn(&super::PointSummary) -> f64| {
                g.points
                    .iter()
                    .filter(|p| f(p) > 0.0)
                    .map(|p| ((p.n as f64).log10(), f(p).log10()))
                    .collect::<Vec<_>>()
            };
            (
                format!("k={} {}", g.k, g.regime),
                pick(|p| p.achieved_median),
                pick(|p| p.predicted_median),
            )
        })
        .collect();
    let all = series.iter().flat_map(|(_, a, b)| a.iter().chain(b));
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !x0.is_finite() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">no data</text></svg>"#,
            WIDTH / 2.0,
            HEIGHT / 2.0
        );
        return svg;
    }
    // pad degenerate ranges to whole decades around the data
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{l},{t} V{b} H{r}" stroke="black" fill="none"/>"#,
        l = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for d in x0 as i32..=x1 as i32 {
        let x = sx(d as f64);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">1e{d}</text>"#,
            HEIGHT - MARGIN + 18.0
        );
    }
    for d in y0 as i32..=y1 as i32 {
        let y = sy(d as f64);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">1e{d}</text>"#,
            MARGIN - 6.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">n</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    for (i, (label, achieved, predicted)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for (points, dash) in [(achieved, ""), (predicted, r#" stroke-dasharray="6,4""#)] {
            if points.is_empty() {
                continue;
            }
            let path: Vec<String> = points
                .iter()
                .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="2"{dash}/>"#,
                path.join(" ")
            );
        }
        for &(x, y) in achieved {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{label}: achieved (solid), predicted (dashed)</text>"#,
            MARGIN + 10.0,
            MARGIN - 30.0 + 14.0 * i as f64
        );
    }
    svg.push_str("</svg>\n");
    svg
}
