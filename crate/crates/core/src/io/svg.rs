//! Static SVG line plot.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
/// Points per series after decimation.
const MAX_POINTS: usize = 2000;

pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// One polyline per series on shared axes, `x` restricted to `x_max`.
pub fn line_plot(title: &str, series: &[Series], x_max: Option<f64>) -> String {
    let in_range = |x: f64| x_max.is_none_or(|m| x <= m);
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.x.iter().copied()).filter(|&x| in_range(x)));
    let (y0, y1) =
        bounds(series.iter().flat_map(|s| s.x.iter().zip(s.y).filter(|(x, _)| in_range(**x)).map(|(_, y)| *y)));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let w = &mut out;
    writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">"#).unwrap();
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(w, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{title}</text>"#, WIDTH / 2.0).unwrap();
    writeln!(
        w,
        r#"<path d="M{m},{t} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    )
    .unwrap();
    for (x, anchor, text) in [(MARGIN, "start", x0), (WIDTH - MARGIN, "end", x1)] {
        writeln!(
            w,
            r#"<text x="{x}" y="{}" text-anchor="{anchor}" font-size="12">{text:.3}</text>"#,
            HEIGHT - MARGIN + 18.0
        )
        .unwrap();
    }
    for (y, text) in [(HEIGHT - MARGIN, y0), (MARGIN, y1)] {
        writeln!(w, r#"<text x="{}" y="{y}" text-anchor="end" font-size="12">{text:.3}</text>"#, MARGIN - 6.0).unwrap();
    }
    writeln!(w, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">r</text>"#, WIDTH / 2.0, HEIGHT - 12.0)
        .unwrap();
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<(f64, f64)> =
            s.x.iter().zip(s.y).map(|(x, y)| (*x, *y)).filter(|(x, _)| in_range(*x)).collect();
        let stride = points.len().div_ceil(MAX_POINTS).max(1);
        let mut path = String::new();
        for (i, (x, y)) in points.iter().enumerate() {
            if i % stride == 0 || i + 1 == points.len() {
                write!(path, "{:.2},{:.2} ", sx(*x), sy(*y)).unwrap();
            }
        }
        writeln!(w, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.trim_end())
            .unwrap();
        let ly = MARGIN + 16.0 * k as f64;
        writeln!(w, r#"<text x="{}" y="{ly}" fill="{color}" font-size="13">{}</text>"#, WIDTH - MARGIN - 60.0, s.label)
            .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
