//! Static SVG line and bar charts.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 320.0;
const PAD: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn range(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().filter(|x| x.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * PAD)
    }
}

fn open(title: &str, xlabel: &str, ylabel: &str, f: &Frame) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
    for (v, anchor, x, y) in [
        (f.x.0, "start", PAD, H - PAD + 14.0),
        (f.x.1, "end", W - PAD, H - PAD + 14.0),
    ] {
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.3}</text>"#);
    }
    for (v, y) in [(f.y.0, H - PAD), (f.y.1, PAD)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y:.1}" text-anchor="end">{v:.3}</text>"#, PAD - 4.0);
    }
    s
}

/// Polyline of `ys` against `xs`, thinned to at most 2000 points.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, xs: &[f64], ys: &[f64]) -> String {
    let f = Frame { x: range(xs), y: range(ys) };
    let mut s = open(title, xlabel, ylabel, &f);
    let stride = xs.len().div_ceil(2000).max(1);
    let points: Vec<String> = xs
        .iter()
        .zip(ys)
        .step_by(stride)
        .map(|(x, y)| format!("{:.2},{:.2}", f.px(*x), f.py(*y)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#1f5fa8" stroke-width="1"/>"##,
        points.join(" ")
    );
    s.push_str("</svg>\n");
    s
}

/// One bar per value, centered on `xs`.
pub fn bar_plot(title: &str, xlabel: &str, ylabel: &str, xs: &[f64], values: &[f64]) -> String {
    let (lo, hi) = range(xs);
    let half = if xs.len() > 1 { (hi - lo) / (xs.len() - 1) as f64 / 2.0 } else { 0.5 };
    let top = values.iter().copied().fold(0.0, f64::max);
    let f = Frame {
        x: (lo - half, hi + half),
        y: (0.0, if top > 0.0 { top } else { 1.0 }),
    };
    let mut s = open(title, xlabel, ylabel, &f);
    for (x, v) in xs.iter().zip(values) {
        let (x0, x1) = (f.px(x - half * 0.9), f.px(x + half * 0.9));
        let (y0, y1) = (f.py(*v), f.py(0.0));
        let _ = writeln!(
            s,
            r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#c0504d"/>"##,
            x1 - x0,
            y1 - y0
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn titles_are_escaped() {
        let svg = line_plot("a < b & c", "t", "v", &[0.0, 1.0], &[1.0, 1.0]);
        assert!(svg.contains("a &lt; b &amp; c"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn long_series_are_thinned() {
        let xs: Vec<f64> = (0..10_000).map(f64::from).collect();
        let svg = line_plot("x", "t", "v", &xs, &xs);
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert!(points.split(' ').count() <= 2000);
    }
}
