//! Minimal SVG line charts.

use std::fmt::Write;

/// One chart panel: a title, y-axis label and points in x order.
#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 480.0;
const H: f64 = 300.0;
const MARGIN: (f64, f64, f64, f64) = (60.0, 20.0, 30.0, 45.0); // left, right, top, bottom

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 0.0 { lo.abs() * 0.1 } else { 1.0 };
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Side-by-side panels sharing an x-axis label.
pub fn line_chart_svg(x_label: &str, panels: &[Panel]) -> String {
    let total_w = W * panels.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{H}" viewBox="0 0 {total_w} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{total_w}" height="{H}" fill="white"/>"#);
    let (ml, mr, mt, mb) = MARGIN;
    for (i, p) in panels.iter().enumerate() {
        let ox = W * i as f64;
        let (x0, x1) = range(p.points.iter().map(|q| q.0));
        let (y0, y1) = range(p.points.iter().map(|q| q.1));
        let pw = W - ml - mr;
        let ph = H - mt - mb;
        let sx = |x: f64| ox + ml + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| mt + ph - (y - y0) / (y1 - y0) * ph;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
            ox + W / 2.0,
            p.title
        );
        let _ = writeln!(
            s,
            r#"<path d="M{:.1},{:.1} V{:.1} H{:.1}" fill="none" stroke="black"/>"#,
            ox + ml,
            mt,
            mt + ph,
            ox + ml + pw
        );
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            let yv = y0 + (y1 - y0) * t;
            let xv = x0 + (x1 - x0) * t;
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                ox + ml - 5.0,
                sy(yv) + 4.0,
                fmt_tick(yv)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                sx(xv),
                mt + ph + 16.0,
                fmt_tick(xv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x_label}</text>"#,
            ox + ml + pw / 2.0,
            H - 8.0
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate({:.1},{:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            ox + 14.0,
            mt + ph / 2.0,
            p.y_label
        );
        let pts: Vec<String> = p.points.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
            pts.join(" ")
        );
        for &(x, y) in &p.points {
            let _ = writeln!(s, r##"<circle cx="{:.1}" cy="{:.1}" r="3" fill="#1f77b4"/>"##, sx(x), sy(y));
        }
    }
    s.push_str("</svg>\n");
    s
}
