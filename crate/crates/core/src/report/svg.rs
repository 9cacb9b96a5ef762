//! Hand-rolled SVG line charts: R² against retained percentage, one polyline
//! and one dashed least-squares trend line per method.

use std::fmt::Write as _;

use crate::bench::MethodTrajectory;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

const COLORS: &[&str] = &[
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173", "#3182bd", "#e6550d", "#31a354",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn px(&self, pct: f64) -> f64 {
        LEFT + (pct - self.x_min) / (self.x_max - self.x_min) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, r2: f64) -> f64 {
        HEIGHT - BOTTOM - (r2 - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - TOP - BOTTOM)
    }
}

fn frame(trajectories: &[&MethodTrajectory]) -> Frame {
    let mut x_min: f64 = 100.0;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for t in trajectories {
        for (f, r) in t.valid_points() {
            x_min = x_min.min(f * 100.0);
            y_min = y_min.min(r);
            y_max = y_max.max(r);
        }
        for p in &t.points {
            x_min = x_min.min(p.fraction * 100.0);
        }
    }
    if !y_min.is_finite() {
        (y_min, y_max) = (0.0, 1.0);
    }
    let span = y_max - y_min;
    let pad = if span > 0.0 { 0.05 * span } else { 0.05 };
    let x_min = if x_min >= 100.0 { 0.0 } else { (x_min / 10.0).floor() * 10.0 };
    Frame {
        x_min,
        x_max: 100.0,
        y_min: y_min - pad,
        y_max: y_max + pad,
    }
}

pub fn line_chart(title: &str, trajectories: &[&MethodTrajectory]) -> String {
    let fr = frame(trajectories);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="28" font-size="18" text-anchor="middle">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );

    // axes and grid
    let (x0, x1) = (fr.px(fr.x_min), fr.px(fr.x_max));
    let (y0, y1) = (fr.py(fr.y_min), fr.py(fr.y_max));
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.1} {y1:.1} V{y0:.1} H{x1:.1}" stroke="black" fill="none"/>"#
    );
    let mut pct = fr.x_min;
    while pct <= fr.x_max + 1e-9 {
        let x = fr.px(pct);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{:.1}" stroke="#000"/><text x="{x:.1}" y="{:.1}" font-size="12" text-anchor="middle">{pct:.0}</text>"##,
            y0 + 5.0,
            y0 + 20.0
        );
        pct += 10.0;
    }
    for i in 0..=5 {
        let v = fr.y_min + (fr.y_max - fr.y_min) * i as f64 / 5.0;
        let y = fr.py(v);
        let _ = writeln!(
            s,
            r##"<line x1="{x0:.1}" y1="{y:.1}" x2="{x1:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" font-size="12" text-anchor="end">{v:.4}</text>"##,
            x0 - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">retained observations (%)</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1})">mean CV R²</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    for (i, t) in trajectories.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = t
            .valid_points()
            .iter()
            .map(|&(f, r)| format!("{:.1},{:.1}", fr.px(f * 100.0), fr.py(r)))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
                pts.join(" ")
            );
        }
        if let (Some(slope), Some(intercept)) = (t.slope, t.intercept) {
            let valid = t.valid_points();
            let lo = valid.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            let hi = valid.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            let _ = writeln!(
                s,
                r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-dasharray="6 4"/>"#,
                fr.px(lo * 100.0),
                fr.py(intercept + slope * lo),
                fr.px(hi * 100.0),
                fr.py(intercept + slope * hi)
            );
        }
        let ly = TOP + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-size="12">{}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            escape(t.method.id())
        );
    }
    s.push_str("</svg>\n");
    s
}
