//! Minimal SVG charts for the histogram overlay and the resolution sweep.

use std::fmt::Write;

use crate::stats::{HistogramOverlay, SweepRow};

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

struct Frame {
    x0: f64,
    x1: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        LEFT + (v - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        H - BOTTOM - v / self.y1 * (H - TOP - BOTTOM)
    }
}

fn open(title: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{title}</text>"#,
        W / 2.0
    )
    .unwrap();
    s
}

fn axes(s: &mut String, f: &Frame, x_label: &str, y_label: &str, ticks: usize) {
    let (bx, by) = (LEFT, H - BOTTOM);
    writeln!(
        s,
        r#"<path d="M{bx} {TOP} L{bx} {by} L{} {by}" stroke="black" fill="none"/>"#,
        W - RIGHT
    )
    .unwrap();
    for t in 0..=ticks {
        let v = f.x0 + (f.x1 - f.x0) * t as f64 / ticks as f64;
        let x = f.x(v);
        writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{by}" x2="{x:.1}" y2="{}" stroke="black"/><text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#,
            by + 5.0,
            by + 18.0,
            trim(v)
        )
        .unwrap();
        let w = f.y1 * t as f64 / ticks as f64;
        let y = f.y(w);
        writeln!(
            s,
            r#"<line x1="{}" y1="{y:.1}" x2="{bx}" y2="{y:.1}" stroke="black"/><text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            bx - 5.0,
            bx - 8.0,
            y + 4.0,
            trim(w)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 12.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{y_label}</text>"#,
        (TOP + H - BOTTOM) / 2.0,
        (TOP + H - BOTTOM) / 2.0
    )
    .unwrap();
}

fn trim(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_owned()
}

/// Gray bars for the observed distribution, narrow black bars for the
/// binomial model.
pub fn histogram(h: &HistogramOverlay, title: &str) -> String {
    let peak = h
        .bins
        .iter()
        .map(|b| b.value.max(b.overlay))
        .fold(0.0, f64::max);
    let floor = peak * 1e-4;
    let active: Vec<usize> = (0..h.bins.len())
        .filter(|&i| h.bins[i].count > 0 || h.bins[i].overlay > floor)
        .collect();
    let (first, last) = match (active.first(), active.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (0, h.bins.len() - 1),
    };
    let f = Frame {
        x0: h.bins[first].left,
        x1: (h.bins[last].left + h.bin_width).min(1.0),
        y1: if peak > 0.0 { peak * 1.05 } else { 1.0 },
    };
    let mut s = open(title);
    axes(&mut s, &f, "Hamming distance", "mass", 5);
    for b in &h.bins[first..=last] {
        let (xa, xb) = (f.x(b.left), f.x((b.left + h.bin_width).min(1.0)));
        if b.value > 0.0 {
            writeln!(
                s,
                r##"<rect x="{xa:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#9aa7b8"/>"##,
                f.y(b.value),
                (xb - xa).max(0.5),
                f.y(0.0) - f.y(b.value)
            )
            .unwrap();
        }
    }
    for &(x, m) in &h.overlay {
        if x < f.x0 || x > f.x1 || m <= floor {
            continue;
        }
        let cx = f.x(x);
        writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="1.2" height="{:.2}" fill="black"/>"#,
            cx - 0.6,
            f.y(m),
            f.y(0.0) - f.y(m)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Degrees of freedom against resolution percentage.
pub fn dof_vs_resolution(rows: &[SweepRow]) -> String {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.stats.dof.map(|d| (r.level.scale * 100.0, d as f64)))
        .collect();
    let top = pts.iter().map(|p| p.1).fold(1.0, f64::max);
    let f = Frame {
        x0: 0.0,
        x1: 100.0,
        y1: top * 1.1,
    };
    let mut s = open("Binomial degrees of freedom versus resolution");
    axes(&mut s, &f, "resolution (% of full)", "degrees of freedom", 5);
    if !pts.is_empty() {
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", f.x(x), f.y(y)))
            .collect();
        writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#1f4e9c" stroke-width="2"/>"##,
            path.join(" ")
        )
        .unwrap();
        for &(x, y) in &pts {
            writeln!(
                s,
                r##"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="#1f4e9c"/><text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                f.x(x),
                f.y(y),
                f.x(x),
                f.y(y) - 8.0,
                y
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}
