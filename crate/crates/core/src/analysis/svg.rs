//! Minimal SVG renderings of the scatter and contribution CSVs.

use std::fmt::Write as _;

use super::report::MethodResult;
use crate::signal::Target;

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{title}</text>"#, W / 2.0);
    s
}

/// Estimated vs. actual grams, one colour per method, with the identity line.
pub fn scatter(results: &[MethodResult], target: Target) -> String {
    let t = target.index();
    let mut s = open(&format!("Estimated vs. actual {} (g)", target.as_str()));
    let hi = results
        .iter()
        .flat_map(|r| r.points.iter().flat_map(|p| [p.actual.get(target), p.predicted[t]]))
        .fold(1.0f64, f64::max)
        * 1.05;
    let x = |v: f64| PAD + v / hi * (W - 2.0 * PAD);
    let y = |v: f64| H - PAD - v / hi * (H - 2.0 * PAD);
    let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, x(0.0), y(0.0), x(hi), y(0.0));
    let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, x(0.0), y(0.0), x(0.0), y(hi));
    let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="4 4"/>"#, x(0.0), y(0.0), x(hi), y(hi));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">actual</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(s, r#"<text x="14" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {})">estimated</text>"#, H / 2.0, H / 2.0);
    for (m, res) in results.iter().enumerate() {
        let color = COLORS[m % COLORS.len()];
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#, PAD + 8.0, PAD + 14.0 * m as f64, res.method.label());
        for p in &res.points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}" fill-opacity="0.6"/>"#, x(p.actual.get(target)), y(p.predicted[t]));
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Horizontal bars of the signal contributions of each method's first model.
pub fn contributions(results: &[MethodResult], target: Target) -> String {
    let t = target.index();
    let mut s = open(&format!("Signal contributions, {}", target.as_str()));
    let bars: Vec<(String, f64)> = results
        .iter()
        .filter_map(|r| r.contributions.first().map(|c| (r, c)))
        .flat_map(|(r, c)| c.signals.iter().zip(&c.signal_gamma[t]).map(move |(sig, g)| (format!("{} {sig}", r.method), *g)))
        .collect();
    let span = bars.iter().map(|(_, g)| g.abs()).fold(1e-12f64, f64::max);
    let mid = W / 2.0 + 40.0;
    let half = W - mid - 16.0;
    let step = ((H - 2.0 * PAD) / bars.len().max(1) as f64).min(28.0);
    let _ = writeln!(s, r#"<line x1="{mid}" y1="{PAD}" x2="{mid}" y2="{}" stroke="black"/>"#, H - PAD);
    for (i, (label, g)) in bars.iter().enumerate() {
        let top = PAD + step * i as f64;
        let len = g.abs() / span * half;
        let left = if *g < 0.0 { mid - len } else { mid };
        let color = if *g < 0.0 { COLORS[1] } else { COLORS[0] };
        let _ = writeln!(s, r#"<rect x="{left:.2}" y="{:.2}" width="{len:.2}" height="{:.2}" fill="{color}"/>"#, top + 2.0, step - 4.0);
        let _ = writeln!(s, r#"<text x="8" y="{:.2}" font-family="sans-serif" font-size="11">{label}</text>"#, top + step / 2.0 + 4.0);
    }
    s.push_str("</svg>\n");
    s
}
