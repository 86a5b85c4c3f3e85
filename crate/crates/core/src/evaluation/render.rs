//! CSV tables and SVG plots for survival curves and ROC curves.

use std::fmt::Write;

use super::{RocCurve, SurvivalCurve, DAYS_PER_MONTH};
use crate::scalar::Real;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;
const COLORS: [&str; 4] = ["#c0392b", "#2471a3", "#555555", "#1e8449"];

/// One row per distinct time per curve; times in months.
pub fn km_csv<T: Real>(curves: &[(&str, &SurvivalCurve<T>)]) -> String {
    let mut out = String::from("group,time_months,at_risk,events,censored,survival,lower,upper\n");
    for (name, c) in curves {
        for p in &c.points {
            let _ = writeln!(
                out,
                "{name},{},{},{},{},{},{},{}",
                p.time.f64() / DAYS_PER_MONTH,
                p.at_risk,
                p.events,
                p.censored,
                p.survival.f64(),
                p.lower.f64(),
                p.upper.f64()
            );
        }
    }
    out
}

fn frame(out: &mut String, title: &str, xlabel: &str, ylabel: &str, xmax: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#, W / 2.0);
    let (x0, y0, x1, y1) = (PAD, H - PAD, W - PAD, PAD);
    let _ = writeln!(
        out,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let y = y0 - f * (y0 - y1);
        let x = x0 + f * (x1 - x0);
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{:.2}</text>"#, x0 - 6.0, y + 4.0, f);
        let _ = writeln!(out, r#"<text x="{x}" y="{}" text-anchor="middle">{:.1}</text>"#, y0 + 16.0, f * xmax);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#, W / 2.0, H - 10.0);
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{ylabel}</text>"#,
        H / 2.0,
        H / 2.0
    );
}

fn sx(t: f64, xmax: f64) -> f64 {
    PAD + t / xmax * (W - 2.0 * PAD)
}

fn sy(s: f64) -> f64 {
    H - PAD - s * (H - 2.0 * PAD)
}

/// Step curves with a shaded 95% band and censor ticks; time in months.
pub fn km_svg<T: Real>(title: &str, curves: &[(&str, &SurvivalCurve<T>)]) -> String {
    let xmax = curves
        .iter()
        .flat_map(|(_, c)| c.points.iter().map(|p| p.time.f64() / DAYS_PER_MONTH))
        .fold(1.0f64, f64::max);
    let mut out = String::new();
    frame(&mut out, title, "months", "event-free probability", xmax);
    for (k, (name, c)) in curves.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut line = format!("M{} {}", sx(0.0, xmax), sy(1.0));
        let (mut upper, mut lower) = (vec![(0.0, 1.0)], vec![(0.0, 1.0)]);
        let (mut s, mut u, mut l) = (1.0, 1.0, 1.0);
        for p in &c.points {
            let t = p.time.f64() / DAYS_PER_MONTH;
            let _ = write!(line, " L{} {}", sx(t, xmax), sy(s));
            upper.push((t, u));
            lower.push((t, l));
            s = p.survival.f64();
            u = p.upper.f64();
            l = p.lower.f64();
            let _ = write!(line, " L{} {}", sx(t, xmax), sy(s));
            upper.push((t, u));
            lower.push((t, l));
        }
        let mut band = String::new();
        for (i, &(t, v)) in upper.iter().enumerate() {
            let _ = write!(band, "{}{} {} ", if i == 0 { "M" } else { "L" }, sx(t, xmax), sy(v));
        }
        for &(t, v) in lower.iter().rev() {
            let _ = write!(band, "L{} {} ", sx(t, xmax), sy(v));
        }
        let _ = writeln!(out, r#"<path d="{band}Z" fill="{color}" fill-opacity="0.15" stroke="none"/>"#);
        let _ = writeln!(out, r#"<path d="{line}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        for p in c.points.iter().filter(|p| p.censored > 0) {
            let x = sx(p.time.f64() / DAYS_PER_MONTH, xmax);
            let y = sy(p.survival.f64());
            let _ = writeln!(out, r#"<path d="M{x} {} L{x} {}" stroke="{color}"/>"#, y - 4.0, y + 4.0);
        }
        let ly = 40.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{name} (n={})</text>"#,
            W - PAD,
            c.n
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn roc_svg<T: Real>(title: &str, roc: &RocCurve<T>) -> String {
    let mut out = String::new();
    frame(&mut out, title, "1 - specificity", "sensitivity", 1.0);
    let _ = writeln!(
        out,
        r##"<path d="M{} {} L{} {}" stroke="#999999" stroke-dasharray="4 4"/>"##,
        sx(0.0, 1.0),
        sy(0.0),
        sx(1.0, 1.0),
        sy(1.0)
    );
    let mut line = String::new();
    for (i, p) in roc.points.iter().enumerate() {
        let _ = write!(
            line,
            "{}{} {} ",
            if i == 0 { "M" } else { "L" },
            sx(p.fpr.f64(), 1.0),
            sy(p.tpr.f64())
        );
    }
    let _ = writeln!(out, r#"<path d="{line}" fill="none" stroke="{}" stroke-width="1.5"/>"#, COLORS[1]);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">AUC = {:.3}</text>"#,
        W - PAD,
        H - PAD - 10.0,
        roc.auc.f64()
    );
    out.push_str("</svg>\n");
    out
}
