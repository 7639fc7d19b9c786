use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::records::RunRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SvgAxes {
    pub title: String,
    pub width: u32,
    pub height: u32,
}

impl Default for SvgAxes {
    fn default() -> Self {
        SvgAxes {
            title: "u(t, x)".into(),
            width: 640,
            height: 400,
        }
    }
}

const MARGIN: f64 = 50.0;
const LEGEND_WIDTH: f64 = 150.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Survival curves `t ↦ u(t, x)`: one polyline per `(x, route)` pair,
/// points sorted by `t`, on a fixed `[0, 1]` value axis.
pub fn render_svg(records: &[RunRecord], axes: &SvgAxes) -> Result<String> {
    if records.is_empty() {
        return Err(Error::Domain("nothing to plot".into()));
    }
    let mut series: BTreeMap<(u64, &str), Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        if !r.t.is_finite() || !r.value.is_finite() {
            return Err(Error::Domain(format!("non-finite point at t={}, x={}", r.t, r.x)));
        }
        series
            .entry((r.x.to_bits(), r.route.as_str()))
            .or_default()
            .push((r.t, r.value));
    }
    let t_lo = records.iter().map(|r| r.t).fold(f64::INFINITY, f64::min);
    let mut t_hi = records.iter().map(|r| r.t).fold(f64::NEG_INFINITY, f64::max);
    if t_hi <= t_lo {
        t_hi = t_lo + 1.0;
    }
    let (w, h) = (axes.width as f64, axes.height as f64);
    let plot_w = w - 2.0 * MARGIN - LEGEND_WIDTH;
    let plot_h = h - 2.0 * MARGIN;
    let px = |t: f64| MARGIN + (t - t_lo) / (t_hi - t_lo) * plot_w;
    let py = |u: f64| MARGIN + (1.0 - u.clamp(0.0, 1.0)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        axes.width, axes.height, axes.width, axes.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN + plot_w / 2.0,
        MARGIN / 2.0,
        escape(&axes.title)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{:.1},{:.1} V{:.1} H{:.1}" fill="none" stroke="black"/>"#,
        MARGIN,
        MARGIN,
        MARGIN + plot_h,
        MARGIN + plot_w
    );
    for k in 0..=4 {
        let u = k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{u:.2}</text>"#,
            MARGIN - 4.0,
            py(u) + 3.0
        );
        let t = t_lo + u * (t_hi - t_lo);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{t:.3}</text>"#,
            px(t),
            MARGIN + plot_h + 14.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">t</text>"#,
        MARGIN + plot_w / 2.0,
        h - 10.0
    );

    for (i, ((xbits, route), pts)) in series.iter_mut().enumerate() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let colour = PALETTE[i % PALETTE.len()];
        let dash = match *route {
            "laplace" => r#" stroke-dasharray="6,3""#,
            "mc" => r#" stroke-dasharray="2,2""#,
            _ => "",
        };
        let coords: Vec<String> = pts.iter().map(|&(t, u)| format!("{:.2},{:.2}", px(t), py(u))).collect();
        let label = format!("x={} {}", f64::from_bits(*xbits), route);
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash} points="{}"><title>{}</title></polyline>"#,
            coords.join(" "),
            escape(&label)
        );
        let ly = MARGIN + 16.0 * i as f64;
        let lx = w - MARGIN - LEGEND_WIDTH + 20.0;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{colour}" stroke-width="1.5"{dash}/>"#,
            lx,
            ly,
            lx + 20.0,
            ly
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg(path: impl AsRef<Path>, records: &[RunRecord], axes: &SvgAxes) -> Result<()> {
    std::fs::write(path, render_svg(records, axes)?)?;
    Ok(())
}
