//! Deterministic SVG scatter plots.

use std::fmt::Write;

use anyhow::{bail, Result};
use tsne_forensics_core::Matrix;

pub const CANVAS: f64 = 800.0;
pub const MARGIN: f64 = 0.05 * CANVAS;
pub const POINT_RADIUS: f64 = 2.0;

/// Eight stops sampled from the viridis ramp.
pub const RAMP: [[u8; 3]; 8] = [
    [0x44, 0x01, 0x54],
    [0x46, 0x32, 0x7e],
    [0x36, 0x5c, 0x8d],
    [0x27, 0x7f, 0x8e],
    [0x1f, 0xa1, 0x87],
    [0x4a, 0xc1, 0x6d],
    [0xa0, 0xda, 0x39],
    [0xfd, 0xe7, 0x25],
];

/// Color at `t ∈ [0, 1]`, linearly interpolated between ramp stops.
pub fn ramp_color(t: f64) -> [u8; 3] {
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.5
    };
    let x = t * (RAMP.len() - 1) as f64;
    let k = (x.floor() as usize).min(RAMP.len() - 2);
    let f = x - k as f64;
    let mut out = [0u8; 3];
    for c in 0..3 {
        let (a, b) = (RAMP[k][c] as f64, RAMP[k + 1][c] as f64);
        out[c] = (a + f * (b - a)).round() as u8;
    }
    out
}

fn hex([r, g, b]: [u8; 3]) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders a 2-column embedding. `color` (one value per row) is mapped over
/// its min–max range; without it every point takes the ramp midpoint.
pub fn scatter(points: &Matrix, color: Option<&[f64]>, title: Option<&str>) -> Result<String> {
    if points.cols() != 2 {
        bail!("scatter plots need 2 columns, got {}", points.cols());
    }
    if let Some(c) = color {
        if c.len() != points.rows() {
            bail!("{} color values for {} points", c.len(), points.rows());
        }
    }
    if !points.is_finite() {
        bail!("cannot plot non-finite coordinates");
    }

    // equal aspect: one scale for both axes, data centered in the plot area
    let inner = CANVAS - 2.0 * MARGIN;
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for row in points.iter_rows() {
        for a in 0..2 {
            lo[a] = lo[a].min(row[a]);
            hi[a] = hi[a].max(row[a]);
        }
    }
    let (center, span) = if points.rows() == 0 {
        ([0.0, 0.0], 2.0)
    } else {
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        (
            [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0],
            if span > 0.0 { span } else { 1.0 },
        )
    };
    let scale = inner / span;
    let px = |x: f64| CANVAS / 2.0 + (x - center[0]) * scale;
    let py = |y: f64| CANVAS / 2.0 - (y - center[1]) * scale;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{c}" height="{c}" viewBox="0 0 {c} {c}">"#,
        c = CANVAS
    )?;
    writeln!(
        s,
        r#"<rect x="0" y="0" width="{CANVAS}" height="{CANVAS}" fill="white"/>"#
    )?;
    if let Some(t) = title {
        writeln!(s, r#"<title>{}</title>"#, escape(t))?;
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
            CANVAS / 2.0,
            MARGIN / 2.0,
            escape(t)
        )?;
    }
    let (x0, x1) = (MARGIN, CANVAS - MARGIN);
    writeln!(s, r#"<g stroke="black" stroke-width="1">"#)?;
    writeln!(s, r#"<line x1="{x0}" y1="{x1}" x2="{x1}" y2="{x1}"/>"#)?;
    writeln!(s, r#"<line x1="{x0}" y1="{x1}" x2="{x0}" y2="{x0}"/>"#)?;
    writeln!(s, "</g>")?;
    let half = span / 2.0;
    let tick = |v: f64| format!("{v:.3e}");
    writeln!(s, r#"<g font-family="sans-serif" font-size="10">"#)?;
    writeln!(
        s,
        r#"<text x="{x0}" y="{}" text-anchor="start">{}</text>"#,
        x1 + 14.0,
        tick(center[0] - half)
    )?;
    writeln!(
        s,
        r#"<text x="{x1}" y="{}" text-anchor="end">{}</text>"#,
        x1 + 14.0,
        tick(center[0] + half)
    )?;
    writeln!(
        s,
        r#"<text x="{}" y="{x1}" text-anchor="end">{}</text>"#,
        x0 - 4.0,
        tick(center[1] - half)
    )?;
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        x0 - 4.0,
        x0 + 10.0,
        tick(center[1] + half)
    )?;
    writeln!(s, "</g>")?;

    let (cmin, cmax) = color.map_or((0.0, 0.0), |c| {
        c.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            })
    });
    writeln!(s, r#"<g stroke="none">"#)?;
    for (i, row) in points.iter_rows().enumerate() {
        let t = match color {
            Some(c) if cmax > cmin => (c[i] - cmin) / (cmax - cmin),
            _ => 0.5,
        };
        writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{POINT_RADIUS}" fill="{}"/>"#,
            px(row[0]),
            py(row[1]),
            hex(ramp_color(t))
        )?;
    }
    writeln!(s, "</g>")?;
    writeln!(s, "</svg>")?;
    Ok(s)
}
