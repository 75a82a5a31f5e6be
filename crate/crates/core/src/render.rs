//! SVG pictures of configurations, viewed from above: each horoball is drawn
//! as its shadow disk, with the y-axis pointing up.

use std::fmt::Write;

use crate::io::{BallSpec, ConfigDocument};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    /// Pixels per model unit.
    pub scale: f64,
    pub draw_ties: bool,
    /// Draw the eye axis `L` and the perpendiculars `v1`, `v2`.
    pub draw_strip: bool,
    pub labels: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            scale: 160.0,
            draw_ties: true,
            draw_strip: true,
            labels: true,
        }
    }
}

const MARGIN: f64 = 0.3;
const EYE_FILL: &str = "#dbe4f0";
const EYE_STROKE: &str = "#5b7699";
const BEAD_STROKE: &str = "#1f1f1f";
const TIE_STROKE: &str = "#b03a2e";
const STRIP_STROKE: &str = "#7f7f7f";

struct View {
    min_x: f64,
    max_y: f64,
    scale: f64,
}

impl View {
    fn x(&self, x: f64) -> f64 {
        (x - self.min_x) * self.scale
    }

    fn y(&self, y: f64) -> f64 {
        (self.max_y - y) * self.scale
    }
}

/// Renders `doc`; identical inputs give byte-identical output.
pub fn render_svg(doc: &ConfigDocument, opts: &RenderOptions) -> String {
    let scale = if opts.scale > 0.0 && opts.scale.is_finite() {
        opts.scale
    } else {
        160.0
    };
    let all: Vec<&BallSpec> = doc.eyes.iter().chain(&doc.beads).collect();
    let (mut min_x, mut max_x, mut min_y, mut max_y) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for b in &all {
        let r = b.height / 2.0;
        min_x = min_x.min(b.center[0] - r);
        max_x = max_x.max(b.center[0] + r);
        min_y = min_y.min(b.center[1] - r);
        max_y = max_y.max(b.center[1] + r);
    }
    min_x -= MARGIN;
    max_x += MARGIN;
    min_y -= MARGIN;
    max_y += MARGIN;
    let view = View {
        min_x,
        max_y,
        scale,
    };
    let width = (max_x - min_x) * scale;
    let height = (max_y - min_y) * scale;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}">"#
    );
    let _ = writeln!(
        s,
        r##"  <rect x="0" y="0" width="{width:.2}" height="{height:.2}" fill="#ffffff"/>"##
    );

    let [e1, e2] = doc.eyes;
    let (dx, dy) = (e2.center[0] - e1.center[0], e2.center[1] - e1.center[1]);
    let len = dx.hypot(dy);
    if opts.draw_strip && len > 0.0 {
        let (ux, uy) = (dx / len, dy / len);
        let reach = (max_x - min_x).hypot(max_y - min_y);
        let mut line = |name: &str, px: f64, py: f64, vx: f64, vy: f64| {
            let _ = writeln!(
                s,
                r#"  <line class="{name}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{STRIP_STROKE}" stroke-width="1" stroke-dasharray="6 4"/>"#,
                view.x(px - reach * vx),
                view.y(py - reach * vy),
                view.x(px + reach * vx),
                view.y(py + reach * vy),
            );
        };
        line("L", e1.center[0], e1.center[1], ux, uy);
        line("v1", e1.center[0], e1.center[1], -uy, ux);
        line("v2", e2.center[0], e2.center[1], -uy, ux);
    }

    for e in &doc.eyes {
        let _ = writeln!(
            s,
            r#"  <circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{EYE_FILL}" stroke="{EYE_STROKE}" stroke-width="1.5"/>"#,
            view.x(e.center[0]),
            view.y(e.center[1]),
            e.height / 2.0 * scale
        );
    }

    if opts.draw_ties && doc.beads.len() >= 2 {
        let pts: Vec<String> = doc
            .beads
            .iter()
            .map(|b| format!("{:.2},{:.2}", view.x(b.center[0]), view.y(b.center[1])))
            .collect();
        let _ = writeln!(
            s,
            r#"  <polygon points="{}" fill="none" stroke="{TIE_STROKE}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
    }

    for b in &doc.beads {
        let _ = writeln!(
            s,
            r#"  <circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="{BEAD_STROKE}" stroke-width="1.5"/>"#,
            view.x(b.center[0]),
            view.y(b.center[1]),
            b.height / 2.0 * scale
        );
    }

    if opts.labels {
        let font = (scale * 0.12).max(8.0);
        let mut label = |text: String, x: f64, y: f64| {
            let _ = writeln!(
                s,
                r#"  <text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="{font:.1}" text-anchor="middle" dominant-baseline="central">{text}</text>"#,
                view.x(x),
                view.y(y)
            );
        };
        for (i, e) in doc.eyes.iter().enumerate() {
            label(format!("C{}", i + 1), e.center[0], e.center[1]);
        }
        for (i, b) in doc.beads.iter().enumerate() {
            label(format!("{i}"), b.center[0], b.center[1]);
        }
    }
    s.push_str("</svg>\n");
    s
}
