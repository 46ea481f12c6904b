//! Deterministic SVG rendering of landscape files: one panel per homological
//! degree, one polyline per level, `t` on the horizontal axis.

use std::fmt::Write as _;

use crate::landscape::LandscapeLayout;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN: f64 = 48.0;
const TITLE_H: f64 = 28.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    /// Nonnegative average landscapes; all-zero levels are omitted.
    Average,
    /// Signed differences on a symmetric vertical axis; every level drawn.
    Difference,
}

impl PlotKind {
    /// Files named `diff_*` are differences.
    pub fn from_name(stem: &str) -> Self {
        if stem.starts_with("diff") {
            PlotKind::Difference
        } else {
            PlotKind::Average
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(layout: &LandscapeLayout, entries: &[f64], kind: PlotKind, title: &str) -> String {
    assert_eq!(entries.len(), layout.len(), "entries do not match the layout");
    let t = layout.grid.points();
    let (t0, t1) = (layout.grid.first(), layout.grid.last());
    let t_span = if t1 > t0 { t1 - t0 } else { 1.0 };
    let peak = entries.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let peak = if peak > 0.0 { peak } else { 1.0 };
    let (y_lo, y_hi) = match kind {
        PlotKind::Average => (0.0, peak),
        PlotKind::Difference => (-peak, peak),
    };

    let width = 2.0 * (PANEL_W + MARGIN) + MARGIN;
    let height = PANEL_H + 2.0 * MARGIN + TITLE_H;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        width / 2.0,
        escape(title)
    );

    for degree in 0..2 {
        let left = MARGIN + degree as f64 * (PANEL_W + MARGIN);
        let top = TITLE_H + MARGIN / 2.0;
        let x = |v: f64| left + (v - t0) / t_span * PANEL_W;
        let y = |v: f64| top + (y_hi - v) / (y_hi - y_lo) * PANEL_H;

        let _ = writeln!(svg, r#"<g id="degree{degree}">"#);
        let _ = writeln!(
            svg,
            r#"<rect x="{left:.2}" y="{top:.2}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
            left,
            y(0.0),
            left + PANEL_W,
            y(0.0)
        );
        let label = |svg: &mut String, lx: f64, ly: f64, anchor: &str, text: String| {
            let _ = writeln!(
                svg,
                r#"<text x="{lx:.2}" y="{ly:.2}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{text}</text>"#
            );
        };
        label(&mut svg, left + PANEL_W / 2.0, top - 6.0, "middle", format!("H{degree}"));
        label(&mut svg, left, top + PANEL_H + 16.0, "start", format!("{t0:.3}"));
        label(&mut svg, left + PANEL_W, top + PANEL_H + 16.0, "end", format!("{t1:.3}"));
        label(&mut svg, left - 4.0, top + 10.0, "end", format!("{y_hi:.3}"));
        label(&mut svg, left - 4.0, top + PANEL_H, "end", format!("{y_lo:.3}"));

        for level in 1..=layout.depth {
            let start = layout.offset(degree, level, 0);
            let values = &entries[start..start + t.len()];
            if kind == PlotKind::Average && values.iter().all(|&v| v == 0.0) {
                continue;
            }
            let mut points = String::new();
            for (i, (&ti, &v)) in t.iter().zip(values).enumerate() {
                if i > 0 {
                    points.push(' ');
                }
                let _ = write!(points, "{:.2},{:.2}", x(ti), y(v));
            }
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{points}"><title>level {level}</title></polyline>"#,
                PALETTE[(level - 1) % PALETTE.len()]
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}
