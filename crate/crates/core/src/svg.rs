//! Self-contained SVG heatmaps.

use std::fmt::Write;

/// One heatmap panel: `values[row][col]`, `NaN` cells drawn grey.
pub struct Panel<'a> {
    pub title: &'a str,
    pub values: &'a [Vec<f64>],
}

const CELL: f64 = 8.0;
const MARGIN: f64 = 48.0;

/// Blue (low) to red (high) ramp on `t ∈ [0, 1]`.
fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t) as u8;
    let b = (255.0 * (1.0 - t)) as u8;
    let g = (255.0 * (1.0 - (2.0 * t - 1.0).abs()) * 0.8) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Side-by-side panels sharing axis labels; rows and columns are labelled
/// from `first_label` upward. Each panel has its own color scale.
pub fn heatmap(panels: &[Panel<'_>], first_label: usize, row_name: &str, col_name: &str) -> String {
    let rows = panels.first().map_or(0, |p| p.values.len());
    let cols = panels.first().and_then(|p| p.values.first()).map_or(0, |r| r.len());
    let panel_w = cols as f64 * CELL + 2.0 * MARGIN;
    let width = panel_w * panels.len().max(1) as f64;
    let height = rows as f64 * CELL + 2.0 * MARGIN + 24.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">"#
    );
    for (p, panel) in panels.iter().enumerate() {
        let ox = p as f64 * panel_w + MARGIN;
        let oy = MARGIN;
        let finite = panel.values.iter().flatten().filter(|v| v.is_finite());
        let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let span = if hi > lo { hi - lo } else { 1.0 };
        let _ = writeln!(s, r#"<text x="{ox}" y="{}">{}</text>"#, oy - 28.0, escape(panel.title));
        for (i, row) in panel.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let fill = if v.is_finite() {
                    color((v - lo) / span)
                } else {
                    "#bbbbbb".to_string()
                };
                let _ = writeln!(
                    s,
                    r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{fill}"><title>{row_name}={} {col_name}={} value={v:.4}</title></rect>"#,
                    ox + j as f64 * CELL,
                    oy + i as f64 * CELL,
                    first_label + i,
                    first_label + j,
                );
            }
        }
        let bottom = oy + rows as f64 * CELL;
        let _ = writeln!(
            s,
            r#"<text x="{ox}" y="{}">{col_name} from {first_label}</text>"#,
            bottom + 14.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{oy}" transform="rotate(-90 {} {oy})" text-anchor="end">{row_name}</text>"#,
            ox - 6.0,
            ox - 6.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{ox}" y="{}">range [{lo:.2}, {hi:.2}]</text>"#,
            bottom + 28.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
