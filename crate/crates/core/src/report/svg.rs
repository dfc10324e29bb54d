use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::protocol::AlignmentTable;

const CELL_W: f64 = 30.0;
const CELL_H: f64 = 22.0;
const LEFT: f64 = 150.0;
const TOP: f64 = 48.0;
const LEGEND_W: f64 = 16.0;

// viridis, sampled at five evenly spaced stops
const STOPS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

/// Colour at position `t` in `[0, 1]` of the scale.
pub(crate) fn colour(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let pos = t * (STOPS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(STOPS.len() - 2);
    let f = pos - i as f64;
    let c: Vec<u8> = (0..3)
        .map(|ch| (STOPS[i][ch] * (1.0 - f) + STOPS[i + 1][ch] * f).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn value_range(table: &AlignmentTable, metric: Metric) -> (f64, f64) {
    match metric {
        Metric::Mknn => (0.0, 1.0),
        Metric::Cosine => table
            .rows
            .iter()
            .map(|r| r.cosine)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v))),
    }
}

/// One SVG grid: a row per model, a column per rotated angle.
///
/// m-kNN is coloured on the fixed range `[0, 1]`; cosine distance on the
/// observed `[min, max]`.
pub fn render_heatmap_svg(table: &AlignmentTable, metric: Metric) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::Domain("cannot render an empty table".into()));
    }
    let (lo, hi) = value_range(table, metric);
    let span = hi - lo;
    let scale = |v: f64| if span > 0.0 { (v - lo) / span } else { 0.0 };

    let cols = table.angles.len() as f64;
    let rows = table.models.len() as f64;
    let grid_w = cols * CELL_W;
    let grid_h = rows * CELL_H;
    let legend_x = LEFT + grid_w + 24.0;
    let width = legend_x + LEGEND_W + 70.0;
    let height = TOP + grid_h + 40.0;
    let title = match metric {
        Metric::Mknn => "Mutual k-NN",
        Metric::Cosine => "Cosine distance",
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="18" font-size="14">{title} (k = {})</text>"#,
        table.k
    );

    for (ci, angle) in table.angles.iter().enumerate() {
        let x = LEFT + ci as f64 * CELL_W + CELL_W / 2.0;
        let _ = writeln!(
            s,
            r#"<text class="angle" x="{x}" y="{}" text-anchor="middle">{angle}</text>"#,
            TOP - 6.0
        );
    }
    for (ri, m) in table.models.iter().enumerate() {
        let y = TOP + ri as f64 * CELL_H + CELL_H / 2.0 + 4.0;
        let _ = writeln!(
            s,
            r#"<text class="model" x="{}" y="{y}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            escape(&m.model)
        );
    }

    for r in &table.rows {
        let (Some(ri), Some(ci)) = (
            table.models.iter().position(|m| m.model == r.model),
            table.angles.iter().position(|&a| a == r.angle),
        ) else {
            continue;
        };
        let v = match metric {
            Metric::Mknn => r.mknn,
            Metric::Cosine => r.cosine,
        };
        let _ = writeln!(
            s,
            r#"<rect class="cell" x="{}" y="{}" width="{CELL_W}" height="{CELL_H}" fill="{}"><title>{} {}: {v:.4}</title></rect>"#,
            LEFT + ci as f64 * CELL_W,
            TOP + ri as f64 * CELL_H,
            colour(scale(v)),
            escape(&r.model),
            r.angle
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">rotation (degrees)</text>"#,
        LEFT + grid_w / 2.0,
        TOP + grid_h + 24.0
    );

    // legend: vertical gradient, maximum at the top
    let _ = writeln!(s, r#"<defs><linearGradient id="scale" x1="0" y1="1" x2="0" y2="0">"#);
    for (i, _) in STOPS.iter().enumerate() {
        let t = i as f64 / (STOPS.len() - 1) as f64;
        let _ = writeln!(s, r#"<stop offset="{t}" stop-color="{}"/>"#, colour(t));
    }
    let _ = writeln!(s, "</linearGradient></defs>");
    let _ = writeln!(
        s,
        r#"<rect class="legend" x="{legend_x}" y="{TOP}" width="{LEGEND_W}" height="{grid_h}" fill="url(#scale)"/>"#
    );
    let lx = legend_x + LEGEND_W + 4.0;
    let _ = writeln!(
        s,
        r#"<text class="legend-max" x="{lx}" y="{}">{hi:.4}</text>"#,
        TOP + 8.0
    );
    let _ = writeln!(
        s,
        r#"<text class="legend-min" x="{lx}" y="{}">{lo:.4}</text>"#,
        TOP + grid_h
    );
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn render_heatmap(table: &AlignmentTable, metric: Metric, path: &Path) -> Result<()> {
    let svg = render_heatmap_svg(table, metric)?;
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{AlignmentRow, ModelInfo};

    fn table(models: &[&str], angles: &[u32], f: impl Fn(usize, u32) -> (f64, f64)) -> AlignmentTable {
        let mut rows = Vec::new();
        for (mi, m) in models.iter().enumerate() {
            for &a in angles {
                let (mknn, cosine) = f(mi, a);
                rows.push(AlignmentRow {
                    model: m.to_string(),
                    angle: a,
                    mknn,
                    cosine,
                });
            }
        }
        AlignmentTable {
            k: 10,
            angles: angles.to_vec(),
            models: models
                .iter()
                .map(|m| ModelInfo {
                    model: m.to_string(),
                    rotation_augmented: false,
                })
                .collect(),
            rows,
            aggregates: vec![],
        }
    }

    fn fills(svg: &str) -> Vec<&str> {
        svg.lines()
            .filter(|l| l.contains(r#"class="cell""#))
            .map(|l| {
                let i = l.find("fill=\"").unwrap() + 6;
                &l[i..i + 7]
            })
            .collect()
    }

    #[test]
    fn constant_scores_give_one_colour() {
        let t = table(&["m"], &[15, 30, 45], |_, _| (0.6, 0.05));
        for metric in [Metric::Mknn, Metric::Cosine] {
            let svg = render_heatmap_svg(&t, metric).unwrap();
            let f = fills(&svg);
            assert_eq!(f.len(), 3);
            assert!(f.iter().all(|c| *c == f[0]));
        }
    }

    #[test]
    fn cell_count() {
        let angles: Vec<u32> = (1..24).map(|i| i * 15).collect();
        let t = table(&["a", "b"], &angles, |m, a| (f64::from(a) / 360.0, m as f64));
        let svg = render_heatmap_svg(&t, Metric::Mknn).unwrap();
        assert_eq!(svg.matches(r#"class="cell""#).count(), 46);
        assert!(svg.contains(r#"class="legend""#));
        assert!(svg.contains(">345<"));
    }

    #[test]
    fn full_score_maps_to_scale_maximum() {
        let t = table(&["m"], &[90, 180], |_, a| (if a == 90 { 1.0 } else { 0.0 }, 0.1));
        let svg = render_heatmap_svg(&t, Metric::Mknn).unwrap();
        let f = fills(&svg);
        assert_eq!(f[0], colour(1.0));
        assert_eq!(f[0], "#fde725");
        assert_eq!(f[1], "#440154");
    }

    #[test]
    fn cosine_uses_observed_range() {
        let t = table(&["m"], &[90, 180, 270], |_, a| (0.5, f64::from(a) / 1000.0));
        let svg = render_heatmap_svg(&t, Metric::Cosine).unwrap();
        let f = fills(&svg);
        assert_eq!(f[0], colour(0.0));
        assert_eq!(f[2], colour(1.0));
        assert!(svg.contains(">0.2700<"));
    }

    #[test]
    fn escapes_model_names() {
        let t = table(&["a<b>&c"], &[90], |_, _| (0.5, 0.5));
        let svg = render_heatmap_svg(&t, Metric::Mknn).unwrap();
        assert!(svg.contains("a&lt;b&gt;&amp;c"));
    }

    #[test]
    fn empty_table_rejected() {
        let t = table(&[], &[], |_, _| (0.0, 0.0));
        assert!(render_heatmap_svg(&t, Metric::Mknn).is_err());
    }
}
