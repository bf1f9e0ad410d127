//! Standalone SVG 1.1 emission for the experiment outputs: grouped bar
//! charts for the case-ratio figures, triangle heatmaps for the simplex
//! sweep. String-built on purpose; no plotting dependency.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SvgError {
    #[error("no data to plot")]
    EmptyData,
    #[error("degenerate data extent: {0}")]
    DegenerateExtent(String),
}

pub const CANVAS_WIDTH: f64 = 640.0;
pub const CANVAS_HEIGHT: f64 = 480.0;

const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// 16 fixed fill colors; heatmap cells cycle through them in order of first
/// appearance of their color key.
pub const PALETTE: [&str; 16] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac", "#1f77b4", "#aec7e8", "#2ca02c", "#98df8a", "#d62728", "#ff9896",
];

/// Series colors for the two-case bar charts.
const SERIES_COLORS: [&str; 4] = ["#2b6cb0", "#c53030", "#2f855a", "#b7791f"];

#[derive(Debug, Clone)]
pub struct BarSeries {
    pub label: String,
    pub values: Vec<f64>,
}

fn header(title: &str) -> String {
    format!(
        concat!(
            r#"<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" "#,
            r#"viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
            "\n",
            r#"<text x="{cx}" y="22" text-anchor="middle" font-size="16">{title}</text>"#,
            "\n"
        ),
        w = CANVAS_WIDTH,
        h = CANVAS_HEIGHT,
        cx = CANVAS_WIDTH / 2.0,
        title = escape(title),
    )
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(x_label: &str, y_label: &str) -> String {
    let x0 = MARGIN_LEFT;
    let x1 = CANVAS_WIDTH - MARGIN_RIGHT;
    let y0 = CANVAS_HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let mut out = String::new();
    out.push_str(&format!(
        "<line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x1:.1}\" y2=\"{y0:.1}\" stroke=\"black\"/>\n"
    ));
    out.push_str(&format!(
        "<line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x0:.1}\" y2=\"{y1:.1}\" stroke=\"black\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
        (x0 + x1) / 2.0,
        CANVAS_HEIGHT - 12.0,
        escape(x_label),
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label),
    ));
    out
}

/// Grouped bar chart: one group per category, one bar per series value.
/// Emits exactly one `rect` element per bar; the legend is colored text so
/// rect count equals bar count.
pub fn bar_chart(
    title: &str,
    x_label: &str,
    categories: &[String],
    series: &[BarSeries],
) -> Result<String, SvgError> {
    if categories.is_empty() || series.is_empty() || series.iter().all(|s| s.values.is_empty()) {
        return Err(SvgError::EmptyData);
    }
    for s in series {
        if s.values.len() != categories.len() {
            return Err(SvgError::DegenerateExtent(format!(
                "series '{}' has {} values for {} categories",
                s.label,
                s.values.len(),
                categories.len()
            )));
        }
    }
    let data_max = series
        .iter()
        .flat_map(|s| s.values.iter())
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !data_max.is_finite() {
        return Err(SvgError::DegenerateExtent("non-finite value".into()));
    }
    // Ratios live in [0, 1]; keep that scale unless the data exceeds it.
    let y_max = if data_max <= 1.0 { 1.0 } else { data_max };

    let x0 = MARGIN_LEFT;
    let x1 = CANVAS_WIDTH - MARGIN_RIGHT;
    let y0 = CANVAS_HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let plot_w = x1 - x0;
    let plot_h = y0 - y1;

    let mut out = header(title);
    out.push_str(&axes(x_label, "ratio"));

    // Horizontal gridlines and y ticks at 0, 0.25, ..., 1 of the range.
    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        let y = y0 - frac * plot_h;
        out.push_str(&format!(
            "<line x1=\"{x0:.1}\" y1=\"{y:.1}\" x2=\"{x1:.1}\" y2=\"{y:.1}\" stroke=\"#dddddd\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"10\">{:.2}</text>\n",
            x0 - 5.0,
            y + 3.0,
            frac * y_max,
        ));
    }

    let group_w = plot_w / categories.len() as f64;
    let bar_w = group_w * 0.8 / series.len() as f64;
    for (ci, cat) in categories.iter().enumerate() {
        let group_x = x0 + ci as f64 * group_w + group_w * 0.1;
        for (si, s) in series.iter().enumerate() {
            let v = s.values[ci].clamp(0.0, y_max);
            let h = v / y_max * plot_h;
            let bx = group_x + si as f64 * bar_w;
            let by = y0 - h;
            out.push_str(&format!(
                "<rect x=\"{bx:.2}\" y=\"{by:.2}\" width=\"{bar_w:.2}\" height=\"{h:.2}\" fill=\"{}\"/>\n",
                SERIES_COLORS[si % SERIES_COLORS.len()],
            ));
        }
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
            group_x + group_w * 0.4,
            y0 + 16.0,
            escape(cat),
        ));
    }

    for (si, s) in series.iter().enumerate() {
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"{}\">{}</text>\n",
            x1 - 140.0,
            y1 + 16.0 * si as f64 + 4.0,
            SERIES_COLORS[si % SERIES_COLORS.len()],
            escape(&s.label),
        ));
    }

    out.push_str("</svg>\n");
    Ok(out)
}

/// One cell of the triangle heatmap: simplex coordinates and the palette
/// index of its color key.
#[derive(Debug, Clone, Copy)]
pub struct HeatCell {
    pub p1: f64,
    pub p2: f64,
    pub color_index: usize,
}

/// Triangle heatmap over the 3-type simplex: one filled square cell per grid
/// point at `(P1, P2)`, colored through [`PALETTE`]. Emits exactly one
/// `rect` per cell.
pub fn triangle_heatmap(title: &str, cells: &[HeatCell], step: f64) -> Result<String, SvgError> {
    if cells.is_empty() {
        return Err(SvgError::EmptyData);
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(SvgError::DegenerateExtent(format!("step {step}")));
    }
    let x0 = MARGIN_LEFT;
    let x1 = CANVAS_WIDTH - MARGIN_RIGHT;
    let y0 = CANVAS_HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let plot = (x1 - x0).min(y0 - y1);

    let mut out = header(title);
    out.push_str(&axes("P(theta_1)", "P(theta_2)"));

    // Ticks every 0.25 on both axes.
    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"10\">{:.2}</text>\n",
            x0 + frac * plot,
            y0 + 14.0,
            frac,
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"10\">{:.2}</text>\n",
            x0 - 5.0,
            y0 - frac * plot + 3.0,
            frac,
        ));
    }

    let cell_px = step * plot;
    for cell in cells {
        let cx = x0 + cell.p1 * plot;
        let cy = y0 - cell.p2 * plot;
        out.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
            cx - cell_px / 2.0,
            cy - cell_px / 2.0,
            cell_px,
            cell_px,
            PALETTE[cell.color_index % PALETTE.len()],
        ));
    }

    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect_count(svg: &str) -> usize {
        svg.matches("<rect").count()
    }

    #[test]
    fn single_bar_single_rect() {
        let svg = bar_chart(
            "t",
            "x",
            &["a".to_string()],
            &[BarSeries {
                label: "s".to_string(),
                values: vec![1.0],
            }],
        )
        .unwrap();
        assert_eq!(rect_count(&svg), 1);
        assert!(svg.starts_with("<svg version=\"1.1\""));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_series_rejected() {
        assert!(matches!(
            bar_chart("t", "x", &[], &[]),
            Err(SvgError::EmptyData)
        ));
        assert!(matches!(
            triangle_heatmap("t", &[], 0.05),
            Err(SvgError::EmptyData)
        ));
    }

    #[test]
    fn heatmap_rect_per_cell() {
        let cells: Vec<HeatCell> = [(0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.0, 1.0)]
            .iter()
            .map(|&(p1, p2)| HeatCell {
                p1,
                p2,
                color_index: 0,
            })
            .collect();
        let svg = triangle_heatmap("t", &cells, 0.5).unwrap();
        assert_eq!(rect_count(&svg), 6);
    }

    #[test]
    fn mismatched_series_length_rejected() {
        let err = bar_chart(
            "t",
            "x",
            &["a".to_string(), "b".to_string()],
            &[BarSeries {
                label: "s".to_string(),
                values: vec![1.0],
            }],
        )
        .unwrap_err();
        assert!(matches!(err, SvgError::DegenerateExtent(_)));
    }
}
