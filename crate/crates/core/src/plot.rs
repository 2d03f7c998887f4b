//! Standalone SVG figure of the first principal plane.
//!
//! One circle per session at its (component 1, component 2) coordinates,
//! colored by cluster, with one ellipse outline per cluster. The canvas is
//! fixed at 800x600 with an equal-aspect data scale so rotated ellipses
//! render without distortion, and every coordinate is formatted with two
//! decimals, making the output bytes a pure function of the report.

use crate::analysis::{AnalysisError, TypologyReport};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 54.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn color(cluster: usize) -> &'static str {
    PALETTE[(cluster - 1) % PALETTE.len()]
}

/// Renders the principal-plane figure for a typology report.
pub fn render_svg(report: &TypologyReport) -> Result<String, AnalysisError> {
    if report.scores.iter().any(|row| row.len() < 2) {
        return Err(AnalysisError::DimensionMismatch);
    }
    if report.labels.len() != report.scores.len() {
        return Err(AnalysisError::LengthMismatch {
            a: report.labels.len(),
            b: report.scores.len(),
        });
    }

    // data bounds over points and ellipse extents
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    let mut include = |x: f64, y: f64| {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    };
    for row in &report.scores {
        include(row[0], row[1]);
    }
    for ellipse in report.ellipses.iter().flatten() {
        let (a, b) = (ellipse.semi_axes[0], ellipse.semi_axes[1]);
        let (sin, cos) = ellipse.angle.sin_cos();
        let dx = ((a * cos) * (a * cos) + (b * sin) * (b * sin)).sqrt();
        let dy = ((a * sin) * (a * sin) + (b * cos) * (b * cos)).sqrt();
        include(ellipse.center[0] - dx, ellipse.center[1] - dy);
        include(ellipse.center[0] + dx, ellipse.center[1] + dy);
    }
    let pad = |lo: &mut f64, hi: &mut f64| {
        let span = *hi - *lo;
        let margin = if span > 0.0 { span * 0.05 } else { 1.0 };
        *lo -= margin;
        *hi += margin;
    };
    pad(&mut x_min, &mut x_max);
    pad(&mut y_min, &mut y_max);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    // equal-aspect scale keeps rotated ellipses faithful
    let scale = (plot_w / (x_max - x_min)).min(plot_h / (y_max - y_min));
    let x_mid = (x_min + x_max) / 2.0;
    let y_mid = (y_min + y_max) / 2.0;
    let cx = MARGIN_LEFT + plot_w / 2.0;
    let cy = MARGIN_TOP + plot_h / 2.0;
    let to_px = |x: f64| cx + (x - x_mid) * scale;
    let to_py = |y: f64| cy - (y - y_mid) * scale;

    let mut svg = String::new();
    svg.push_str(r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    svg.push('\n');
    svg.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    ));
    svg.push('\n');
    svg.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    svg.push('\n');

    // frame and component axes through the origin
    svg.push_str(&format!(
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333" stroke-width="1"/>"##,
        MARGIN_LEFT, MARGIN_TOP, plot_w, plot_h
    ));
    svg.push('\n');
    if x_min < 0.0 && x_max > 0.0 {
        svg.push_str(&format!(
            r##"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="#bbb" stroke-width="1" stroke-dasharray="4 3"/>"##,
            to_px(0.0),
            MARGIN_TOP,
            MARGIN_TOP + plot_h
        ));
        svg.push('\n');
    }
    if y_min < 0.0 && y_max > 0.0 {
        svg.push_str(&format!(
            r##"<line x1="{1:.2}" y1="{0:.2}" x2="{2:.2}" y2="{0:.2}" stroke="#bbb" stroke-width="1" stroke-dasharray="4 3"/>"##,
            to_py(0.0),
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        ));
        svg.push('\n');
    }

    // cluster ellipses under the points
    for (i, slot) in report.ellipses.iter().enumerate() {
        let cluster = i + 1;
        match slot {
            Some(e) => {
                svg.push_str(&format!(
                    r#"<ellipse cx="0" cy="0" rx="{:.2}" ry="{:.2}" transform="translate({:.2} {:.2}) rotate({:.2})" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                    e.semi_axes[0] * scale,
                    e.semi_axes[1] * scale,
                    to_px(e.center[0]),
                    to_py(e.center[1]),
                    -e.angle.to_degrees(),
                    color(cluster),
                ));
                svg.push('\n');
            }
            None => {
                svg.push_str(&format!(
                    "<!-- cluster {cluster}: ellipse omitted (fewer than 3 sessions or degenerate spread) -->\n"
                ));
            }
        }
    }

    for (row, &label) in report.scores.iter().zip(&report.labels) {
        svg.push_str(&format!(
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.75"/>"#,
            to_px(row[0]),
            to_py(row[1]),
            color(label),
        ));
        svg.push('\n');
    }

    // axis captions carry the explained-variance shares
    svg.push_str(&format!(
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle">Dim 1 ({:.1}%)</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 16.0,
        report.explained_ratio[0] * 100.0
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 {0:.2} {1:.2})">Dim 2 ({:.1}%)</text>"#,
        20.0,
        MARGIN_TOP + plot_h / 2.0,
        report.explained_ratio[1] * 100.0
    ));
    svg.push('\n');

    // legend
    let legend_x = WIDTH - MARGIN_RIGHT + 18.0;
    let mut legend_y = MARGIN_TOP + 10.0;
    for profile in &report.profiles {
        svg.push_str(&format!(
            r#"<rect x="{:.2}" y="{:.2}" width="12" height="12" fill="{}"/>"#,
            legend_x,
            legend_y - 10.0,
            color(profile.cluster),
        ));
        svg.push_str(&format!(
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13">Cluster {} (n={})</text>"#,
            legend_x + 18.0,
            legend_y,
            profile.cluster,
            profile.size,
        ));
        svg.push('\n');
        legend_y += 20.0;
    }
    svg.push_str(&format!(
        r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="#555">{:.0}% concentration ellipses</text>"##,
        legend_x,
        legend_y + 6.0,
        report.level * 100.0
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="#555">(chi-squared quantile, 2 dof)</text>"##,
        legend_x,
        legend_y + 20.0
    ));
    svg.push('\n');

    svg.push_str("</svg>\n");
    Ok(svg)
}
