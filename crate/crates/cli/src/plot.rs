//! Deterministic two-panel SVG bubble plot for 2×2 tables.
//!
//! Each panel draws a 2×2 grid of circles whose area is proportional to the
//! cell probability, so the radius is proportional to its square root. Both
//! panels share the same radius scale, making the before/after comparison
//! direct. Output bytes depend only on the input tables.

use crate::document::TableDocument;
use crate::error::CliError;

const PANEL_W: f64 = 380.0;
const CANVAS_W: f64 = 2.0 * PANEL_W;
const CANVAS_H: f64 = 400.0;
const GRID_X: f64 = 90.0;
const GRID_Y: f64 = 96.0;
const CELL: f64 = 130.0;
/// Radius of a hypothetical p = 1 circle; keeps every circle inside its cell.
const MAX_RADIUS: f64 = 60.0;

/// Layout of one panel: probabilities, radii, and labeling.
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub axis_names: [String; 2],
    pub level_names: [[String; 2]; 2],
    pub probabilities: [f64; 4],
    pub radii: [f64; 4],
}

impl PlotSpec {
    pub fn from_document(doc: &TableDocument, title: &str) -> Result<PlotSpec, CliError> {
        if doc.dims != 2 {
            return Err(CliError::validation(
                "bubble plot supports 2x2 tables only",
            ));
        }
        let probabilities = *doc.to_table2()?.normalize()?.cells();
        Ok(PlotSpec {
            title: title.to_string(),
            axis_names: [doc.axis_name(0), doc.axis_name(1)],
            level_names: [
                [doc.level_name(0, 0), doc.level_name(0, 1)],
                [doc.level_name(1, 0), doc.level_name(1, 1)],
            ],
            probabilities,
            radii: probabilities.map(|p| p.sqrt() * MAX_RADIUS),
        })
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, size: u32, extra: &str, content: &str) {
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" \
         font-size=\"{size}\"{extra}>{}</text>\n",
        fmt(x),
        fmt(y),
        escape(content)
    ));
}

fn render_panel(out: &mut String, spec: &PlotSpec, origin_x: f64) {
    let gx = origin_x + GRID_X;
    text(
        out,
        origin_x + PANEL_W / 2.0,
        30.0,
        "middle",
        16,
        " font-weight=\"bold\"",
        &spec.title,
    );
    // Column axis name and level labels.
    text(
        out,
        gx + CELL,
        58.0,
        "middle",
        13,
        " font-style=\"italic\"",
        &spec.axis_names[1],
    );
    for col in 0..2 {
        text(
            out,
            gx + CELL * (col as f64 + 0.5),
            82.0,
            "middle",
            12,
            "",
            &spec.level_names[1][col],
        );
    }
    // Row axis name (rotated) and level labels.
    let mid_y = GRID_Y + CELL;
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\" font-style=\"italic\" transform=\"rotate(-90 {} {})\">{}</text>\n",
        fmt(origin_x + 22.0),
        fmt(mid_y),
        fmt(origin_x + 22.0),
        fmt(mid_y),
        escape(&spec.axis_names[0])
    ));
    for row in 0..2 {
        text(
            out,
            gx - 8.0,
            GRID_Y + CELL * (row as f64 + 0.5) + 4.0,
            "end",
            12,
            "",
            &spec.level_names[0][row],
        );
    }
    // Light grid.
    for step in 0..=2 {
        let offset = CELL * step as f64;
        out.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
            fmt(gx + offset),
            fmt(GRID_Y),
            fmt(gx + offset),
            fmt(GRID_Y + 2.0 * CELL)
        ));
        out.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
            fmt(gx),
            fmt(GRID_Y + offset),
            fmt(gx + 2.0 * CELL),
            fmt(GRID_Y + offset)
        ));
    }
    // Bubbles with their probabilities underneath.
    for row in 0..2 {
        for col in 0..2 {
            let idx = 2 * row + col;
            let cx = gx + CELL * (col as f64 + 0.5);
            let cy = GRID_Y + CELL * (row as f64 + 0.5);
            if spec.radii[idx] > 0.0 {
                out.push_str(&format!(
                    "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#4878a8\" \
                     fill-opacity=\"0.75\" stroke=\"#2b4a66\" stroke-width=\"1\"/>\n",
                    fmt(cx),
                    fmt(cy),
                    fmt(spec.radii[idx])
                ));
            }
            text(
                out,
                cx,
                GRID_Y + CELL * (row as f64 + 1.0) - 8.0,
                "middle",
                11,
                " fill=\"#333333\"",
                &format!("{:.3}", spec.probabilities[idx]),
            );
        }
    }
}

/// Renders the two panels side by side into a complete SVG document.
pub fn render_two_panel(before: &PlotSpec, after: &PlotSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\">\n",
        CANVAS_W as u32, CANVAS_H as u32, CANVAS_W as u32, CANVAS_H as u32
    ));
    out.push_str(&format!(
        "  <rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
        CANVAS_W as u32, CANVAS_H as u32
    ));
    render_panel(&mut out, before, 0.0);
    render_panel(&mut out, after, PANEL_W);
    out.push_str("</svg>\n");
    out
}
