//! Minimal text SVG emitter for the sweep curves.
//!
//! One plot per `(eta, n_eff)` pair: `I_p` versus `r`, one polyline per
//! memory value `s`, fixed palette, legend, labeled axes. Text only; no
//! renderer dependency. Plots are for human inspection; the acceptance
//! numbers live in the CSV.

use anyhow::{bail, Result};

use crate::csvio::CsvRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 100.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// One curve: a memory value and its feasible `(r, i_p)` samples.
struct Curve {
    s: f64,
    points: Vec<(f64, f64)>,
}

/// Renders the plot for one `(eta, n_eff)` group. Errors when no feasible
/// points exist (no file should be written in that case).
pub fn render_group(eta: f64, n_eff: f64, rows: &[&CsvRow]) -> Result<String> {
    let mut s_values: Vec<f64> = rows.iter().map(|r| r.s).collect();
    s_values.sort_by(f64::total_cmp);
    s_values.dedup();
    let mut curves = Vec::new();
    for &s in &s_values {
        let mut points: Vec<(f64, f64)> = rows
            .iter()
            .filter(|row| row.s == s && row.feasible)
            .map(|row| (row.r, row.i_p))
            .collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if !points.is_empty() {
            curves.push(Curve { s, points });
        }
    }
    if curves.is_empty() {
        bail!("no feasible points for eta = {eta}, N_eff = {n_eff}; nothing to plot");
    }

    let all = curves.iter().flat_map(|c| c.points.iter());
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if x_max == x_min {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if y_max == y_min {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    let to_px = |x: f64, y: f64| -> (f64, f64) {
        let px = MARGIN_L + (x - x_min) / (x_max - x_min) * (WIDTH - MARGIN_L - MARGIN_R);
        let py = HEIGHT - MARGIN_B - (y - y_min) / (y_max - y_min) * (HEIGHT - MARGIN_T - MARGIN_B);
        (px, py)
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">private information, eta = {eta}, N_eff = {n_eff}</text>\n",
        WIDTH / 2.0
    ));

    // frame
    let (fx0, fy0) = (MARGIN_L, MARGIN_T);
    let (fx1, fy1) = (WIDTH - MARGIN_R, HEIGHT - MARGIN_B);
    svg.push_str(&format!(
        "<rect x=\"{fx0}\" y=\"{fy0}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n",
        fx1 - fx0,
        fy1 - fy0
    ));

    // zero line when visible
    if y_min < 0.0 && y_max > 0.0 {
        let (_, zy) = to_px(x_min, 0.0);
        svg.push_str(&format!(
            "<line x1=\"{fx0}\" y1=\"{zy:.2}\" x2=\"{fx1}\" y2=\"{zy:.2}\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n"
        ));
    }

    // ticks
    for k in 0..=4 {
        let x = x_min + (x_max - x_min) * k as f64 / 4.0;
        let (px, _) = to_px(x, y_min);
        svg.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{fy1}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"#333\"/>\n",
            fy1 + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{x:.2}</text>\n",
            fy1 + 20.0
        ));
        let y = y_min + (y_max - y_min) * k as f64 / 4.0;
        let (_, py) = to_px(x_min, y);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{fx0}\" y2=\"{py:.2}\" stroke=\"#333\"/>\n",
            fx0 - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">{y:.3}</text>\n",
            fx0 - 9.0,
            py + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">r</text>\n",
        (fx0 + fx1) / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 {})\">I_p [bits per use]</text>\n",
        (fy0 + fy1) / 2.0,
        (fy0 + fy1) / 2.0
    ));

    // curves and legend
    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = curve
            .points
            .iter()
            .map(|&(x, y)| {
                let (px, py) = to_px(x, y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        let ly = MARGIN_T + 16.0 + 18.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly:.2}\" x2=\"{}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n",
            fx1 + 8.0,
            fx1 + 30.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">s = {}</text>\n",
            fx1 + 35.0,
            ly + 4.0,
            curve.s
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(s: f64, r: f64, i_p: f64, feasible: bool) -> CsvRow {
        CsvRow { eta: 0.8, s, n_eff: 2.0, r, n: 1.0, chi_out: 1.0, chi_eve: 0.5, i_p, feasible }
    }

    #[test]
    fn renders_one_polyline_per_s() {
        let rows = [
            row(0.0, -1.0, 0.5, true),
            row(0.0, 0.0, 1.0, true),
            row(0.0, 1.0, 0.5, true),
            row(1.0, -1.0, 0.2, true),
            row(1.0, 0.0, 0.6, true),
            row(1.0, 1.0, 0.7, true),
        ];
        let refs: Vec<&CsvRow> = rows.iter().collect();
        let svg = render_group(0.8, 2.0, &refs).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("s = 0"));
        assert!(svg.contains("s = 1"));
        assert!(svg.contains("I_p [bits per use]"));
    }

    #[test]
    fn empty_feasible_set_is_an_error() {
        let rows = [row(0.0, 2.0, f64::NAN, false)];
        let refs: Vec<&CsvRow> = rows.iter().collect();
        assert!(render_group(0.8, 2.0, &refs).is_err());
    }
}
