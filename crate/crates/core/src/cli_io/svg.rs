//! Minimal deterministic SVG 1.1 plots: line series and grayscale heat maps.

use std::fmt::Write;

use crate::phase_space::PhaseField;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotStyle {
    pub width: f64,
    pub height: f64,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

impl PlotStyle {
    pub fn titled(title: &str, x_label: &str, y_label: &str) -> Self {
        PlotStyle {
            width: 640.0,
            height: 480.0,
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
        }
    }
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self::titled("", "", "")
    }
}

const MARGIN: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f4e79", "#b03a2e", "#1e8449", "#7d3c98", "#b9770e", "#555555"];

fn escape_text(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, style: &PlotStyle) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#,
        w = style.width,
        h = style.height
    );
    if !style.title.is_empty() {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
            style.width / 2.0,
            escape_text(&style.title)
        );
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

/// One polyline per series, a frame and axis labels.
pub fn plot_series(series: &[Series], style: &PlotStyle) -> Result<String> {
    let finite = |p: &&(f64, f64)| p.0.is_finite() && p.1.is_finite();
    if series.is_empty() || series.iter().all(|s| s.points.iter().filter(finite).count() == 0) {
        return Err(Error::EmptyData);
    }
    let all = || series.iter().flat_map(|s| s.points.iter().filter(finite));
    let (x0, x1) = bounds(all().map(|p| p.0));
    let (y0, y1) = bounds(all().map(|p| p.1));
    let pw = style.width - 2.0 * MARGIN;
    let ph = style.height - 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| style.height - MARGIN - (y - y0) / (y1 - y0) * ph;
    let mut out = String::new();
    header(&mut out, style);
    let _ = writeln!(
        out,
        r#"<path d="M{m:.1} {m:.1} V{b:.1} H{r:.1}" fill="none" stroke="black" stroke-width="1"/>"#,
        m = MARGIN,
        b = style.height - MARGIN,
        r = style.width - MARGIN
    );
    let label = |out: &mut String, x: f64, y: f64, anchor: &str, text: &str| {
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{}</text>"#,
            escape_text(text)
        );
    };
    label(&mut out, MARGIN, style.height - MARGIN + 15.0, "middle", &format!("{x0:.4}"));
    label(&mut out, style.width - MARGIN, style.height - MARGIN + 15.0, "middle", &format!("{x1:.4}"));
    label(&mut out, MARGIN - 4.0, style.height - MARGIN, "end", &format!("{y0:.4}"));
    label(&mut out, MARGIN - 4.0, MARGIN, "end", &format!("{y1:.4}"));
    label(&mut out, style.width / 2.0, style.height - 10.0, "middle", &style.x_label);
    label(&mut out, 12.0, style.height / 2.0, "start", &style.y_label);
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s.points.iter().filter(finite).map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"><title>{}</title></polyline>"#,
            pts.join(" "),
            escape_text(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Linear grayscale heat map, one rect per cell, white at the maximum.
/// Row `q` of the field is drawn with `ξ` increasing upwards.
pub fn plot_field(field: &PhaseField, style: &PlotStyle) -> Result<String> {
    let k = field.k;
    if k == 0 || field.values.len() != k * k {
        return Err(Error::EmptyData);
    }
    let (lo, hi) = bounds(field.values.iter().copied().filter(|v| v.is_finite()));
    let side = (style.width.min(style.height) - 2.0 * MARGIN).max(1.0);
    let cell = side / k as f64;
    let mut out = String::new();
    header(&mut out, style);
    for q in 0..k {
        for p in 0..k {
            let v = field.values[q * k + p];
            let level = if v.is_finite() { ((v - lo) / (hi - lo) * 255.0).round() as u8 } else { 0 };
            let _ = writeln!(
                out,
                r##"<rect x="{:.3}" y="{:.3}" width="{c:.3}" height="{c:.3}" fill="#{level:02x}{level:02x}{level:02x}"/>"##,
                MARGIN + p as f64 * cell,
                MARGIN + (k - 1 - q) as f64 * cell,
                c = cell
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_polyline_per_series() {
        let svg = plot_series(&[Series::new("a", vec![(0.0, 0.0), (1.0, 1.0)])], &PlotStyle::default()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
        let two = plot_series(
            &[Series::new("a", vec![(0.0, 0.0), (1.0, 1.0)]), Series::new("b<", vec![(0.0, 1.0), (1.0, 0.0)])],
            &PlotStyle::default(),
        )
        .unwrap();
        assert_eq!(two.matches("<polyline").count(), 2);
        assert!(two.contains("b&lt;"));
    }

    #[test]
    fn one_rect_per_cell() {
        let field = PhaseField { k: 2, values: vec![0.0, 1.0, 2.0, 3.0] };
        let svg = plot_field(&field, &PlotStyle::default()).unwrap();
        assert_eq!(svg.matches("<rect").count(), 4);
        assert!(svg.contains("#ffffff") && svg.contains("#000000"));
    }

    #[test]
    fn deterministic_and_empty() {
        let s = [Series::new("a", vec![(0.1, 3.0), (0.2, 2.5), (0.3, 2.75)])];
        assert_eq!(plot_series(&s, &PlotStyle::default()).unwrap(), plot_series(&s, &PlotStyle::default()).unwrap());
        assert!(matches!(plot_series(&[], &PlotStyle::default()), Err(Error::EmptyData)));
        assert!(matches!(plot_series(&[Series::new("e", vec![])], &PlotStyle::default()), Err(Error::EmptyData)));
        assert!(matches!(plot_field(&PhaseField { k: 0, values: vec![] }, &PlotStyle::default()), Err(Error::EmptyData)));
    }
}
