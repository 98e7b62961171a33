//! Static SVG plots of droplet boundaries.

use std::fmt::Write as _;

use dysonlab::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SvgError {
    #[error("nothing to plot")]
    NoPolylines,
    #[error("polyline {0:?} has fewer than two points")]
    TooShort(String),
    #[error("polyline {0:?} has a non-finite point")]
    NonFinite(String),
}

/// A closed boundary curve with its legend label.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub label: String,
    pub points: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    pub size: f64,
    pub margin: f64,
    pub stroke_width: f64,
    pub palette: Vec<&'static str>,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self {
            size: 640.0,
            margin: 48.0,
            stroke_width: 1.5,
            palette: vec![
                "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                "#bcbd22", "#17becf",
            ],
        }
    }
}

/// Largest 1, 2 or 5 times a power of ten not above `x`.
fn nice_length(x: f64) -> f64 {
    let p = 10f64.powf(x.log10().floor());
    [5.0, 2.0, 1.0].into_iter().map(|m| m * p).find(|v| *v <= x).unwrap_or(p)
}

/// Renders the polylines as one closed path each, with axes through the
/// origin, a scale bar and a legend. Points are drawn as given.
pub fn emit_svg(polylines: &[Polyline], style: &SvgStyle) -> Result<String, SvgError> {
    if polylines.is_empty() {
        return Err(SvgError::NoPolylines);
    }
    let mut lo = Complex64::new(0.0, 0.0);
    let mut hi = Complex64::new(0.0, 0.0);
    for line in polylines {
        if line.points.len() < 2 {
            return Err(SvgError::TooShort(line.label.clone()));
        }
        for p in &line.points {
            if !(p.re.is_finite() && p.im.is_finite()) {
                return Err(SvgError::NonFinite(line.label.clone()));
            }
            lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
    }
    let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-12) * 1.1;
    let center = (lo + hi) * 0.5;
    let plot = style.size - 2.0 * style.margin;
    let scale = plot / span;
    let x = |v: f64| style.margin + plot / 2.0 + (v - center.re) * scale;
    let y = |v: f64| style.margin + plot / 2.0 - (v - center.im) * scale;

    let mut s = String::new();
    let size = style.size;
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let (x0, x1) = (style.margin, size - style.margin);
    let _ = writeln!(
        s,
        "<line x1=\"{x0:.2}\" y1=\"{:.2}\" x2=\"{x1:.2}\" y2=\"{:.2}\" stroke=\"#bbbbbb\" stroke-width=\"0.8\"/>",
        y(0.0),
        y(0.0)
    );
    let _ = writeln!(
        s,
        "<line x1=\"{:.2}\" y1=\"{x0:.2}\" x2=\"{:.2}\" y2=\"{x1:.2}\" stroke=\"#bbbbbb\" stroke-width=\"0.8\"/>",
        x(0.0),
        x(0.0)
    );

    for (k, line) in polylines.iter().enumerate() {
        let colour = style.palette[k % style.palette.len()];
        let mut d = String::new();
        for (j, p) in line.points.iter().enumerate() {
            let _ = write!(d, "{}{:.3} {:.3} ", if j == 0 { "M" } else { "L" }, x(p.re), y(p.im));
        }
        d.push('Z');
        let _ = writeln!(
            s,
            r#"<path d="{d}" fill="none" stroke="{colour}" stroke-width="{}"><title>{}</title></path>"#,
            style.stroke_width,
            escape(&line.label)
        );
    }

    let bar = nice_length(span / 4.0);
    let bx = style.margin;
    let by = size - style.margin / 2.0;
    let _ = writeln!(
        s,
        r#"<line x1="{bx:.2}" y1="{by:.2}" x2="{:.2}" y2="{by:.2}" stroke="black" stroke-width="2"/>"#,
        bx + bar * scale
    );
    let _ = writeln!(
        s,
        r#"<text x="{bx:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{bar}</text>"#,
        by - 5.0
    );

    let lx = size - style.margin - 110.0;
    for (k, line) in polylines.iter().enumerate() {
        let colour = style.palette[k % style.palette.len()];
        let ly = style.margin / 2.0 + 14.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
            lx + 24.0,
            ly + 4.0,
            escape(&line.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nice_lengths() {
        assert_eq!(nice_length(0.3), 0.2);
        assert_eq!(nice_length(0.7), 0.5);
        assert_eq!(nice_length(1.0), 1.0);
        assert_eq!(nice_length(19.0), 10.0);
    }

    #[test]
    fn labels_are_escaped() {
        let line = Polyline {
            label: "a<b".into(),
            points: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0)],
        };
        let svg = emit_svg(&[line], &SvgStyle::default()).unwrap();
        assert!(svg.contains("a&lt;b") && !svg.contains("a<b"));
    }
}
