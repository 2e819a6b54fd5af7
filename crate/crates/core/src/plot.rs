//! Minimal standalone SVG charts: line charts and labelled scatter plots.
//!
//! Output is deterministic text (fixed viewport, coordinates with two
//! decimals) so charts can be compared byte for byte.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#d62728",
];

pub fn color_for(label: usize) -> &'static str {
    PALETTE[label % PALETTE.len()]
}

pub fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// "Nice" tick positions (steps of 1, 2 or 5 times a power of ten)
/// covering `[min, max]`.
pub fn nice_ticks(min: f64, max: f64, target: usize) -> Vec<f64> {
    let (lo, hi) = if (max - min).abs() < f64::EPSILON * min.abs().max(1.0) {
        (min - 0.5, max + 0.5)
    } else {
        (min.min(max), min.max(max))
    };
    let raw = (hi - lo) / target.max(1) as f64;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * magnitude);
    let first = (lo / step).floor() as i64;
    let last = (hi / step).ceil() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn format_tick(v: f64) -> String {
    let s = format!("{:.6}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

struct Frame {
    x_ticks: Vec<f64>,
    y_ticks: Vec<f64>,
    x0: f64,
    y0: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn new(
        xs: impl Iterator<Item = f64> + Clone,
        ys: impl Iterator<Item = f64> + Clone,
        x0: f64,
        y0: f64,
        width: f64,
        height: f64,
    ) -> Self {
        let (xmin, xmax) = bounds(xs);
        let (ymin, ymax) = bounds(ys);
        Self {
            x_ticks: nice_ticks(xmin, xmax, 6),
            y_ticks: nice_ticks(ymin, ymax, 6),
            x0,
            y0,
            width,
            height,
        }
    }

    fn sx(&self, x: f64) -> f64 {
        let (lo, hi) = (self.x_ticks[0], *self.x_ticks.last().expect("ticks"));
        self.x0 + MARGIN_LEFT + (x - lo) / (hi - lo) * (self.width - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn sy(&self, y: f64) -> f64 {
        let (lo, hi) = (self.y_ticks[0], *self.y_ticks.last().expect("ticks"));
        self.y0 + self.height - MARGIN_BOTTOM - (y - lo) / (hi - lo) * (self.height - MARGIN_TOP - MARGIN_BOTTOM)
    }

    fn draw(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let left = self.x0 + MARGIN_LEFT;
        let right = self.x0 + self.width - MARGIN_RIGHT;
        let top = self.y0 + MARGIN_TOP;
        let bottom = self.y0 + self.height - MARGIN_BOTTOM;
        let _ = writeln!(
            out,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="16">{}</text>"##,
            self.x0 + self.width / 2.0,
            self.y0 + 24.0,
            escape(title)
        );
        let _ = writeln!(
            out,
            r##"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##,
            right - left,
            bottom - top
        );
        for &t in &self.x_ticks {
            let x = self.sx(t);
            let _ = writeln!(
                out,
                r##"<line class="tick" x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/><text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"##,
                bottom + 5.0,
                bottom + 18.0,
                format_tick(t)
            );
        }
        for &t in &self.y_ticks {
            let y = self.sy(t);
            let _ = writeln!(
                out,
                r##"<line class="tick" x1="{:.2}" y1="{y:.2}" x2="{left:.2}" y2="{y:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"##,
                left - 5.0,
                left - 8.0,
                y + 4.0,
                format_tick(t)
            );
        }
        let _ = writeln!(
            out,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"##,
            (left + right) / 2.0,
            self.y0 + self.height - 15.0,
            escape(x_label)
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13" transform="rotate(-90 {:.2} {:.2})">{}</text>"##,
            self.x0 + 18.0,
            (top + bottom) / 2.0,
            self.x0 + 18.0,
            (top + bottom) / 2.0,
            escape(y_label)
        );
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

fn open_svg(width: f64, height: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"##
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#fff"/>"##);
    out
}

#[derive(Debug, Clone)]
pub struct LineChart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub points: &'a [(f64, f64)],
    /// Draw a marker at every point.
    pub markers: bool,
}

impl LineChart<'_> {
    pub fn to_svg(&self) -> String {
        let mut out = open_svg(WIDTH, HEIGHT);
        let frame = Frame::new(
            self.points.iter().map(|p| p.0),
            self.points.iter().map(|p| p.1),
            0.0,
            0.0,
            WIDTH,
            HEIGHT,
        );
        frame.draw(&mut out, self.title, self.x_label, self.y_label);
        let coords: Vec<String> = self
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.sx(x), frame.sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r##"<polyline class="series" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"##,
            PALETTE[0],
            coords.join(" ")
        );
        if self.markers {
            for &(x, y) in self.points {
                let _ = writeln!(
                    out,
                    r##"<circle class="marker" cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"##,
                    frame.sx(x),
                    frame.sy(y),
                    PALETTE[0]
                );
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
    pub label: usize,
    /// Drawn with an extra red ring.
    pub highlight: bool,
    pub name: String,
}

#[derive(Debug, Clone)]
pub struct ScatterChart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub points: &'a [ScatterPoint],
}

impl ScatterChart<'_> {
    fn draw_panel(&self, out: &mut String, x0: f64, xs: &[f64], ys: &[f64]) {
        let frame = Frame::new(xs.iter().copied(), ys.iter().copied(), x0, 0.0, WIDTH, HEIGHT);
        frame.draw(out, self.title, self.x_label, self.y_label);
        for p in self.points {
            let _ = writeln!(
                out,
                r##"<circle class="point" cx="{:.2}" cy="{:.2}" r="4" fill="{}"><title>{} (cluster {})</title></circle>"##,
                frame.sx(p.x),
                frame.sy(p.y),
                color_for(p.label),
                escape(&p.name),
                p.label
            );
        }
        for p in self.points.iter().filter(|p| p.highlight) {
            let _ = writeln!(
                out,
                r##"<circle class="missed" cx="{:.2}" cy="{:.2}" r="8" fill="none" stroke="#d62728" stroke-width="2"/>"##,
                frame.sx(p.x),
                frame.sy(p.y)
            );
        }
        let mut labels: Vec<usize> = self.points.iter().map(|p| p.label).collect();
        labels.sort_unstable();
        labels.dedup();
        for (i, label) in labels.iter().enumerate() {
            let y = MARGIN_TOP + 14.0 + 16.0 * i as f64;
            let x = x0 + WIDTH - MARGIN_RIGHT - 80.0;
            let _ = writeln!(
                out,
                r##"<circle class="legend" cx="{x:.2}" cy="{:.2}" r="4" fill="{}"/><text x="{:.2}" y="{y:.2}" font-size="11">cluster {label}</text>"##,
                y - 4.0,
                color_for(*label),
                x + 8.0
            );
        }
    }

    pub fn to_svg(&self) -> String {
        let xs: Vec<f64> = self.points.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = self.points.iter().map(|p| p.y).collect();
        let mut out = open_svg(WIDTH, HEIGHT);
        self.draw_panel(&mut out, 0.0, &xs, &ys);
        out.push_str("</svg>\n");
        out
    }
}

/// Two scatter panels side by side sharing axis ranges.
pub fn scatter_pair_svg(left: &ScatterChart<'_>, right: &ScatterChart<'_>) -> String {
    let xs: Vec<f64> = left.points.iter().chain(right.points).map(|p| p.x).collect();
    let ys: Vec<f64> = left.points.iter().chain(right.points).map(|p| p.y).collect();
    let mut out = open_svg(2.0 * WIDTH, HEIGHT);
    out.push_str("<g class=\"panel\">\n");
    left.draw_panel(&mut out, 0.0, &xs, &ys);
    out.push_str("</g>\n<g class=\"panel\">\n");
    right.draw_panel(&mut out, WIDTH, &xs, &ys);
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_range() {
        let t = nice_ticks(0.13, 0.97, 6);
        assert!(t[0] <= 0.13 && *t.last().unwrap() >= 0.97);
        assert!((t[1] - t[0] - 0.2).abs() < 1e-12);
        let flat = nice_ticks(3.0, 3.0, 5);
        assert!(flat.len() >= 2 && flat[0] < 3.0);
    }

    #[test]
    fn tick_labels() {
        assert_eq!(format_tick(0.30000000000000004), "0.3");
        assert_eq!(format_tick(-0.0), "0");
        assert_eq!(format_tick(1000.0), "1000");
    }

    #[test]
    fn escapes_text() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }

    #[test]
    fn line_chart_point_count() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|i| (i as f64, 1.0 / i as f64)).collect();
        let svg = LineChart {
            title: "t",
            x_label: "x",
            y_label: "y",
            points: &pts,
            markers: false,
        }
        .to_svg();
        let poly = svg.lines().find(|l| l.contains("<polyline")).unwrap();
        let attr = poly.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(attr.split(' ').count(), 10);
        assert!(svg.ends_with("</svg>\n"));
    }
}
