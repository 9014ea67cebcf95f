//! Minimal static line plots: 800×600 viewBox, linear axes with tick labels,
//! one polyline per series. NaN in a series breaks the line.

use std::fmt::Write;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dash {
    Solid,
    Dashed,
    DashDot,
    Dotted,
}

impl Dash {
    fn attr(self) -> &'static str {
        match self {
            Dash::Solid => "",
            Dash::Dashed => " stroke-dasharray=\"8,5\"",
            Dash::DashDot => " stroke-dasharray=\"9,4,2,4\"",
            Dash::Dotted => " stroke-dasharray=\"2,4\"",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dash: Dash,
    pub color: &'static str,
    /// Draw markers instead of a line.
    pub scatter: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>, dash: Dash, color: &'static str) -> Self {
        Self {
            label: label.into(),
            points,
            dash,
            color,
            scatter: false,
        }
    }
}

/// Line style and color of a regime label.
pub fn regime_style(label: &str) -> (Dash, &'static str) {
    match label {
        "oscillation" => (Dash::Solid, "#1f77b4"),
        "mqst" => (Dash::Dashed, "#d62728"),
        "running_phase" => (Dash::DashDot, "#2ca02c"),
        _ => (Dash::Dotted, "#7f7f7f"),
    }
}

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
}

fn data_range(series: &[Series], pick: impl Fn(&(f64, f64)) -> f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in series {
        for p in &s.points {
            let v = pick(p);
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f < 1.5 {
        1.0
    } else if f < 3.0 {
        2.0
    } else if f < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo, 6);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn render(&self) -> String {
        let (x0, x1) = self.x_range.unwrap_or_else(|| data_range(&self.series, |p| p.0));
        let (y0, y1) = self.y_range.unwrap_or_else(|| data_range(&self.series, |p| p.1));
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut out = String::new();
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"13\">"
        );
        let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
        let _ = writeln!(out, "<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">{}</text>", WIDTH / 2.0, esc(&self.title));
        let _ = writeln!(
            out,
            "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>"
        );
        for t in ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(
                out,
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/><text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
                TOP + ph,
                TOP + ph + 6.0,
                TOP + ph + 22.0,
                tick_label(t)
            );
        }
        for t in ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{LEFT}\" y2=\"{y:.2}\" stroke=\"black\"/><text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
                LEFT - 6.0,
                LEFT - 9.0,
                y + 4.0,
                tick_label(t)
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            LEFT + pw / 2.0,
            HEIGHT - 15.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            out,
            "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>",
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            esc(&self.y_label)
        );
        let _ = writeln!(out, "<clipPath id=\"area\"><rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{pw}\" height=\"{ph}\"/></clipPath>");
        let _ = writeln!(out, "<g clip-path=\"url(#area)\" fill=\"none\" stroke-width=\"1.5\">");
        for s in &self.series {
            let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
            for &(x, y) in &s.points {
                if x.is_finite() && y.is_finite() {
                    runs.last_mut().unwrap().push((sx(x), sy(y)));
                } else if !runs.last().unwrap().is_empty() {
                    runs.push(Vec::new());
                }
            }
            for run in runs.iter().filter(|r| !r.is_empty()) {
                if s.scatter || run.len() == 1 {
                    for (x, y) in run {
                        let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2\" fill=\"{}\" stroke=\"none\"/>", s.color);
                    }
                } else {
                    let mut pts = String::new();
                    for (x, y) in run {
                        let _ = write!(pts, "{x:.2},{y:.2} ");
                    }
                    let _ = writeln!(
                        out,
                        "<polyline points=\"{}\" stroke=\"{}\"{}/>",
                        pts.trim_end(),
                        s.color,
                        s.dash.attr()
                    );
                }
            }
        }
        let _ = writeln!(out, "</g>");

        let mut seen: Vec<&str> = Vec::new();
        let mut row = 0.0;
        for s in &self.series {
            if s.label.is_empty() || seen.contains(&s.label.as_str()) {
                continue;
            }
            seen.push(&s.label);
            let y = TOP + 16.0 + row * 18.0;
            let x = WIDTH - RIGHT - 170.0;
            let _ = writeln!(
                out,
                "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{}\" stroke-width=\"2\"{}/><text x=\"{}\" y=\"{}\">{}</text>",
                x + 30.0,
                s.color,
                s.dash.attr(),
                x + 36.0,
                y + 4.0,
                esc(&s.label)
            );
            row += 1.0;
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_a_horizontal_polyline() {
        let p = Plot {
            series: vec![Series::line("c", vec![(0.0, 2.0), (1.0, 2.0), (2.0, 2.0)], Dash::Solid, "#000")],
            ..Default::default()
        };
        let svg = p.render();
        assert!(svg.contains("viewBox=\"0 0 800 600\""));
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts: Vec<&str> = line.split('"').nth(1).unwrap().split(' ').collect();
        let ys: Vec<&str> = pts.iter().map(|p| p.split(',').nth(1).unwrap()).collect();
        assert!(ys.iter().all(|y| *y == ys[0]));
    }

    #[test]
    fn single_point_rendered_as_marker() {
        let p = Plot {
            series: vec![Series::line("p", vec![(1.0, 1.0)], Dash::Dashed, "#000")],
            ..Default::default()
        };
        let svg = p.render();
        assert!(svg.contains("<circle"));
        assert!(!svg.contains("<polyline"));
    }

    #[test]
    fn nan_breaks_lines() {
        let p = Plot {
            series: vec![Series::line(
                "",
                vec![(0.0, 0.0), (1.0, 1.0), (2.0, f64::NAN), (3.0, 0.0), (4.0, 1.0)],
                Dash::Solid,
                "#000",
            )],
            ..Default::default()
        };
        assert_eq!(p.render().matches("<polyline").count(), 2);
    }

    #[test]
    fn tick_steps() {
        let t = ticks(0.0, 1.0);
        assert_eq!(t.len(), 6);
        assert!((t[3] - 0.6).abs() < 1e-12);
        assert_eq!(tick_label(0.25), "0.25");
    }
}
