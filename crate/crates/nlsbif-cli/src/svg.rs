//! Minimal SVG line plots: axes, ticks, polylines, legend. No external
//! plotting dependency; CSVs stay the source of truth. Output contains no
//! timestamps so artifacts are byte-reproducible.

#[derive(Debug, Clone, Copy)]
pub enum LineStyle {
    Solid,
    Dashed,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub style: LineStyle,
}

pub const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// Optional horizontal guide (e.g. the zero line of an eigenvalue plot).
    pub hline: Option<f64>,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
            hline: None,
        }
    }

    pub fn add(&mut self, label: &str, points: Vec<(f64, f64)>, style: LineStyle) {
        let color = COLORS[self.series.len() % COLORS.len()];
        self.series.push(Series { label: label.to_string(), points, color, style });
    }

    fn map_x(&self, x: f64) -> f64 {
        if self.log_x {
            x.ln()
        } else {
            x
        }
    }

    fn map_y(&self, y: f64) -> f64 {
        if self.log_y {
            y.ln()
        } else {
            y
        }
    }

    pub fn render(&self) -> String {
        const W: f64 = 720.0;
        const H: f64 = 480.0;
        const ML: f64 = 72.0;
        const MR: f64 = 24.0;
        const MT: f64 = 40.0;
        const MB: f64 = 56.0;

        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                if self.log_x && x <= 0.0 || self.log_y && y <= 0.0 {
                    continue;
                }
                if x.is_finite() && y.is_finite() {
                    xs.push(self.map_x(x));
                    ys.push(self.map_y(y));
                }
            }
        }
        if let Some(h) = self.hline {
            if !(self.log_y && h <= 0.0) {
                ys.push(self.map_y(h));
            }
        }
        let (x0, x1) = bounds(&xs);
        let (y0, y1) = bounds(&ys);
        let px = |x: f64| ML + (self.map_x(x) - x0) / (x1 - x0) * (W - ML - MR);
        let py = |y: f64| H - MB - (self.map_y(y) - y0) / (y1 - y0) * (H - MT - MB);

        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
        ));
        out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        out.push_str(&format!(
            "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
            W / 2.0,
            esc(&self.title)
        ));
        // Frame.
        out.push_str(&format!(
            "<rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
            W - ML - MR,
            H - MT - MB
        ));
        // Ticks.
        for (t, mapped) in ticks(x0, x1, 6, self.log_x) {
            let x = ML + (mapped - x0) / (x1 - x0) * (W - ML - MR);
            out.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#444\"/>\n",
                H - MB,
                H - MB + 5.0
            ));
            out.push_str(&format!(
                "<text x=\"{x:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                H - MB + 18.0,
                t
            ));
        }
        for (t, mapped) in ticks(y0, y1, 6, self.log_y) {
            let y = H - MB - (mapped - y0) / (y1 - y0) * (H - MT - MB);
            out.push_str(&format!(
                "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{ML}\" y2=\"{y:.2}\" stroke=\"#444\"/>\n",
                ML - 5.0
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                ML - 8.0,
                y + 4.0,
                t
            ));
        }
        // Axis labels.
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
            ML + (W - ML - MR) / 2.0,
            H - 12.0,
            esc(&self.x_label)
        ));
        out.push_str(&format!(
            "<text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
            MT + (H - MT - MB) / 2.0,
            MT + (H - MT - MB) / 2.0,
            esc(&self.y_label)
        ));
        // Zero/guide line.
        if let Some(h) = self.hline {
            if !(self.log_y && h <= 0.0) && self.map_y(h) >= y0 && self.map_y(h) <= y1 {
                let y = py(h);
                out.push_str(&format!(
                    "<line x1=\"{ML}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"#999\" stroke-dasharray=\"2,3\"/>\n",
                    W - MR
                ));
            }
        }
        // Series.
        for s in &self.series {
            let mut path = String::new();
            for &(x, y) in &s.points {
                if self.log_x && x <= 0.0 || self.log_y && y <= 0.0 {
                    continue;
                }
                if !x.is_finite() || !y.is_finite() {
                    continue;
                }
                let cmd = if path.is_empty() { "M" } else { "L" };
                path.push_str(&format!("{cmd}{:.2},{:.2} ", px(x), py(y)));
            }
            let dash = match s.style {
                LineStyle::Solid => "",
                LineStyle::Dashed => " stroke-dasharray=\"6,4\"",
            };
            out.push_str(&format!(
                "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\"{}/>\n",
                path.trim_end(),
                s.color,
                dash
            ));
        }
        // Legend.
        for (i, s) in self.series.iter().enumerate() {
            let y = MT + 16.0 + 18.0 * i as f64;
            let dash = match s.style {
                LineStyle::Solid => "",
                LineStyle::Dashed => " stroke-dasharray=\"6,4\"",
            };
            out.push_str(&format!(
                "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"{}\" stroke-width=\"1.6\"{}/>\n",
                ML + 10.0,
                ML + 40.0,
                s.color,
                dash
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                ML + 46.0,
                y + 4.0,
                esc(&s.label)
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Compact numeric label (scientific for very large/small magnitudes).
fn short(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a >= 1e4 || a < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

/// Tick positions in mapped coordinates, labeled in data coordinates.
fn ticks(lo: f64, hi: f64, n: usize, log: bool) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    let span = hi - lo;
    let raw_step = span / n as f64;
    let mag = 10f64.powf(raw_step.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= n as f64 + 0.5)
        .unwrap_or(mag * 10.0);
    let first = (lo / step).ceil() * step;
    let mut t = first;
    while t <= hi + 1e-9 * step {
        let label = if log { short(t.exp()) } else { short(t) };
        out.push((label, t));
        t += step;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_deterministic_svg() {
        let mut p = Plot::new("demo", "E", "N");
        p.add("branch", vec![(1.0, 2.0), (2.0, 3.0), (3.0, 2.5)], LineStyle::Solid);
        p.hline = Some(2.5);
        let a = p.render();
        let b = p.render();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("</svg>"));
        assert!(a.contains("branch"));
        assert!(!a.to_lowercase().contains("date"));
    }

    #[test]
    fn log_axes_drop_nonpositive_points() {
        let mut p = Plot::new("log", "E", "N");
        p.log_x = true;
        p.log_y = true;
        p.add("s", vec![(0.0, 1.0), (1.0, 1.0), (10.0, 10.0)], LineStyle::Dashed);
        let svg = p.render();
        assert!(svg.contains("<path"));
    }
}
