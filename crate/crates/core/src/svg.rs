//! Minimal SVG renderer for diagnostic plots. Coordinates are printed with
//! three decimals so output is byte-stable.

use std::fmt::Write;

use crate::evaluate::{ScatterRow, SignalRegion};
use crate::pca::PcaResult;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" { "0.000".into() } else { s }
}

#[derive(Debug, Clone)]
enum Mark {
    Points { pts: Vec<(f64, f64)>, color: String, labels: Vec<String> },
    Line { pts: Vec<(f64, f64)>, color: String, dashed: bool },
    Band { lower: Vec<(f64, f64)>, upper: Vec<(f64, f64)>, color: String },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
}

/// A single-panel plot with linear axes.
#[derive(Debug, Clone)]
pub struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    x_range: (f64, f64),
    y_range: (f64, f64),
    marks: Vec<Mark>,
}

/// Data range padded by `pad` of its width; a degenerate range is widened to 1.
pub fn padded_range(values: impl IntoIterator<Item = f64>, pad: f64) -> (f64, f64) {
    let (lo, hi) = values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let w = hi - lo;
    if w <= 0.0 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo - pad * w, hi + pad * w)
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        Plot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_range,
            y_range,
            marks: Vec::new(),
        }
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.x_range
    }

    pub fn y_range(&self) -> (f64, f64) {
        self.y_range
    }

    pub fn points(mut self, pts: Vec<(f64, f64)>, color: &str) -> Self {
        self.marks.push(Mark::Points { pts, color: color.into(), labels: Vec::new() });
        self
    }

    pub fn labelled_points(mut self, pts: Vec<(f64, f64)>, labels: Vec<String>, color: &str) -> Self {
        self.marks.push(Mark::Points { pts, color: color.into(), labels });
        self
    }

    pub fn line(mut self, pts: Vec<(f64, f64)>, color: &str, dashed: bool) -> Self {
        self.marks.push(Mark::Line { pts, color: color.into(), dashed });
        self
    }

    pub fn band(mut self, lower: Vec<(f64, f64)>, upper: Vec<(f64, f64)>, color: &str) -> Self {
        self.marks.push(Mark::Band { lower, upper, color: color.into() });
        self
    }

    /// Dotted rectangle in data coordinates.
    pub fn rect(mut self, x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        self.marks.push(Mark::Rect { x0, y0, x1, y1 });
        self
    }

    fn sx(&self, x: f64) -> f64 {
        let (a, b) = self.x_range;
        LEFT + (x - a) / (b - a) * (WIDTH - LEFT - RIGHT)
    }

    fn sy(&self, y: f64) -> f64 {
        let (a, b) = self.y_range;
        HEIGHT - BOTTOM - (y - a) / (b - a) * (HEIGHT - TOP - BOTTOM)
    }

    fn inside(&self, x: f64, y: f64) -> bool {
        let (xa, xb) = self.x_range;
        let (ya, yb) = self.y_range;
        x >= xa && x <= xb && y >= ya && y <= yb
    }

    fn path(&self, pts: &[(f64, f64)]) -> String {
        pts.iter()
            .map(|&(x, y)| format!("{},{}", num(self.sx(x)), num(self.sy(y))))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
            w = WIDTH,
            h = HEIGHT
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let (x0, x1) = (LEFT, WIDTH - RIGHT);
        let (y0, y1) = (HEIGHT - BOTTOM, TOP);
        let _ = writeln!(
            s,
            r#"<path d="M{} {} H{} M{} {} V{}" stroke="black" fill="none"/>"#,
            num(x0), num(y0), num(x1), num(x0), num(y0), num(y1)
        );
        for k in 0..=TICKS {
            let t = k as f64 / TICKS as f64;
            let xv = self.x_range.0 + t * (self.x_range.1 - self.x_range.0);
            let px = self.sx(xv);
            let _ = writeln!(
                s,
                r#"<line x1="{p}" y1="{a}" x2="{p}" y2="{b}" stroke="black"/><text x="{p}" y="{c}" text-anchor="middle">{v}</text>"#,
                p = num(px), a = num(y0), b = num(y0 + 5.0), c = num(y0 + 18.0), v = num(xv)
            );
            let yv = self.y_range.0 + t * (self.y_range.1 - self.y_range.0);
            let py = self.sy(yv);
            let _ = writeln!(
                s,
                r#"<line x1="{a}" y1="{p}" x2="{b}" y2="{p}" stroke="black"/><text x="{c}" y="{q}" text-anchor="end">{v}</text>"#,
                p = num(py), a = num(x0 - 5.0), b = num(x0), c = num(x0 - 8.0), q = num(py + 4.0), v = num(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
            num(WIDTH / 2.0), num(TOP / 2.0 + 4.0), esc(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            num((x0 + x1) / 2.0), num(HEIGHT - 15.0), esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate(18 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
            num((y0 + y1) / 2.0), esc(&self.y_label)
        );
        for m in &self.marks {
            match m {
                Mark::Band { lower, upper, color } => {
                    let mut poly: Vec<(f64, f64)> = lower.clone();
                    poly.extend(upper.iter().rev());
                    let _ = writeln!(
                        s,
                        r#"<polygon points="{}" fill="{}" fill-opacity="0.35" stroke="none"/>"#,
                        self.path(&poly), color
                    );
                }
                Mark::Line { pts, color, dashed } => {
                    let dash = if *dashed { r#" stroke-dasharray="6 4""# } else { "" };
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{}/>"#,
                        self.path(pts), color, dash
                    );
                }
                Mark::Rect { x0, y0, x1, y1 } => {
                    let (ax, bx) = (self.sx(x0.min(*x1)), self.sx(x0.max(*x1)));
                    let (ay, by) = (self.sy(y0.max(*y1)), self.sy(y0.min(*y1)));
                    let _ = writeln!(
                        s,
                        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black" stroke-dasharray="2 3"/>"#,
                        num(ax), num(ay), num(bx - ax), num(by - ay)
                    );
                }
                Mark::Points { pts, color, labels } => {
                    for (i, &(x, y)) in pts.iter().enumerate() {
                        if !self.inside(x, y) {
                            continue;
                        }
                        let (px, py) = (self.sx(x), self.sy(y));
                        let _ = writeln!(
                            s,
                            r#"<circle cx="{}" cy="{}" r="3" fill="{}"/>"#,
                            num(px), num(py), color
                        );
                        if let Some(l) = labels.get(i) {
                            let _ = writeln!(
                                s,
                                r#"<text x="{}" y="{}" font-size="9" fill="{}">{}</text>"#,
                                num(px + 4.0), num(py - 4.0), color, esc(l)
                            );
                        }
                    }
                }
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Non-normal metrics in red, the rest in black.
fn split_by_normality<T>(rows: &[ScatterRow], f: impl Fn(&ScatterRow) -> T) -> [(Vec<T>, Vec<String>); 2] {
    let mut red = (Vec::new(), Vec::new());
    let mut black = (Vec::new(), Vec::new());
    for r in rows {
        let bucket = if r.approx_normal == Some(false) { &mut red } else { &mut black };
        bucket.0.push(f(r));
        bucket.1.push(r.metric.clone());
    }
    [black, red]
}

/// Estimated slab fraction against negative entropy, one point per metric.
/// With `zoom`, the axes are clipped to the high-signal rectangle.
pub fn signal_scatter(rows: &[ScatterRow], region: &SignalRegion, zoom: bool) -> String {
    let (xr, yr) = if zoom {
        ((region.min_neg_entropy, 0.0), (region.min_p1, 1.0))
    } else {
        let (xa, _) = padded_range(rows.iter().map(|r| r.neg_entropy).chain([region.min_neg_entropy]), 0.05);
        ((xa.min(-0.7), 0.0), (0.0, 1.0))
    };
    let title = if zoom { "High-signal region" } else { "Signal by metric" };
    let [black, red] = split_by_normality(rows, |r| (r.neg_entropy, r.p1_hat));
    let mut plot = Plot::new(title, "negative entropy", "p1 estimate", xr, yr);
    if zoom {
        plot = plot.labelled_points(black.0, black.1, "black").labelled_points(red.0, red.1, "red");
    } else {
        plot = plot
            .points(black.0, "black")
            .points(red.0, "red")
            .rect(region.min_neg_entropy, region.min_p1, 0.0, 1.0);
    }
    plot.render()
}

/// Lasso% (vertical) against one of the signal measures, coloured by normality.
/// `points` pairs each scatter row with its Lasso%.
pub fn lasso_scatter(points: &[(ScatterRow, f64)], use_entropy: bool) -> String {
    let rows: Vec<ScatterRow> = points.iter().map(|(r, _)| r.clone()).collect();
    let pct: std::collections::HashMap<&str, f64> =
        points.iter().map(|(r, p)| (r.metric.as_str(), *p)).collect();
    let x_of = |r: &ScatterRow| if use_entropy { r.neg_entropy } else { r.p1_hat };
    let [black, red] = split_by_normality(&rows, |r| (x_of(r), pct[r.metric.as_str()]));
    let x_label = if use_entropy { "negative entropy" } else { "p1 estimate" };
    let xr = if use_entropy { padded_range(rows.iter().map(x_of), 0.05) } else { (0.0, 1.0) };
    Plot::new("Lasso% by metric", x_label, "Lasso%", xr, (0.0, 100.0))
        .points(black.0, "black")
        .points(red.0, "red")
        .render()
}

/// Observed eigenvalues (black) over the permutation band (grey) and the
/// bootstrap interval (red).
pub fn scree(result: &PcaResult, title: &str) -> String {
    scree_bands(&result.spectrum.eigenvalues, &result.null_band, &result.boot_low, &result.boot_high, title)
}

/// [`scree`] from plain per-component columns.
pub fn scree_bands(observed: &[f64], null_band: &[f64], boot_low: &[f64], boot_high: &[f64], title: &str) -> String {
    let idx = |v: &[f64]| -> Vec<(f64, f64)> { v.iter().enumerate().map(|(k, &y)| ((k + 1) as f64, y)).collect() };
    let p = observed.len() as f64;
    let y_hi = observed.iter().chain(boot_high).chain(null_band).fold(1.0_f64, |a, &b| a.max(b));
    let zeros = vec![0.0; null_band.len()];
    Plot::new(title, "component", "variance", (0.5, p + 0.5), (0.0, y_hi * 1.05))
        .band(idx(&zeros), idx(null_band), "grey")
        .band(idx(boot_low), idx(boot_high), "red")
        .line(idx(observed), "black", false)
        .points(idx(observed), "black")
        .render()
}
