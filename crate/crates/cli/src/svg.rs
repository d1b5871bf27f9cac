//! A small SVG writer: plot frame, markers, polylines and raster heatmaps.
//! Coordinates are printed with fixed precision so output is reproducible.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

fn fmt(x: f64) -> String {
    format!("{x:.2}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Data-to-pixel map of a plot area.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Frame {
    /// Bounds of `points`, widened a little so nothing sits on the border.
    pub fn around(points: &[(f64, f64)]) -> Frame {
        let mut x = (f64::INFINITY, f64::NEG_INFINITY);
        let mut y = x;
        for &(px, py) in points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            x = (x.0.min(px), x.1.max(px));
            y = (y.0.min(py), y.1.max(py));
        }
        let pad = |(lo, hi): (f64, f64)| {
            if !lo.is_finite() {
                return (-1.0, 1.0);
            }
            let d = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
            (lo - d, hi + d)
        };
        Frame { x: pad(x), y: pad(y) }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

pub struct Svg {
    frame: Frame,
    body: String,
}

impl Svg {
    pub fn new(frame: Frame, title: &str, x_label: &str, y_label: &str) -> Svg {
        let mut svg = Svg { frame, body: String::new() };
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            svg.body,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#000"/>"##,
            fmt(l),
            fmt(t),
            fmt(r - l),
            fmt(b - t)
        );
        svg.text(WIDTH / 2.0, MARGIN / 2.0, title, "middle");
        svg.text(WIDTH / 2.0, HEIGHT - 12.0, x_label, "middle");
        svg.text(14.0, HEIGHT / 2.0, y_label, "start");
        for (v, x, anchor) in [(frame.x.0, l, "start"), (frame.x.1, r, "end")] {
            svg.text(x, b + 16.0, &format!("{v:.3}"), anchor);
        }
        for (v, y) in [(frame.y.0, b), (frame.y.1, t + 10.0)] {
            svg.text(l - 4.0, y, &format!("{v:.3}"), "end");
        }
        svg
    }

    fn text(&mut self, x: f64, y: f64, s: &str, anchor: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-size="12" font-family="sans-serif" text-anchor="{anchor}">{}</text>"#,
            fmt(x),
            fmt(y),
            escape(s)
        );
    }

    pub fn markers(&mut self, points: &[(f64, f64)], color: &str) {
        for &(x, y) in points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let _ = writeln!(
                self.body,
                r#"<circle cx="{}" cy="{}" r="2.5" fill="{color}"/>"#,
                fmt(self.frame.px(x)),
                fmt(self.frame.py(y))
            );
        }
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], color: &str) {
        let pts: Vec<String> = points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{},{}", fmt(self.frame.px(x)), fmt(self.frame.py(y))))
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
    }

    /// `values[j][i]` fills the cell at column `i`, row `j` (row 0 at the
    /// bottom) of an even raster over the frame.
    pub fn heatmap(&mut self, values: &[Vec<f64>]) {
        let finite = values.iter().flatten().copied().filter(|v| v.is_finite());
        let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let n_rows = values.len();
        let n_cols = values.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return;
        }
        let cw = (WIDTH - 2.0 * MARGIN) / n_cols as f64;
        let ch = (HEIGHT - 2.0 * MARGIN) / n_rows as f64;
        for (j, row) in values.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                let t = if hi > lo && v.is_finite() { (v - lo) / (hi - lo) } else { 0.0 };
                let _ = writeln!(
                    self.body,
                    r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                    fmt(MARGIN + i as f64 * cw),
                    fmt(HEIGHT - MARGIN - (j + 1) as f64 * ch),
                    fmt(cw + 0.05),
                    fmt(ch + 0.05),
                    ramp(t)
                );
            }
        }
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"{w}\" height=\"{h}\" fill=\"#fff\"/>\n{}</svg>\n",
            self.body,
            w = WIDTH,
            h = HEIGHT
        )
    }
}

/// Dark blue through teal to yellow.
fn ramp(t: f64) -> String {
    let stops = [(0.0, [0x21, 0x1c, 0x5a]), (0.5, [0x1f, 0x9e, 0x89]), (1.0, [0xfd, 0xe7, 0x25])];
    let t = t.clamp(0.0, 1.0);
    let (a, b) = if t <= 0.5 { (stops[0], stops[1]) } else { (stops[1], stops[2]) };
    let u = (t - a.0) / (b.0 - a.0);
    let c: Vec<u8> = (0..3).map(|i| (a.1[i] as f64 + u * (b.1[i] as f64 - a.1[i] as f64)).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Zeros as markers in the complex plane.
pub fn zero_scatter(zeros: &[(f64, f64)], title: &str) -> String {
    let mut svg = Svg::new(Frame::around(zeros), title, "Re k", "Im k");
    svg.markers(zeros, "#c0392b");
    svg.finish()
}

/// Counting functions as steps with their fitted lines.
pub fn density_fit(series: &[(Vec<(f64, f64)>, f64)], title: &str) -> String {
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.0.iter().copied()).chain([(0.0, 0.0)]).collect();
    let frame = Frame::around(&all);
    let mut svg = Svg::new(frame, title, "r", "n(r)");
    let colors = ["#2c7fb8", "#d95f0e", "#31a354", "#756bb1"];
    for (i, (counts, slope)) in series.iter().enumerate() {
        let c = colors[i % colors.len()];
        svg.markers(counts, c);
        let r_hi = counts.iter().map(|p| p.0).fold(0.0, f64::max);
        svg.polyline(&[(0.0, 0.0), (r_hi, slope * r_hi)], c);
    }
    svg.finish()
}

/// Raster of `values` (rows bottom to top) over the given ranges, reduced to
/// at most 200 × 200 cells by striding.
pub fn heatmap(values: &[Vec<f64>], re: (f64, f64), im: (f64, f64), title: &str) -> String {
    let stride = |n: usize| n.div_ceil(200).max(1);
    let (sr, sc) = (stride(values.len()), stride(values.first().map_or(0, Vec::len)));
    let reduced: Vec<Vec<f64>> =
        values.iter().step_by(sr).map(|row| row.iter().step_by(sc).copied().collect()).collect();
    let mut svg = Svg::new(Frame { x: re, y: im }, title, "Re k", "Im k");
    svg.heatmap(&reduced);
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_is_capped_at_200_cells_per_side() {
        let values = vec![vec![0.5; 401]; 450];
        let s = heatmap(&values, (0.0, 1.0), (0.0, 1.0), "t");
        let cells = s.matches("<rect x=").count() - 1;
        assert!(cells <= 200 * 200, "{cells}");
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#211c5a");
        assert_eq!(ramp(1.0), "#fde725");
    }

    #[test]
    fn output_is_reproducible_and_escaped() {
        let a = zero_scatter(&[(1.0, -2.0), (-1.0, -2.0)], "X̂ < 0");
        let b = zero_scatter(&[(1.0, -2.0), (-1.0, -2.0)], "X̂ < 0");
        assert_eq!(a, b);
        assert!(a.contains("X̂ &lt; 0"));
        assert_eq!(a.matches("<circle").count(), 2);
    }
}
