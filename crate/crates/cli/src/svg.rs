//! Minimal SVG 1.1 writer: a fixed 800×800 view box onto a data rectangle.

use std::fmt::Write;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 20.0;

pub struct Plot {
    lo: [f64; 2],
    scale: f64,
    body: String,
}

impl Plot {
    /// Fit the bounding box of `points` (equal axis scales).
    pub fn fitting(points: impl IntoIterator<Item = [f64; 2]>) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        if !lo[0].is_finite() {
            (lo, hi) = ([-1.0; 2], [1.0; 2]);
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
        // centre the shorter axis
        let lo = [0, 1].map(|i| 0.5 * (lo[i] + hi[i] - span));
        Plot { lo, scale: (SIZE - 2.0 * MARGIN) / span, body: String::new() }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (MARGIN + (p[0] - self.lo[0]) * self.scale, SIZE - MARGIN - (p[1] - self.lo[1]) * self.scale)
    }

    pub fn line(&mut self, a: [f64; 2], b: [f64; 2], stroke: &str, width: f64) {
        let ((x1, y1), (x2, y2)) = (self.map(a), self.map(b));
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    pub fn dot(&mut self, p: [f64; 2], r: f64, fill: &str) {
        let (x, y) = self.map(p);
        let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{fill}"/>"#);
    }

    pub fn polyline(&mut self, pts: &[[f64; 2]], stroke: &str, closed: bool) {
        if pts.is_empty() {
            return;
        }
        let mut d = String::new();
        for (i, &p) in pts.iter().enumerate() {
            let (x, y) = self.map(p);
            let _ = write!(d, "{}{x:.2},{y:.2} ", if i == 0 { "M" } else { "L" });
        }
        if closed {
            d.push('Z');
        }
        let _ = writeln!(self.body, r#"<path d="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#, d.trim_end());
    }

    pub fn finish(self, title: &str) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
             <title>{}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            escape(title),
            self.body
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
