//! Minimal SVG writer for half-plane plots.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const PAD: f64 = 36.0;

pub struct Plot {
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: String,
    title: String,
}

impl Plot {
    /// Plot window covering the given data box with equal axis scales.
    pub fn new(title: &str, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let (mut x0, mut x1) = x_range;
        let (mut y0, mut y1) = y_range;
        if !(x1 > x0) {
            x0 -= 1.0;
            x1 += 1.0;
        }
        if !(y1 > y0) {
            y1 = y0 + 1.0;
        }
        let sx = (x1 - x0) / (WIDTH - 2.0 * PAD);
        let sy = (y1 - y0) / (HEIGHT - 2.0 * PAD);
        let s = sx.max(sy);
        let cx = 0.5 * (x0 + x1);
        let cy = 0.5 * (y0 + y1);
        x0 = cx - 0.5 * s * (WIDTH - 2.0 * PAD);
        x1 = cx + 0.5 * s * (WIDTH - 2.0 * PAD);
        y0 = cy - 0.5 * s * (HEIGHT - 2.0 * PAD);
        y1 = cy + 0.5 * s * (HEIGHT - 2.0 * PAD);
        Self {
            x_range: (x0, x1),
            y_range: (y0, y1),
            body: String::new(),
            title: title.to_string(),
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        (
            PAD + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * PAD),
            HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * PAD),
        )
    }

    fn scale(&self) -> f64 {
        (WIDTH - 2.0 * PAD) / (self.x_range.1 - self.x_range.0)
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64, dashed: bool) {
        if pts.is_empty() {
            return;
        }
        let mut d = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            let (px, py) = self.map(*x, *y);
            let _ = write!(d, "{}{px:.2},{py:.2}", if i == 0 { "M" } else { " L" });
        }
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<path d="{d}" fill="none" stroke="{stroke}" stroke-width="{width}"{dash}/>"#
        );
    }

    /// Upper half of the circle |p| = radius.
    pub fn half_circle(&mut self, radius: f64, stroke: &str) {
        let (cx, cy) = self.map(0.0, 0.0);
        let rr = radius * self.scale();
        let _ = writeln!(
            self.body,
            r#"<path d="M{:.2},{cy:.2} A{rr:.2},{rr:.2} 0 0 1 {:.2},{cy:.2}" fill="none" stroke="{stroke}" stroke-width="0.8" stroke-dasharray="3 3"/>"#,
            cx - rr,
            cx + rr
        );
    }

    pub fn label(&mut self, x: f64, y: f64, text: &str) {
        let (px, py) = self.map(x, y);
        let _ = writeln!(
            self.body,
            r#"<text x="{px:.2}" y="{py:.2}" font-size="11" font-family="monospace">{}</text>"#,
            escape(text)
        );
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{PAD}" y="20" font-size="13" font-family="monospace">{}</text>"#,
            escape(&self.title)
        );
        // symmetry axis r = 0
        let (ax0, ay) = self.map(self.x_range.0, 0.0);
        let (ax1, _) = self.map(self.x_range.1, 0.0);
        let _ = writeln!(
            out,
            r##"<line x1="{ax0:.2}" y1="{ay:.2}" x2="{ax1:.2}" y2="{ay:.2}" stroke="#888" stroke-width="1"/>"##
        );
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
