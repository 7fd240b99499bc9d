//! Bare-bones SVG scatter plots with a polygon overlay.

use std::fmt::Write;

use serde_json::Value;

use crate::output::SCHEMA;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const PAD: f64 = 40.0;

pub struct Plot {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

impl Plot {
    /// Plot over the given data ranges, padded by 5% on each side.
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let grow = |(a, b): (f64, f64)| {
            let w = (b - a).abs().max(1e-9);
            (a - 0.05 * w, b + 0.05 * w)
        };
        Plot {
            x: grow(x),
            y: grow(y),
            body: String::new(),
        }
    }

    /// Bounding box of a point set, for use with [`Plot::new`].
    pub fn bounds(points: impl IntoIterator<Item = [f64; 2]>) -> ((f64, f64), (f64, f64)) {
        let mut b = (
            (f64::INFINITY, f64::NEG_INFINITY),
            (f64::INFINITY, f64::NEG_INFINITY),
        );
        for [x, y] in points {
            b.0 = (b.0 .0.min(x), b.0 .1.max(x));
            b.1 = (b.1 .0.min(y), b.1 .1.max(y));
        }
        if !b.0 .0.is_finite() {
            return ((0.0, 1.0), (0.0, 1.0));
        }
        b
    }

    fn px(&self, p: [f64; 2]) -> (f64, f64) {
        let sx = (p[0] - self.x.0) / (self.x.1 - self.x.0);
        let sy = (p[1] - self.y.0) / (self.y.1 - self.y.0);
        (
            PAD + sx * (WIDTH - 2.0 * PAD),
            HEIGHT - PAD - sy * (HEIGHT - 2.0 * PAD),
        )
    }

    pub fn scatter(&mut self, points: &[[f64; 2]], radius: f64, color: &str) {
        let _ = writeln!(self.body, r#"<g fill="{color}">"#);
        for &p in points {
            let (x, y) = self.px(p);
            let _ = writeln!(
                self.body,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="{radius}"/>"#
            );
        }
        self.body.push_str("</g>\n");
    }

    pub fn polygon(&mut self, vertices: &[[f64; 2]], color: &str) {
        let pts: Vec<String> = vertices
            .iter()
            .map(|&p| {
                let (x, y) = self.px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#,
            pts.join(" ")
        );
    }

    pub fn marker(&mut self, p: [f64; 2], label: &str, color: &str) {
        let (x, y) = self.px(p);
        let _ = writeln!(
            self.body,
            r#"<g stroke="{color}" stroke-width="2"><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/></g><text x="{:.2}" y="{:.2}" font-size="11" fill="{color}">{label}</text>"#,
            x - 5.0,
            y - 5.0,
            x + 5.0,
            y + 5.0,
            x - 5.0,
            y + 5.0,
            x + 5.0,
            y - 5.0,
            x + 7.0,
            y - 7.0
        );
    }

    pub fn finish(self, command: &str, config: &Value, x_label: &str, y_label: &str) -> String {
        // "--" may not appear inside an XML comment.
        let cfg = config.to_string().replace("--", "- -");
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(s, "<!-- {SCHEMA} {command} {cfg} -->");
        let _ = writeln!(
            s,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            s,
            r##"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="#999"/>"##,
            WIDTH - 2.0 * PAD,
            HEIGHT - 2.0 * PAD
        );
        let _ = writeln!(
            s,
            r#"<text x="{PAD}" y="{}" font-size="11">{x_label} [{:.3}, {:.3}]</text>"#,
            HEIGHT - 12.0,
            self.x.0,
            self.x.1
        );
        let _ = writeln!(
            s,
            r#"<text x="{PAD}" y="24" font-size="11">{y_label} [{:.3}, {:.3}]</text>"#,
            self.y.0, self.y.1
        );
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}
