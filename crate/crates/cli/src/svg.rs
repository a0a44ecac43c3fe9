//! Minimal SVG writer. World coordinates are meters with y up; the canvas
//! flips y and scales to a fixed width.

use std::fmt::Write as _;

use steelnav_core::Point2;

pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

pub struct Svg {
    lo: Point2,
    scale: f64,
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    /// Canvas covering `points` plus a margin, `width` pixels wide.
    pub fn fit<'a>(points: impl IntoIterator<Item = &'a Point2>, width: f64) -> Svg {
        let (mut lo, mut hi) = (
            Point2::new(f64::INFINITY, f64::INFINITY),
            Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if !lo.x.is_finite() {
            lo = Point2::new(0.0, 0.0);
            hi = Point2::new(1.0, 1.0);
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
        let margin = 0.05 * span;
        let lo = Point2::new(lo.x - margin, lo.y - margin);
        let (sx, sy) = (hi.x - lo.x + margin, hi.y - lo.y + margin);
        let scale = width / sx;
        Svg {
            lo,
            scale,
            width,
            height: (sy * scale).ceil(),
            body: String::new(),
        }
    }

    fn px(&self, p: Point2) -> (f64, f64) {
        (
            (p.x - self.lo.x) * self.scale,
            self.height - (p.y - self.lo.y) * self.scale,
        )
    }

    pub fn dot(&mut self, p: Point2, r: f64, fill: &str) {
        let (x, y) = self.px(p);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{fill}"/>"#
        );
    }

    pub fn line(&mut self, a: Point2, b: Point2, stroke: &str, width: f64) {
        let (x1, y1) = self.px(a);
        let (x2, y2) = self.px(b);
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    pub fn arrow(&mut self, a: Point2, b: Point2, stroke: &str, width: f64) {
        let (x1, y1) = self.px(a);
        let (x2, y2) = self.px(b);
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width}" marker-end="url(#arrow)"/>"#
        );
    }

    pub fn polyline(&mut self, pts: &[Point2], stroke: &str, width: f64) {
        let coords = self.coords(pts);
        let _ = writeln!(
            self.body,
            r#"<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    pub fn polygon(&mut self, pts: &[Point2], stroke: &str, fill: &str, width: f64) {
        let coords = self.coords(pts);
        let _ = writeln!(
            self.body,
            r#"<polygon points="{coords}" fill="{fill}" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    pub fn text(&mut self, p: Point2, size: f64, s: &str) {
        let (x, y) = self.px(p);
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="{size}" font-family="sans-serif">{}</text>"#,
            escape(s)
        );
    }

    fn coords(&self, pts: &[Point2]) -> String {
        let mut s = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = self.px(*p);
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x:.2},{y:.2}");
        }
        s
    }

    pub fn finish(self, title: &str) -> String {
        format!(
            concat!(
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#,
                "\n<title>{t}</title>\n",
                r#"<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" orient="auto-start-reverse"><path d="M0,0 L10,5 L0,10 z" fill="context-stroke"/></marker></defs>"#,
                "\n",
                r#"<rect width="100%" height="100%" fill="white"/>"#,
                "\n{b}</svg>\n"
            ),
            w = self.width,
            h = self.height,
            t = escape(title),
            b = self.body
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
