//! Static SVG figures. The y axis points up.

use std::fmt::Write;

use hopfharm_core::Point2;

const WIDTH: f64 = 640.0;
const MARGIN: f64 = 16.0;

pub struct SvgCanvas {
    min: Point2,
    scale: f64,
    height: f64,
    body: String,
}

impl SvgCanvas {
    /// A canvas whose viewport holds every point of `extent`.
    pub fn fit(extent: impl IntoIterator<Item = Point2>) -> Self {
        let (mut lo, mut hi) = (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in extent.into_iter().filter(|p| p.re.is_finite() && p.im.is_finite()) {
            lo = Point2::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Point2::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        if lo.re > hi.re {
            (lo, hi) = (Point2::new(-1.0, -1.0), Point2::new(1.0, 1.0));
        }
        let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-12);
        let scale = (WIDTH - 2.0 * MARGIN) / span;
        let height = (hi.im - lo.im) * scale + 2.0 * MARGIN;
        Self { min: Point2::new(lo.re, hi.im), scale, height, body: String::new() }
    }

    fn xy(&self, p: Point2) -> (f64, f64) {
        (MARGIN + (p.re - self.min.re) * self.scale, MARGIN + (self.min.im - p.im) * self.scale)
    }

    fn points_attr(&self, pts: &[Point2]) -> String {
        let mut s = String::new();
        for &p in pts {
            let (x, y) = self.xy(p);
            let _ = write!(s, "{x:.2},{y:.2} ");
        }
        s.pop();
        s
    }

    pub fn polygon(&mut self, pts: &[Point2], stroke: &str, fill: &str) {
        let attr = self.points_attr(pts);
        let _ = writeln!(self.body, r#"<polygon points="{attr}" fill="{fill}" stroke="{stroke}" stroke-width="1"/>"#);
    }

    pub fn polyline(&mut self, pts: &[Point2], stroke: &str) {
        let attr = self.points_attr(pts);
        let _ = writeln!(self.body, r#"<polyline points="{attr}" fill="none" stroke="{stroke}" stroke-width="1.2"/>"#);
    }

    /// Filled triangles colored by `values`, scaled to `[lo, hi]`.
    pub fn shaded_triangles(&mut self, tris: impl IntoIterator<Item = [Point2; 3]>, values: &[f64]) {
        let finite = values.iter().copied().filter(|v| v.is_finite());
        let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        for (tri, &v) in tris.into_iter().zip(values) {
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
            let color = ramp(t);
            let attr = self.points_attr(&tri);
            let _ = writeln!(self.body, r#"<polygon points="{attr}" fill="{color}" stroke="{color}" stroke-width="0.3"/>"#);
        }
    }

    pub fn marker(&mut self, p: Point2, color: &str) {
        let (x, y) = self.xy(p);
        let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{h:.0}\" viewBox=\"0 0 {WIDTH} {h:.2}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            h = self.height
        )
    }
}

/// Blue through white to red; NaN is grey.
pub fn ramp(t: f64) -> String {
    if !t.is_finite() {
        return "#888888".into();
    }
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let s = 2.0 * t;
        (s, s, 1.0)
    } else {
        let s = 2.0 * (1.0 - t);
        (1.0, s, s)
    };
    format!("#{:02x}{:02x}{:02x}", (r * 255.0).round() as u8, (g * 255.0).round() as u8, (b * 255.0).round() as u8)
}
