//! Planar polygonal domains: orientation, containment, convexity and the
//! local convexity probe used to locate non-convex boundary points.
//!
//! Curved boundaries are represented by sampled polygons. The closing edge
//! from the last vertex back to the first is implicit.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::sum::{fsum, CompensatedSum};
use crate::Point2;

pub const BOUNDARY_TOL: f64 = 1e-9;
pub const CONVEXITY_TOL: f64 = 1e-9;
pub const DEFAULT_ARC_SAMPLES: usize = 256;
pub const PROBE_POLYGON_SIDES: usize = 128;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("polyline has {0} vertices, at least 3 are required")]
    TooFewVertices(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("boundary edges {0} and {1} intersect")]
    SelfIntersection(usize, usize),
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("polygon is clockwise; expected counterclockwise orientation")]
    Clockwise,
    #[error("polygon is not convex")]
    NotConvex,
    #[error("probe centre is {0:e} away from the boundary")]
    NotOnBoundary(f64),
    #[error("probe radius must be positive and finite")]
    BadRadius,
}

/// Result of classifying a point against a domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Outside,
    Boundary,
}

#[inline]
pub fn cross(a: Point2, b: Point2) -> f64 {
    a.re * b.im - a.im * b.re
}

#[inline]
pub fn dot(a: Point2, b: Point2) -> f64 {
    a.re * b.re + a.im * b.im
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    let t = if len2 > 0.0 { (dot(p - a, ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

fn edges(pts: &[Point2]) -> impl Iterator<Item = (Point2, Point2)> + '_ {
    let n = pts.len();
    (0..n).map(move |i| (pts[i], pts[(i + 1) % n]))
}

/// Shoelace area of a closed polyline; positive iff counterclockwise.
pub fn signed_area(pts: &[Point2]) -> Result<f64, GeometryError> {
    if pts.len() < 3 {
        return Err(GeometryError::TooFewVertices(pts.len()));
    }
    // Centre on the first vertex to limit cancellation for far-off polygons.
    let o = pts[0];
    let mut acc = CompensatedSum::new();
    for (a, b) in edges(pts) {
        acc.add(cross(a - o, b - o));
    }
    Ok(0.5 * acc.value())
}

pub fn perimeter(pts: &[Point2]) -> f64 {
    fsum(edges(pts).map(|(a, b)| (b - a).norm()))
}

pub fn boundary_distance(pts: &[Point2], p: Point2) -> f64 {
    edges(pts).map(|(a, b)| segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
}

/// Winding number of the closed polyline around `p` (p must not lie on it).
pub fn winding_number(pts: &[Point2], p: Point2) -> i32 {
    let mut w = 0;
    for (a, b) in edges(pts) {
        if a.im <= p.im {
            if b.im > p.im && cross(b - a, p - a) > 0.0 {
                w += 1;
            }
        } else if b.im <= p.im && cross(b - a, p - a) < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Winding-number classification; points within `tol` of an edge are `Boundary`.
pub fn contains_point(pts: &[Point2], p: Point2, tol: f64) -> Containment {
    if boundary_distance(pts, p) <= tol {
        Containment::Boundary
    } else if winding_number(pts, p) != 0 {
        Containment::Inside
    } else {
        Containment::Outside
    }
}

/// True iff every turn between consecutive edges is a left turn up to `tol`.
///
/// The turn is measured as the sine of the exterior angle, so the test does
/// not depend on the polygon's scale. Repeated vertices are ignored.
pub fn is_convex_polygon(pts: &[Point2], tol: f64) -> bool {
    let pts = dedup_closed(pts, 1e-12 * bbox_diameter(pts).max(f64::MIN_POSITIVE));
    let n = pts.len();
    if n < 3 {
        return false;
    }
    let mut turning = 0.0;
    for i in 0..n {
        let e1 = pts[i] - pts[(i + n - 1) % n];
        let e2 = pts[(i + 1) % n] - pts[i];
        let s = cross(e1, e2) / (e1.norm() * e2.norm());
        if s < -tol {
            return false;
        }
        turning += libm::atan2(cross(e1, e2), dot(e1, e2));
    }
    // Reject self-overlapping polygons whose turns are all left.
    (turning - 2.0 * PI).abs() < 1e-6
}

fn bbox_diameter(pts: &[Point2]) -> f64 {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        lo.re = lo.re.min(p.re);
        lo.im = lo.im.min(p.im);
        hi.re = hi.re.max(p.re);
        hi.im = hi.im.max(p.im);
    }
    (hi - lo).norm()
}

fn dedup_closed(pts: &[Point2], eps: f64) -> Vec<Point2> {
    let mut out: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in pts {
        if out.last().is_none_or(|q| (p - *q).norm() > eps) {
            out.push(p);
        }
    }
    while out.len() > 1 && (out[0] - out[out.len() - 1]).norm() <= eps {
        out.pop();
    }
    out
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let o = |p: Point2, q: Point2, r: Point2| {
        robust::orient2d(
            robust::Coord { x: p.re, y: p.im },
            robust::Coord { x: q.re, y: q.im },
            robust::Coord { x: r.re, y: r.im },
        )
    };
    let d1 = o(c, d, a);
    let d2 = o(c, d, b);
    let d3 = o(a, b, c);
    let d4 = o(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: Point2, q: Point2, r: Point2| {
        r.re >= p.re.min(q.re) && r.re <= p.re.max(q.re) && r.im >= p.im.min(q.im) && r.im <= p.im.max(q.im)
    };
    (d1 == 0.0 && on(c, d, a)) || (d2 == 0.0 && on(c, d, b)) || (d3 == 0.0 && on(a, b, c)) || (d4 == 0.0 && on(a, b, d))
}

/// First pair of non-adjacent intersecting edges, if any.
pub fn find_self_intersection(pts: &[Point2]) -> Option<(usize, usize)> {
    let n = pts.len();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (c, d) = (pts[j], pts[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Sutherland-Hodgman clip of `subject` against the convex counterclockwise `clip`.
pub fn clip_to_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut out: Vec<Point2> = subject.to_vec();
    let m = clip.len();
    for k in 0..m {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[k], clip[(k + 1) % m]);
        let side = |p: Point2| cross(b - a, p - a);
        let input = core::mem::take(&mut out);
        let n = input.len();
        for i in 0..n {
            let p = input[i];
            let q = input[(i + 1) % n];
            let (sp, sq) = (side(p), side(q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push(p + (q - p) * t);
            }
        }
    }
    out
}

/// Regular `n`-gon, counterclockwise, first vertex at angle `phase`.
pub fn regular_polygon(center: Point2, radius: f64, n: usize, phase: f64) -> Vec<Point2> {
    (0..n)
        .map(|k| {
            let t = phase + 2.0 * PI * k as f64 / n as f64;
            center + Point2::new(libm::cos(t), libm::sin(t)) * radius
        })
        .collect()
}

/// Samples `n + 1` points on a circular arc from `t0` to `t1`, endpoints included.
pub fn arc_points(center: Point2, radius: f64, t0: f64, t1: f64, n: usize) -> Vec<Point2> {
    (0..=n)
        .map(|k| {
            let t = t0 + (t1 - t0) * k as f64 / n as f64;
            center + Point2::new(libm::cos(t), libm::sin(t)) * radius
        })
        .collect()
}

/// A simple, counterclockwise, closed polygon with a label.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanDomain {
    name: String,
    boundary: Vec<Point2>,
}

impl JordanDomain {
    /// Validates vertex count, finiteness, simplicity and counterclockwise orientation.
    pub fn new(name: impl Into<String>, boundary: Vec<Point2>) -> Result<Self, GeometryError> {
        let (d, flipped) = Self::reorienting(name, boundary)?;
        if flipped {
            return Err(GeometryError::Clockwise);
        }
        Ok(d)
    }

    /// Like [`JordanDomain::new`] but reverses a clockwise polyline, reporting whether it did.
    pub fn reorienting(name: impl Into<String>, mut boundary: Vec<Point2>) -> Result<(Self, bool), GeometryError> {
        if boundary.len() < 3 {
            return Err(GeometryError::TooFewVertices(boundary.len()));
        }
        if let Some(i) = boundary.iter().position(|p| !(p.re.is_finite() && p.im.is_finite())) {
            return Err(GeometryError::NonFinite(i));
        }
        if let Some((i, j)) = find_self_intersection(&boundary) {
            return Err(GeometryError::SelfIntersection(i, j));
        }
        let a = signed_area(&boundary)?;
        if a == 0.0 {
            return Err(GeometryError::ZeroArea);
        }
        let flipped = a < 0.0;
        if flipped {
            boundary.reverse();
        }
        Ok((Self { name: name.into(), boundary }, flipped))
    }

    /// Skips the O(n^2) simplicity check; for internally generated polygons.
    pub(crate) fn trusted(name: impl Into<String>, boundary: Vec<Point2>) -> Self {
        debug_assert!(signed_area(&boundary).is_ok_and(|a| a > 0.0));
        Self { name: name.into(), boundary }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn boundary(&self) -> &[Point2] {
        &self.boundary
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.boundary).unwrap_or(0.0)
    }

    pub fn perimeter(&self) -> f64 {
        perimeter(&self.boundary)
    }

    pub fn diameter(&self) -> f64 {
        bbox_diameter(&self.boundary)
    }

    pub fn contains(&self, p: Point2, tol: f64) -> Containment {
        contains_point(&self.boundary, p, tol)
    }

    /// Inside or on the boundary within `tol`.
    pub fn contains_closed(&self, p: Point2, tol: f64) -> bool {
        self.contains(p, tol) != Containment::Outside
    }

    pub fn is_convex(&self) -> bool {
        is_convex_polygon(&self.boundary, CONVEXITY_TOL)
    }

    pub fn boundary_distance(&self, p: Point2) -> f64 {
        boundary_distance(&self.boundary, p)
    }

    /// Distance from `p` to the closed domain (zero inside).
    pub fn distance_outside(&self, p: Point2) -> f64 {
        if winding_number(&self.boundary, p) != 0 {
            0.0
        } else {
            self.boundary_distance(p)
        }
    }

    /// Image of the domain under `f`, which must preserve orientation and simplicity.
    pub fn map_trusted(&self, name: impl Into<String>, f: impl Fn(Point2) -> Point2) -> Self {
        Self::trusted(name, self.boundary.iter().map(|&p| f(p)).collect())
    }

    /// True iff the closed disk of radius `eps` about the boundary point `y0`
    /// meets the closed domain in a convex set (disk drawn as a 128-gon).
    pub fn somewhere_convex_probe(&self, y0: Point2, eps: f64) -> Result<bool, GeometryError> {
        somewhere_convex_probe(self, y0, eps)
    }
}

pub fn somewhere_convex_probe(d: &JordanDomain, y0: Point2, eps: f64) -> Result<bool, GeometryError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(GeometryError::BadRadius);
    }
    let dist = d.boundary_distance(y0);
    if dist > BOUNDARY_TOL.max(1e-9 * d.diameter()) {
        return Err(GeometryError::NotOnBoundary(dist));
    }
    // Offset the disk polygon by half a side so y0 does not sit on a disk vertex.
    let disk = regular_polygon(y0, eps, PROBE_POLYGON_SIDES, PI / PROBE_POLYGON_SIDES as f64);
    let piece = clip_to_convex(d.boundary(), &disk);
    Ok(is_convex_polygon(&piece, CONVEXITY_TOL))
}

/// A convex domain; the cells of the alternating construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCell(JordanDomain);

impl ConvexCell {
    pub fn domain(&self) -> &JordanDomain {
        &self.0
    }
}

impl TryFrom<JordanDomain> for ConvexCell {
    type Error = GeometryError;
    fn try_from(d: JordanDomain) -> Result<Self, Self::Error> {
        if d.is_convex() {
            Ok(Self(d))
        } else {
            Err(GeometryError::NotConvex)
        }
    }
}

impl core::ops::Deref for ConvexCell {
    type Target = JordanDomain;
    fn deref(&self) -> &JordanDomain {
        &self.0
    }
}

/// Area of the intersection of two convex cells.
/// Counterclockwise convex hull without collinear points (monotone chain).
pub fn convex_hull(pts: &[Point2]) -> Vec<Point2> {
    let mut p: Vec<Point2> = pts.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    fn chain<'a>(pts: impl Iterator<Item = &'a Point2>) -> Vec<Point2> {
        let mut out: Vec<Point2> = Vec::new();
        for &q in pts {
            while out.len() >= 2 && cross(out[out.len() - 1] - out[out.len() - 2], q - out[out.len() - 2]) <= 0.0 {
                out.pop();
            }
            out.push(q);
        }
        out.pop();
        out
    }
    let mut hull = chain(p.iter());
    hull.extend(chain(p.iter().rev()));
    hull
}

pub fn convex_intersection_area(a: &ConvexCell, b: &ConvexCell) -> f64 {
    let piece = clip_to_convex(a.boundary(), b.boundary());
    signed_area(&piece).unwrap_or(0.0).max(0.0)
}
