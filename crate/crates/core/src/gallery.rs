//! Closed-form maps, domains and boundary data used as oracles.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::geometry::{arc_points, convex_hull, perimeter, regular_polygon, ConvexCell, GeometryError, JordanDomain};
use crate::harmonic::{BoundaryMap, BoundaryMapError};
use crate::mesh::{MeshError, MeshMap, MeshOptions, TriangleMesh};
use crate::Point2;

/// Sides of the polygons standing in for unit circles.
pub const DISK_SIDES: usize = 256;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GalleryError {
    #[error("clover parameter must lie in [0, 1], got {0}")]
    BadEps(f64),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    BoundaryMap(#[from] BoundaryMapError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

fn c(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

pub fn unit_disk(sides: usize) -> JordanDomain {
    JordanDomain::trusted("disk", regular_polygon(c(0.0, 0.0), 1.0, sides, 0.0))
}

/// Value and Wirtinger derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSample {
    pub value: Point2,
    pub h_z: Point2,
    pub h_zbar: Point2,
}

impl MapSample {
    pub fn hopf(&self) -> Point2 {
        self.h_z * self.h_zbar.conj()
    }

    pub fn jacobian(&self) -> f64 {
        self.h_z.norm_sqr() - self.h_zbar.norm_sqr()
    }
}

/// Square root with the argument taken in `[0, 2pi)`.
pub fn sqrt_upper_branch(z: Point2) -> Point2 {
    let mut t = z.arg();
    if t < 0.0 {
        t += 2.0 * PI;
    }
    Point2::from_polar(z.norm().sqrt(), 0.5 * t)
}

/// `h(z) = z - conj z - i (z^{3/2} - conj z^{3/2})`; it sends the ray
/// `[0, 1]` to the origin.
pub fn butterfly(z: Point2) -> MapSample {
    let i = Point2::i();
    let s = sqrt_upper_branch(z);
    let w = z * s;
    MapSample {
        value: z - z.conj() - i * (w - w.conj()),
        h_z: Point2::new(1.0, 0.0) - i * s * 1.5,
        h_zbar: Point2::new(-1.0, 0.0) + i * s.conj() * 1.5,
    }
}

/// `e^{iy} cosh x` for `x >= 0` and `e^{iy}` for `x <= 0`.
pub fn strip_map(x: f64, y: f64) -> Point2 {
    strip_sample(c(x, y)).value
}

pub fn strip_sample(z: Point2) -> MapSample {
    if z.re >= 0.0 {
        let (a, b) = (z.exp(), (-z.conj()).exp());
        MapSample { value: (a + b) * 0.5, h_z: a * 0.5, h_zbar: -b * 0.5 }
    } else {
        let h = Point2::from_polar(1.0, z.im);
        MapSample { value: h, h_z: h * 0.5, h_zbar: -h * 0.5 }
    }
}

/// `z + 0.3 conj(z) |z|^2`, a smooth map that is not Hopf-harmonic.
pub fn control_sample(z: Point2) -> MapSample {
    let zb = z.conj();
    MapSample { value: z + zb * z.norm_sqr() * 0.3, h_z: Point2::new(1.0, 0.0) + zb * zb * 0.3, h_zbar: z * zb * 0.6 }
}

/// A closed-form map on a polygonal domain with exact derivatives.
#[derive(Debug, Clone)]
pub struct ClosedFormMap {
    name: &'static str,
    sample: fn(Point2) -> MapSample,
    domain: JordanDomain,
    constraints: Vec<(Point2, Point2)>,
    branch_note: &'static str,
}

impl ClosedFormMap {
    pub fn butterfly() -> Self {
        Self {
            name: "butterfly",
            sample: butterfly,
            domain: unit_disk(DISK_SIDES),
            constraints: alloc::vec![(c(0.0, 0.0), c(1.0, 0.0))],
            branch_note: "sqrt with arg in [0, 2pi); derivatives jump across the ray [0, 1], the Hopf product does not",
        }
    }

    pub fn strip() -> Self {
        let (a, b) = (-1.0, FRAC_PI_2);
        Self {
            name: "strip",
            sample: strip_sample,
            domain: JordanDomain::trusted("strip", alloc::vec![c(a, -b), c(0.0, -b), c(-a, -b), c(-a, b), c(0.0, b), c(a, b)]),
            constraints: alloc::vec![(c(0.0, -b), c(0.0, b))],
            branch_note: "two formulas glued along x = 0, C^1 across the seam",
        }
    }

    pub fn control() -> Self {
        Self { name: "control", sample: control_sample, domain: unit_disk(DISK_SIDES), constraints: Vec::new(), branch_note: "" }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn domain(&self) -> &JordanDomain {
        &self.domain
    }

    pub fn branch_note(&self) -> &'static str {
        self.branch_note
    }

    /// Segments the mesh must resolve (cuts and seams).
    pub fn constraints(&self) -> &[(Point2, Point2)] {
        &self.constraints
    }

    pub fn mesh_options(&self, target_edge: f64) -> MeshOptions {
        let mut o = MeshOptions::new(target_edge);
        o.constraints = self.constraints.clone();
        o
    }

    pub fn at(&self, z: Point2) -> MapSample {
        (self.sample)(z)
    }

    pub fn eval(&self, z: Point2) -> Point2 {
        self.at(z).value
    }

    pub fn d_z(&self, z: Point2) -> Point2 {
        self.at(z).h_z
    }

    pub fn d_zbar(&self, z: Point2) -> Point2 {
        self.at(z).h_zbar
    }

    pub fn hopf(&self, z: Point2) -> Point2 {
        self.at(z).hopf()
    }

    pub fn sample_on(&self, mesh: Arc<TriangleMesh>) -> Result<MeshMap, MeshError> {
        MeshMap::from_fn(mesh, |z| self.eval(z))
    }
}

/// Clover parameter in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CloverEps(f64);

impl CloverEps {
    pub fn new(eps: f64) -> Result<Self, GalleryError> {
        if (0.0..=1.0).contains(&eps) {
            Ok(Self(eps))
        } else {
            Err(GalleryError::BadEps(eps))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Piecewise affine clover boundary rule, applied to a point of the source
/// boundary; the arc is picked by the dominant coordinate.
pub fn clover_rule(eps: CloverEps, p: Point2) -> Point2 {
    let e = eps.0;
    let (x, y) = (p.re, p.im);
    let m = x.max(y).max(-x).max(-y);
    if m == x {
        c(2.0 * x - e * x + 2.0 * e - 2.0, e * y)
    } else if m == y {
        c(e * x, 2.0 * y - e * y + 2.0 * e - 2.0)
    } else if m == -x {
        c(2.0 * x - e * x - 2.0 * e + 2.0, e * y)
    } else {
        c(e * x, 2.0 * y - e * y - 2.0 * e + 2.0)
    }
}

#[derive(Debug, Clone)]
pub struct CloverData {
    pub eps: CloverEps,
    /// Union of the unit disks centered at `1, i, -1, -i`.
    pub x: JordanDomain,
    /// Image polygon; `None` for the degenerate cross at `eps = 0`.
    pub y: Option<JordanDomain>,
    pub image: Vec<Point2>,
    pub g: BoundaryMap,
}

/// Clover source boundary, counterclockwise from `1 - i`, with
/// `samples_per_arc` points per semicircle.
pub fn clover_outline(samples_per_arc: usize) -> Vec<Point2> {
    let n = samples_per_arc;
    let arcs = [(c(1.0, 0.0), -FRAC_PI_2), (c(0.0, 1.0), 0.0), (c(-1.0, 0.0), FRAC_PI_2), (c(0.0, -1.0), PI)];
    let mut out = Vec::with_capacity(4 * n);
    for (center, t0) in arcs {
        let mut pts = arc_points(center, 1.0, t0, t0 + PI, n);
        pts.pop();
        out.extend(pts);
    }
    out
}

pub fn clover(eps: CloverEps, samples_per_arc: usize) -> Result<CloverData, GalleryError> {
    if samples_per_arc < 4 {
        return Err(GalleryError::TooFewSamples { got: samples_per_arc, min: 4 });
    }
    let outline = clover_outline(samples_per_arc);
    let image: Vec<Point2> = outline.iter().map(|&p| clover_rule(eps, p)).collect();
    let g = BoundaryMap::sample_polygon(&outline, 1, |p| clover_rule(eps, p))?;
    let x = JordanDomain::new("clover", outline)?;
    let y = if eps.0 > 0.0 { Some(JordanDomain::new("clover-image", image.clone())?) } else { None };
    Ok(CloverData { eps, x, y, image, g })
}

impl CloverData {
    /// Horizontal and vertical bars of the image: hulls of the images of
    /// the arcs centered at `+-1` and at `+-i`. `None` at `eps = 0`.
    pub fn cells(&self) -> Option<Result<(ConvexCell, ConvexCell), GalleryError>> {
        self.y.as_ref()?;
        let n = self.image.len() / 4;
        let arc = |k: usize| (0..=n).map(move |i| (k * n + i) % (4 * n));
        let bar = |a: usize, b: usize, name: &str| -> Result<ConvexCell, GalleryError> {
            let pts: Vec<Point2> = arc(a).chain(arc(b)).map(|i| self.image[i]).collect();
            Ok(ConvexCell::try_from(JordanDomain::new(name, convex_hull(&pts))?)?)
        };
        Some(bar(0, 2, "clover-horizontal").and_then(|h| Ok((h, bar(1, 3, "clover-vertical")?))))
    }
}

pub const HEART_LOBE_OFFSET: f64 = 0.45;
pub const HEART_LOBE_RADIUS: f64 = 1.0;
pub const HEART_TIP: f64 = -1.6;

#[derive(Debug, Clone)]
pub struct HeartSetup {
    pub x: JordanDomain,
    pub y: JordanDomain,
    /// Left lobe.
    pub y1: ConvexCell,
    /// Right lobe.
    pub y2: ConvexCell,
    pub g: BoundaryMap,
    pub tip: Point2,
    /// The reflex point on the symmetry axis.
    pub dimple: Point2,
}

fn mirror(p: Point2) -> Point2 {
    -p.conj()
}

/// Heart target: two radius-one disks at `(+-0.45, 0)`, each convexified
/// with a common tip at `(0, -1.6)`. The source is the unit disk, with
/// arclength-proportional data sending `-i` to the tip.
pub fn heart_setup(samples: usize) -> Result<HeartSetup, GalleryError> {
    if samples < 64 {
        return Err(GalleryError::TooFewSamples { got: samples, min: 64 });
    }
    let samples = samples + samples % 2;
    let center = c(HEART_LOBE_OFFSET, 0.0);
    let tip = c(0.0, HEART_TIP);
    let to_tip = tip - center;
    let beta = to_tip.arg();
    let alpha = libm::acos(HEART_LOBE_RADIUS / to_tip.norm());
    let t_right = beta + alpha;
    let t_left = beta - alpha + 2.0 * PI;
    let dimple_y = (HEART_LOBE_RADIUS * HEART_LOBE_RADIUS - HEART_LOBE_OFFSET * HEART_LOBE_OFFSET).sqrt();
    let dimple = c(0.0, dimple_y);
    let t_dimple = (dimple - center).arg();

    let n_arc = samples / 2;
    let arc_len = HEART_LOBE_RADIUS * (t_dimple - t_right);
    let a = center + Point2::from_polar(HEART_LOBE_RADIUS, t_right);
    let n_tan = libm::ceil((a - tip).norm() / (arc_len / n_arc as f64)).max(1.0) as usize;
    // right half of the heart from the tip up to the dimple, inclusive
    let mut half: Vec<Point2> = (0..n_tan).map(|k| tip + (a - tip) * (k as f64 / n_tan as f64)).collect();
    let mut arc = arc_points(center, HEART_LOBE_RADIUS, t_right, t_dimple, n_arc);
    let last = arc.len() - 1;
    arc[last] = dimple;
    half.extend(arc);

    let mut heart = half.clone();
    heart.extend(half[1..half.len() - 1].iter().rev().map(|&p| mirror(p)));
    let y = JordanDomain::new("heart", heart)?;

    let beyond = arc_points(center, HEART_LOBE_RADIUS, t_dimple, t_left, n_arc);
    let mut right = half.clone();
    right.extend(&beyond[1..]);
    let left: Vec<Point2> = right.iter().rev().map(|&p| mirror(p)).collect();
    let y2 = ConvexCell::try_from(JordanDomain::new("lobe-right", right)?)?;
    let y1 = ConvexCell::try_from(JordanDomain::new("lobe-left", left)?)?;

    let x = JordanDomain::trusted("disk", regular_polygon(c(0.0, 0.0), 1.0, samples, -FRAC_PI_2));
    let outline = y.boundary();
    let cum = cumulative(outline);
    let total = perimeter(outline);
    let mut images = alloc::vec![Point2::new(0.0, 0.0); samples];
    for k in 0..=samples / 2 {
        images[k] = point_at(outline, &cum, total * k as f64 / samples as f64);
    }
    images[0] = tip;
    images[samples / 2] = dimple;
    for k in samples / 2 + 1..samples {
        images[k] = mirror(images[samples - k]);
    }
    let step = perimeter(x.boundary()) / samples as f64;
    let knots = images.into_iter().enumerate().map(|(k, w)| (k as f64 * step, w)).collect();
    let g = BoundaryMap::new(knots, perimeter(x.boundary()))?;
    Ok(HeartSetup { x, y, y1, y2, g, tip, dimple })
}

fn cumulative(pts: &[Point2]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(pts.len() + 1);
    out.push(0.0);
    for i in 0..pts.len() {
        acc += (pts[(i + 1) % pts.len()] - pts[i]).norm();
        out.push(acc);
    }
    out
}

fn point_at(pts: &[Point2], cum: &[f64], s: f64) -> Point2 {
    let k = cum.partition_point(|&t| t <= s).clamp(1, pts.len());
    let (a, b) = (pts[k - 1], pts[k % pts.len()]);
    let len = cum[k] - cum[k - 1];
    a + (b - a) * ((s - cum[k - 1]) / len)
}

impl HeartSetup {
    /// The [`cone_extension`] of the heart data. It is a homeomorphism
    /// because the heart is star-shaped about the origin.
    pub fn cone_extension(&self, mesh: Arc<TriangleMesh>) -> Result<MeshMap, MeshError> {
        cone_extension(&self.x, &self.g, mesh)
    }
}

/// Radial extension `r p -> r g(p)` of boundary data on a source polygon
/// star-shaped about the origin, pinned to the exact samples on the mesh
/// boundary. Injective when the target is star-shaped about the origin too.
pub fn cone_extension(x: &JordanDomain, g: &BoundaryMap, mesh: Arc<TriangleMesh>) -> Result<MeshMap, MeshError> {
    let outline = x.boundary();
    let period = g.period();
    let cum = cumulative(outline);
    let s0 = g.knots()[0].0;
    let values: Vec<Point2> = mesh
        .vertices()
        .iter()
        .map(|&z| {
            let r = z.norm();
            if r == 0.0 {
                return Point2::new(0.0, 0.0);
            }
            let (s, rho) = ray_exit(outline, &cum, z / r);
            g.eval(s0 + s * period / cum[outline.len()]) * (r / rho)
        })
        .collect();
    let mut m = MeshMap::new(mesh.clone(), values)?;
    let bv = crate::harmonic::sample_boundary(&mesh, outline, g);
    for (&v, w) in mesh.boundary_loop().iter().zip(bv) {
        m.values_mut()[v] = w;
    }
    Ok(m)
}

/// Arclength and distance where the ray from the origin in direction `u`
/// leaves a star-shaped polygon.
fn ray_exit(pts: &[Point2], cum: &[f64], u: Point2) -> (f64, f64) {
    let n = pts.len();
    let mut best = (0.0, f64::INFINITY);
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let e = b - a;
        let den = crate::geometry::cross(u, e);
        if den.abs() < 1e-300 {
            continue;
        }
        // a + t e = rho u
        let t = crate::geometry::cross(u, -a) / den;
        let rho = crate::geometry::cross(a, e) / den;
        if (-1e-12..=1.0 + 1e-12).contains(&t) && rho > 0.0 && rho < best.1 {
            best = (cum[i] + t.clamp(0.0, 1.0) * (cum[i + 1] - cum[i]), rho);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{convex_intersection_area, Containment};
    use proptest::prelude::*;

    #[test]
    fn butterfly_values() {
        for rho in [0.0, 0.2, 0.5, 1.0] {
            assert!(butterfly(c(rho, 0.0)).value.norm() < 1e-15);
        }
        let v = butterfly(c(0.0, 1.0)).value;
        assert!((v - c(2.0f64.sqrt(), 2.0)).norm() < 1e-14);
        assert!((butterfly(c(0.0, 0.0)).hopf() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(butterfly(c(-4.0 / 9.0, 0.0)).hopf().norm() < 1e-14);
    }

    #[test]
    fn butterfly_polar_form() {
        // 2 rho [sqrt(rho) sin(3t/2) + i sin t]
        for &(rho, t) in &[(0.3f64, 0.4f64), (0.9, 2.0), (0.5, 4.0), (1.0, 6.0)] {
            let oracle = c(2.0 * rho * rho.sqrt() * libm::sin(1.5 * t), 2.0 * rho * libm::sin(t));
            assert!((butterfly(Point2::from_polar(rho, t)).value - oracle).norm() < 1e-14);
        }
    }

    #[test]
    fn strip_values() {
        assert!((strip_map(-3.0, FRAC_PI_2) - c(0.0, 1.0)).norm() < 1e-15);
        for x in [0.0, 0.4, 1.0] {
            let v = strip_map(x, 0.0);
            assert!((v.re - libm::cosh(x)).abs() < 1e-14 && v.im == 0.0);
        }
    }

    #[test]
    fn strip_is_c1_not_c2_across_seam() {
        let d = 1e-3;
        let f = |x: f64| strip_map(x, 0.3);
        let first_left = (f(0.0) - f(-d)) / d;
        let first_right = (f(d) - f(0.0)) / d;
        assert!((first_left - first_right).norm() < 2e-3);
        let second_left = (f(0.0) - f(-d) * 2.0 + f(-2.0 * d)) / (d * d);
        let second_right = (f(2.0 * d) - f(d) * 2.0 + f(0.0)) / (d * d);
        assert!((second_left - second_right).norm() > 0.5);
    }

    fn fd_check(m: &ClosedFormMap, z: Point2) {
        let e = 1e-6;
        let dx = (m.eval(z + c(e, 0.0)) - m.eval(z - c(e, 0.0))) / (2.0 * e);
        let dy = (m.eval(z + c(0.0, e)) - m.eval(z - c(0.0, e))) / (2.0 * e);
        let i = Point2::i();
        let hz = (dx - i * dy) * 0.5;
        let hzb = (dx + i * dy) * 0.5;
        assert!((hz - m.d_z(z)).norm() < 1e-6, "{} at {z}", m.name());
        assert!((hzb - m.d_zbar(z)).norm() < 1e-6, "{} at {z}", m.name());
    }

    proptest! {
        #[test]
        fn closed_forms_match_finite_differences(r in 0.05f64..0.95, t in 0.1f64..6.2, x in -0.95f64..0.95, y in -1.5f64..1.5) {
            fd_check(&ClosedFormMap::butterfly(), Point2::from_polar(r, t));
            fd_check(&ClosedFormMap::control(), Point2::from_polar(r, t));
            if x.abs() > 1e-3 {
                fd_check(&ClosedFormMap::strip(), c(x, y));
            }
        }

        #[test]
        fn strip_hopf_is_constant(x in -1.0f64..1.0, y in -1.5f64..1.5) {
            prop_assert!((strip_sample(c(x, y)).hopf() - c(-0.25, 0.0)).norm() < 1e-14);
        }

        #[test]
        fn butterfly_hopf_closed_form(r in 0.0f64..1.0, t in 0.0f64..core::f64::consts::TAU) {
            let z = Point2::from_polar(r, t);
            let oracle = -(c(4.0, 0.0) + z * 9.0) / 4.0;
            prop_assert!((butterfly(z).hopf() - oracle).norm() < 1e-13);
        }

        #[test]
        fn butterfly_injective_off_ray(a in (0.05f64..0.95, 0.05f64..6.2), b in (0.05f64..0.95, 0.05f64..6.2)) {
            let (za, zb) = (Point2::from_polar(a.0, a.1), Point2::from_polar(b.0, b.1));
            if (za - zb).norm() > 1e-6 {
                prop_assert!((butterfly(za).value - butterfly(zb).value).norm() > 1e-9);
            }
        }
    }

    #[test]
    fn clover_identity_at_one() {
        let d = clover(CloverEps::new(1.0).unwrap(), 32).unwrap();
        for (p, w) in d.x.boundary().iter().zip(&d.image) {
            assert!((p - w).norm() < 1e-15);
        }
        assert!((d.x.signed_area() - d.y.as_ref().unwrap().signed_area()).abs() < 1e-12);
    }

    #[test]
    fn clover_degenerates_to_cross() {
        let d = clover(CloverEps::new(0.0).unwrap(), 32).unwrap();
        assert!(d.y.is_none());
        for w in &d.image {
            assert!(w.re == 0.0 || w.im == 0.0, "{w}");
            assert!(w.norm() <= 2.0 + 1e-12);
        }
        assert!(CloverEps::new(1.5).is_err());
    }

    #[test]
    fn clover_commutes_with_symmetries() {
        let syms: [fn(Point2) -> Point2; 4] = [|p| c(p.im, p.re), |p| c(-p.im, -p.re), |p| p.conj(), |p| -p.conj()];
        for eps in [0.05, 0.3, 0.8] {
            let e = CloverEps::new(eps).unwrap();
            let d = clover(e, 24).unwrap();
            for &p in d.x.boundary() {
                for s in syms {
                    assert!((clover_rule(e, s(p)) - s(clover_rule(e, p))).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn clover_boundary_map_matches_rule() {
        let e = CloverEps::new(0.4).unwrap();
        let d = clover(e, 16).unwrap();
        for (k, &(_, w)) in d.g.knots().iter().enumerate() {
            assert_eq!(w, clover_rule(e, d.x.boundary()[k]));
        }
        // 4 unit semicircles
        assert!((d.x.perimeter() - 4.0 * PI).abs() < 0.05);
    }

    #[test]
    fn heart_shape() {
        let h = heart_setup(128).unwrap();
        assert!(!h.y.is_convex());
        assert!(h.y1.is_convex() && h.y2.is_convex());
        let inter = convex_intersection_area(&h.y1, &h.y2);
        assert!(inter > 0.0);
        let union = h.y1.signed_area() + h.y2.signed_area() - inter;
        assert!((union - h.y.signed_area()).abs() < 1e-9 * h.y.signed_area(), "{union} {}", h.y.signed_area());
        for cell in [&h.y1, &h.y2] {
            for &p in cell.boundary() {
                assert!(h.y.contains(p, 1e-9) != Containment::Outside);
            }
        }
        assert!(!h.y.somewhere_convex_probe(h.dimple, 0.05).unwrap());
    }

    #[test]
    fn heart_data_is_symmetric() {
        let h = heart_setup(128).unwrap();
        let n = h.x.boundary().len();
        for k in 0..n {
            let (p, q) = (h.x.boundary()[k], h.x.boundary()[(n - k) % n]);
            assert!((mirror(p) - q).norm() < 1e-14);
            let (gp, gq) = (h.g.knots()[k].1, h.g.knots()[(n - k) % n].1);
            assert_eq!(mirror(gp), gq);
        }
        for &p in h.y.boundary() {
            assert!(h.y.contains(mirror(p), 1e-12) == Containment::Boundary);
        }
        assert!(h.g.check_orientation().is_ok());
        assert_eq!(h.g.knots()[0].1, h.tip);
    }

    #[test]
    fn heart_cone_extension_is_orientation_preserving() {
        let h = heart_setup(96).unwrap();
        let mesh = Arc::new(crate::mesh::triangulate(&h.x, 0.15).unwrap());
        let m = h.cone_extension(mesh).unwrap();
        let stats = crate::mesh::jacobian_stats(&m, 0.0);
        assert_eq!(stats.count_negative, 0);
        assert!(stats.min_jacobian > 0.0);
    }
}
