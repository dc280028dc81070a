//! Hopf products, the one-ring holomorphy residual, stretch pairs and the
//! energy identity by quadrature.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::gallery::MapSample;
use crate::mesh::{wirtinger, MeshError, MeshMap, TriangleMesh};
use crate::sum::CompensatedSum;
use crate::Point2;

/// Below this modulus a Hopf product counts as zero.
pub const HOPF_ZERO: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HopfError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("field has {got} entries for {expected} triangles")]
    Length { expected: usize, got: usize },
    #[error("inverse map not found at {0} (Newton did not converge)")]
    Inversion(Point2),
    #[error("inner map is not orientation preserving at {0}")]
    Degenerate(Point2),
    #[error("quadrature needs n >= 2, got {0}")]
    Quadrature(usize),
}

/// Per-triangle Hopf products.
#[derive(Debug, Clone)]
pub struct HopfField {
    mesh: Arc<TriangleMesh>,
    pub phi: Vec<Point2>,
    pub centroid: Vec<Point2>,
    pub area: Vec<f64>,
}

impl HopfField {
    pub fn new(mesh: Arc<TriangleMesh>, phi: Vec<Point2>) -> Result<Self, HopfError> {
        if phi.len() != mesh.triangle_count() {
            return Err(HopfError::Length { expected: mesh.triangle_count(), got: phi.len() });
        }
        let centroid = (0..mesh.triangle_count()).map(|t| mesh.centroid(t)).collect();
        let area = (0..mesh.triangle_count()).map(|t| mesh.area(t)).collect();
        Ok(Self { mesh, phi, centroid, area })
    }

    /// Samples `f` at the triangle centroids.
    pub fn sample(mesh: Arc<TriangleMesh>, f: impl Fn(Point2) -> Point2) -> Self {
        let phi = (0..mesh.triangle_count()).map(|t| f(mesh.centroid(t))).collect();
        Self::new(mesh, phi).expect("one value per triangle")
    }

    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// Largest centroid error against a reference function.
    pub fn max_error(&self, f: impl Fn(Point2) -> Point2) -> f64 {
        self.phi.iter().zip(&self.centroid).map(|(p, &z)| (p - f(z)).norm()).fold(0.0, f64::max)
    }
}

pub fn hopf_product(m: &MeshMap) -> Result<HopfField, HopfError> {
    let d = wirtinger(m)?;
    let phi = d.iter().map(|t| t.h_z * t.h_zbar.conj()).collect();
    HopfField::new(m.mesh_arc().clone(), phi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolomorphyResidual {
    /// Area-weighted mean of `|c|` over fitted vertices.
    pub global: f64,
    /// `(vertex, |c|)` for every fitted interior vertex.
    pub per_vertex: Vec<(usize, f64)>,
    /// Interior vertices without a usable one-ring fit.
    pub skipped: Vec<usize>,
}

/// Fits `phi ~ a + b (z - v) + c conj(z - v)` over the one-ring centroids of
/// each interior vertex and reports `|c|`, the local `d/dzbar` of the field.
pub fn holomorphy_residual(f: &HopfField) -> HolomorphyResidual {
    let mesh = &f.mesh;
    let mut per_vertex = Vec::new();
    let mut skipped = Vec::new();
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for v in mesh.interior_vertices() {
        let ring = mesh.incident_triangles(v);
        if ring.len() < 3 {
            skipped.push(v);
            continue;
        }
        let p = mesh.vertices()[v];
        let scale = ring.iter().map(|&t| (f.centroid[t] - p).norm()).sum::<f64>() / ring.len() as f64;
        let mut normal = [[Point2::new(0.0, 0.0); 3]; 3];
        let mut rhs = [Point2::new(0.0, 0.0); 3];
        for &t in ring {
            let d = (f.centroid[t] - p) / scale;
            let row = [Point2::new(1.0, 0.0), d, d.conj()];
            for i in 0..3 {
                for j in 0..3 {
                    normal[i][j] += row[i].conj() * row[j];
                }
                rhs[i] += row[i].conj() * f.phi[t];
            }
        }
        match solve3(normal, rhs) {
            Some(x) => {
                let c = x[2].norm() / scale;
                let w: f64 = ring.iter().map(|&t| f.area[t]).sum::<f64>() / 3.0;
                per_vertex.push((v, c));
                num.add(w * c);
                den.add(w);
            }
            None => skipped.push(v),
        }
    }
    let global = if den.value() > 0.0 { num.value() / den.value() } else { 0.0 };
    HolomorphyResidual { global, per_vertex, skipped }
}

/// Gaussian elimination with partial pivoting; `None` if near singular.
pub(crate) fn solve3(mut a: [[Point2; 3]; 3], mut b: [Point2; 3]) -> Option<[Point2; 3]> {
    let big = a.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if !(a[piv][col].norm() > 1e-12 * big) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let m = a[r][col] / a[col][col];
            for k in col..3 {
                let t = a[col][k];
                a[r][k] -= m * t;
            }
            let t = b[col];
            b[r] -= m * t;
        }
    }
    let mut x = [Point2::new(0.0, 0.0); 3];
    for r in (0..3).rev() {
        let mut s = b[r];
        for k in r + 1..3 {
            s -= a[r][k] * x[k];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

/// Horizontal and vertical stretch of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StretchPair {
    pub dh: f64,
    pub dv: f64,
}

pub fn stretch_of(h_z: Point2, h_zbar: Point2) -> StretchPair {
    let (a, b) = (h_z.norm(), h_zbar.norm());
    StretchPair { dh: a + b, dv: (a - b).abs() }
}

pub fn stretch(m: &MeshMap) -> Result<Vec<StretchPair>, HopfError> {
    Ok(wirtinger(m)?.iter().map(|d| stretch_of(d.h_z, d.h_zbar)).collect())
}

/// Least-squares slope of `log err` against `log h`.
pub fn convergence_rate(h: &[f64], err: &[f64]) -> f64 {
    let n = h.len() as f64;
    let xs: Vec<f64> = h.iter().map(|x| libm::log(*x)).collect();
    let ys: Vec<f64> = err.iter().map(|x| libm::log(*x)).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Affine image `center + a zeta + b conj(zeta)` of the unit disk, the
/// parameter domain for the identity quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticDomain {
    pub center: Point2,
    pub a: Point2,
    pub b: Point2,
}

impl EllipticDomain {
    pub fn disk(center: Point2, radius: f64) -> Self {
        Self { center, a: Point2::new(radius, 0.0), b: Point2::new(0.0, 0.0) }
    }

    pub fn point(&self, zeta: Point2) -> Point2 {
        self.center + self.a * zeta + self.b * zeta.conj()
    }

    pub fn area(&self) -> f64 {
        PI * (self.a.norm_sqr() - self.b.norm_sqr())
    }

    /// Polar midpoint rule, `n` radii by `n` angles: `(point, weight)`.
    pub fn nodes(&self, n: usize) -> impl Iterator<Item = (Point2, f64)> + '_ {
        let jac = self.a.norm_sqr() - self.b.norm_sqr();
        let (dr, dt) = (1.0 / n as f64, 2.0 * PI / n as f64);
        (0..n).flat_map(move |i| {
            let r = (i as f64 + 0.5) * dr;
            (0..n).map(move |j| {
                let t = (j as f64 + 0.5) * dt;
                (self.point(Point2::from_polar(r, t)), r * dr * dt * jac)
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// `gap` over the sum of both energies.
    pub relative_gap: f64,
    /// Smallest `|f_z|^2 - |f_zbar|^2` met at a quadrature node.
    pub min_inner_jacobian: f64,
}

/// Solves `a d + b conj(d) = r` for `d`.
fn solve_conj_linear(a: Point2, b: Point2, r: Point2) -> Option<Point2> {
    let det = a.norm_sqr() - b.norm_sqr();
    if det.abs() < 1e-300 {
        return None;
    }
    Some((r * a.conj() - b * r.conj()) / det)
}

/// Newton solve of `H(w) = y` from `w0`.
pub fn invert(big_h: &impl Fn(Point2) -> MapSample, y: Point2, w0: Point2) -> Option<Point2> {
    let mut w = w0;
    for _ in 0..60 {
        let s = big_h(w);
        let r = y - s.value;
        if r.norm() <= 1e-14 * (1.0 + y.norm()) {
            return Some(w);
        }
        w += solve_conj_linear(s.h_z, s.h_zbar, r)?;
        if !(w.re.is_finite() && w.im.is_finite()) {
            return None;
        }
    }
    let r = y - big_h(w).value;
    (r.norm() <= 1e-11 * (1.0 + y.norm())).then_some(w)
}

/// Both sides of the energy identity for `h: G -> Y` and `H: X -> Y`, with
/// `f = H^{-1} o h` found by Newton iteration started at `guess(z)`.
pub fn energy_identity_gap(
    h: impl Fn(Point2) -> MapSample,
    big_h: impl Fn(Point2) -> MapSample,
    g_dom: &EllipticDomain,
    x_dom: &EllipticDomain,
    guess: impl Fn(Point2) -> Point2,
    n: usize,
) -> Result<EnergyIdentity, HopfError> {
    if n < 2 {
        return Err(HopfError::Quadrature(n));
    }
    let energy_density = |s: MapSample| 2.0 * (s.h_z.norm_sqr() + s.h_zbar.norm_sqr());
    let mut ex = CompensatedSum::new();
    for (w, wt) in x_dom.nodes(n) {
        ex.add(wt * energy_density(big_h(w)));
    }
    let mut eg = CompensatedSum::new();
    let mut rhs = CompensatedSum::new();
    let mut min_jf = f64::INFINITY;
    for (z, wt) in g_dom.nodes(n) {
        let s = h(z);
        eg.add(wt * energy_density(s));
        let w = invert(&big_h, s.value, guess(z)).ok_or(HopfError::Inversion(z))?;
        let t = big_h(w);
        // chain rule for h = H o f, solved for the derivatives of f
        let jh = t.jacobian();
        if !(jh > 0.0) {
            return Err(HopfError::Degenerate(z));
        }
        let f_z = (s.h_z * t.h_z.conj() - t.h_zbar * s.h_zbar.conj()) / jh;
        let f_zbar = ((t.h_z * s.h_zbar.conj() - t.h_zbar.conj() * s.h_z) / jh).conj();
        let jf = f_z.norm_sqr() - f_zbar.norm_sqr();
        if !(jf > 0.0) {
            return Err(HopfError::Degenerate(z));
        }
        min_jf = min_jf.min(jf);
        let phi = s.hopf();
        let sigma = if phi.norm() < HOPF_ZERO { Point2::new(0.0, 0.0) } else { phi / phi.norm() };
        let first = ((f_z - sigma * f_zbar).norm_sqr() / jf - 1.0) * (s.h_z * s.h_zbar).norm();
        let d = s.h_z.norm() - s.h_zbar.norm();
        let second = d * d * f_zbar.norm_sqr() / jf;
        rhs.add(wt * 4.0 * (first + second));
    }
    let lhs = ex.value() - eg.value();
    let gap = (lhs - rhs.value()).abs();
    Ok(EnergyIdentity {
        lhs,
        rhs: rhs.value(),
        gap,
        relative_gap: gap / (ex.value() + eg.value()),
        min_inner_jacobian: min_jf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{butterfly, ClosedFormMap};
    use crate::geometry::{regular_polygon, JordanDomain};
    use crate::mesh::{triangulate, triangulate_with, MeshMap};
    use proptest::prelude::*;

    fn c(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn disk_mesh(h: f64) -> Arc<TriangleMesh> {
        Arc::new(triangulate(&JordanDomain::new("d", regular_polygon(c(0.0, 0.0), 1.0, 128, 0.0)).unwrap(), h).unwrap())
    }

    #[test]
    fn identity_has_zero_hopf() {
        let m = MeshMap::identity(disk_mesh(0.2));
        assert!(hopf_product(&m).unwrap().phi.iter().all(|p| p.norm() == 0.0));
        for s in stretch(&m).unwrap() {
            assert!((s.dh - 1.0).abs() < 1e-12 && (s.dv - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_stretch_by_hand() {
        let m = MeshMap::from_fn(disk_mesh(0.3), |z| z + z.conj() * 0.3).unwrap();
        for s in stretch(&m).unwrap() {
            assert!((s.dh - 1.3).abs() < 1e-12 && (s.dv - 0.7).abs() < 1e-12);
            assert!((s.dh * s.dv - 0.91).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_of_linear_fields() {
        let mesh = disk_mesh(0.15);
        let constant = holomorphy_residual(&HopfField::sample(mesh.clone(), |_| c(-0.25, 0.1)));
        assert!(constant.global < 1e-12);
        let affine = holomorphy_residual(&HopfField::sample(mesh.clone(), |z| c(0.3, 1.0) + z * c(2.0, -1.0)));
        assert!(affine.global < 1e-12, "{}", affine.global);
        let anti = holomorphy_residual(&HopfField::sample(mesh, |z| z.conj()));
        assert!(anti.per_vertex.iter().all(|&(_, r)| (r - 1.0).abs() < 1e-10));
        assert!(anti.skipped.is_empty());
    }

    #[test]
    fn butterfly_centroid_error_shrinks() {
        let map = ClosedFormMap::butterfly();
        let mut errs = Vec::new();
        for h in [0.1, 0.05] {
            let mesh = Arc::new(triangulate_with(map.domain(), &map.mesh_options(h)).unwrap());
            let f = hopf_product(&map.sample_on(mesh).unwrap()).unwrap();
            errs.push(f.max_error(|z| butterfly(z).hopf()));
        }
        assert!(errs[1] < errs[0] / 1.5, "{errs:?}");
    }

    #[test]
    fn control_residual_stays_large() {
        let map = ClosedFormMap::control();
        let mesh = Arc::new(triangulate(map.domain(), 0.08).unwrap());
        let r = holomorphy_residual(&hopf_product(&map.sample_on(mesh).unwrap()).unwrap());
        assert!(r.global > 0.2, "{}", r.global);
    }

    #[test]
    fn convergence_rate_of_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|x| 3.0 * x * x).collect();
        assert!((convergence_rate(&h, &e) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_pair_is_zero() {
        let id = |z: Point2| MapSample { value: z, h_z: c(1.0, 0.0), h_zbar: c(0.0, 0.0) };
        let d = EllipticDomain::disk(c(0.0, 0.0), 1.0);
        let r = energy_identity_gap(id, id, &d, &d, |z| z, 32).unwrap();
        assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12);
    }

    #[test]
    fn doubling_pair_uses_zero_sigma() {
        // h = id on the disk, H(w) = 2w on the half disk: 8 (pi/4) - 2 pi = 0
        let id = |z: Point2| MapSample { value: z, h_z: c(1.0, 0.0), h_zbar: c(0.0, 0.0) };
        let dbl = |w: Point2| MapSample { value: w * 2.0, h_z: c(2.0, 0.0), h_zbar: c(0.0, 0.0) };
        let g = EllipticDomain::disk(c(0.0, 0.0), 1.0);
        let x = EllipticDomain::disk(c(0.0, 0.0), 0.5);
        let r = energy_identity_gap(id, dbl, &g, &x, |z| z / 2.0, 64).unwrap();
        assert!(r.lhs.abs() < 1e-9 && r.rhs.abs() < 1e-12, "{r:?}");
        assert!((r.min_inner_jacobian - 0.25).abs() < 1e-12);
    }

    #[test]
    fn elliptic_quadrature_area() {
        let d = EllipticDomain { center: c(0.1, 0.0), a: c(1.0, 0.2), b: c(0.3, 0.0) };
        let s: f64 = d.nodes(64).map(|(_, w)| w).sum();
        assert!((s - d.area()).abs() < 1e-12);
    }

    #[test]
    fn newton_inverts_affine_map() {
        let big_h = |w: Point2| MapSample { value: w + w.conj() * 0.4, h_z: c(1.0, 0.0), h_zbar: c(0.4, 0.0) };
        let w = invert(&big_h, c(0.7, -0.2), c(0.0, 0.0)).unwrap();
        assert!((big_h(w).value - c(0.7, -0.2)).norm() < 1e-13);
    }

    #[test]
    fn butterfly_field_bound() {
        let map = ClosedFormMap::butterfly();
        let mesh = Arc::new(triangulate_with(map.domain(), &map.mesh_options(0.2)).unwrap());
        let m = map.sample_on(mesh).unwrap();
        let f = hopf_product(&m).unwrap();
        for (p, d) in f.phi.iter().zip(wirtinger(&m).unwrap()) {
            assert!(p.norm() <= 0.5 * (d.h_z.norm_sqr() + d.h_zbar.norm_sqr()) + 1e-15);
        }
    }

    proptest! {
        #[test]
        fn stretch_identities(hz in (-2.0f64..2.0, -2.0f64..2.0), hzb in (-2.0f64..2.0, -2.0f64..2.0)) {
            let (a, b) = (c(hz.0, hz.1), c(hzb.0, hzb.1));
            let s = stretch_of(a, b);
            let j = a.norm_sqr() - b.norm_sqr();
            let phi = (a * b.conj()).norm();
            let scale = 1.0 + a.norm_sqr() + b.norm_sqr();
            prop_assert!(s.dh >= s.dv);
            prop_assert!((s.dh * s.dv - j.abs()).abs() <= 1e-12 * scale);
            prop_assert!((s.dh * s.dh - s.dv * s.dv - 4.0 * phi).abs() <= 1e-12 * scale);
            prop_assert!(s.dv * s.dv <= j.abs() + 1e-12 * scale && j.abs() <= s.dh * s.dh + 1e-12 * scale);
        }

        #[test]
        fn holomorphic_linear_fields_have_no_residual(a in (-1.0f64..1.0, -1.0f64..1.0), b in (-1.0f64..1.0, -1.0f64..1.0)) {
            let mesh = disk_mesh(0.3);
            let r = holomorphy_residual(&HopfField::sample(mesh, |z| c(a.0, a.1) + c(b.0, b.1) * z));
            prop_assert!(r.global < 1e-12);
        }
    }
}
