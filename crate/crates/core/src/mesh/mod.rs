//! Triangle meshes and piecewise-linear maps on them.
//!
//! A [`MeshMap`] assigns a complex value to every vertex; on each triangle
//! the map is the affine interpolant, so its Wirtinger derivatives, Jacobian
//! and energy density are constant per triangle.

mod delaunay;

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{cross, segment_distance, Containment, JordanDomain, BOUNDARY_TOL};
use crate::sum::{fsum, CompensatedSum};
use crate::Point2;

pub use delaunay::RefineError;

pub const DEFAULT_MIN_ANGLE_DEG: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("target edge length must be positive and finite, got {0}")]
    BadTargetEdge(f64),
    #[error("triangle {0} references vertex {1}, but the mesh has {2} vertices")]
    IndexOutOfRange(usize, usize, usize),
    #[error("triangle {0} has non-positive area {1:e}")]
    DegenerateTriangle(usize, f64),
    #[error("edge ({0}, {1}) is shared inconsistently")]
    NonConforming(usize, usize),
    #[error("boundary edges do not form a single closed loop")]
    BrokenBoundary,
    #[error("boundary loop does not match the mesh boundary")]
    BoundaryLoopMismatch,
    #[error("mesh has no triangles")]
    Empty,
    #[error("map has {0} values for {1} vertices")]
    ValueCount(usize, usize),
    #[error("map value at vertex {0} is not finite")]
    NonFiniteValue(usize),
    #[error("domain is not symmetric about the imaginary axis")]
    NotMirrorSymmetric,
    #[error(transparent)]
    Refine(#[from] RefineError),
}

/// Validated mesh edge length.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TargetEdge(f64);

impl TargetEdge {
    pub fn new(h: f64) -> Result<Self, MeshError> {
        if h > 0.0 && h.is_finite() {
            Ok(Self(h))
        } else {
            Err(MeshError::BadTargetEdge(h))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Conforming counterclockwise triangulation with its boundary loop.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    boundary_loop: Vec<usize>,
    on_boundary: Vec<bool>,
    incident_start: Vec<usize>,
    incident: Vec<usize>,
}

fn tri_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * cross(b - a, c - a)
}

impl TriangleMesh {
    /// Builds a mesh and derives its boundary loop, starting from the
    /// lowest-numbered boundary vertex.
    pub fn from_triangles(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let next = Self::check_and_boundary(&vertices, &triangles)?;
        let start = (0..vertices.len()).find(|&v| next[v] != usize::MAX).ok_or(MeshError::BrokenBoundary)?;
        let mut boundary_loop = vec![start];
        let mut v = next[start];
        while v != start {
            if boundary_loop.len() > vertices.len() || v == usize::MAX {
                return Err(MeshError::BrokenBoundary);
            }
            boundary_loop.push(v);
            v = next[v];
        }
        let count = next.iter().filter(|&&n| n != usize::MAX).count();
        if count != boundary_loop.len() {
            return Err(MeshError::BrokenBoundary);
        }
        Ok(Self::assemble(vertices, triangles, boundary_loop))
    }

    /// Builds a mesh from all three parts, checking that the loop traces the boundary.
    pub fn new(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>, boundary_loop: Vec<usize>) -> Result<Self, MeshError> {
        let derived = Self::from_triangles(vertices, triangles)?;
        let n = boundary_loop.len();
        if n != derived.boundary_loop.len() {
            return Err(MeshError::BoundaryLoopMismatch);
        }
        let offset = boundary_loop
            .iter()
            .position(|&v| v == derived.boundary_loop[0])
            .ok_or(MeshError::BoundaryLoopMismatch)?;
        if (0..n).any(|k| boundary_loop[(offset + k) % n] != derived.boundary_loop[k]) {
            return Err(MeshError::BoundaryLoopMismatch);
        }
        Ok(Self { boundary_loop, ..derived })
    }

    /// Validates triangles and returns, for each boundary vertex, its successor
    /// along the counterclockwise boundary (`usize::MAX` for interior vertices).
    fn check_and_boundary(vertices: &[Point2], triangles: &[[usize; 3]]) -> Result<Vec<usize>, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = vertices.len();
        let mut directed: Vec<(usize, usize)> = Vec::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(MeshError::IndexOutOfRange(t, v, nv));
                }
            }
            let a = tri_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(a > 0.0) {
                return Err(MeshError::DegenerateTriangle(t, a));
            }
            for i in 0..3 {
                directed.push((tri[i], tri[(i + 1) % 3]));
            }
        }
        directed.sort_unstable();
        for w in directed.windows(2) {
            if w[0] == w[1] {
                return Err(MeshError::NonConforming(w[0].0, w[0].1));
            }
        }
        let mut next = vec![usize::MAX; nv];
        for &(a, b) in &directed {
            if directed.binary_search(&(b, a)).is_err() {
                if next[a] != usize::MAX {
                    return Err(MeshError::BrokenBoundary);
                }
                next[a] = b;
            }
        }
        Ok(next)
    }

    fn assemble(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>, boundary_loop: Vec<usize>) -> Self {
        let nv = vertices.len();
        let mut on_boundary = vec![false; nv];
        for &v in &boundary_loop {
            on_boundary[v] = true;
        }
        let mut counts = vec![0usize; nv + 1];
        for tri in &triangles {
            for &v in tri {
                counts[v + 1] += 1;
            }
        }
        for i in 0..nv {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut incident = vec![0; counts[nv]];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                incident[fill[v]] = t;
                fill[v] += 1;
            }
        }
        Self { vertices, triangles, boundary_loop, on_boundary, incident_start: counts, incident }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_loop(&self) -> &[usize] {
        &self.boundary_loop
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Triangles incident to vertex `v`.
    pub fn incident_triangles(&self, v: usize) -> &[usize] {
        &self.incident[self.incident_start[v]..self.incident_start[v + 1]]
    }

    pub fn corners(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        tri_area(a, b, c)
    }

    pub fn centroid(&self, t: usize) -> Point2 {
        let [a, b, c] = self.corners(t);
        (a + b + c) / 3.0
    }

    pub fn total_area(&self) -> f64 {
        fsum((0..self.triangles.len()).map(|t| self.area(t)))
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| !self.on_boundary[v])
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.corners(t);
                delaunay::min_angle(a, b, c).to_degrees()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_edge(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.corners(t);
                (b - a).norm().max((c - b).norm()).max((a - c).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Meshing parameters. Interior `constraints` end either inside the domain
/// or exactly at boundary polygon vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshOptions {
    pub target_edge: f64,
    pub min_angle_deg: f64,
    pub lattice_seed: bool,
    pub constraints: Vec<(Point2, Point2)>,
    pub max_vertices: usize,
}

impl MeshOptions {
    pub fn new(target_edge: f64) -> Self {
        Self { target_edge, ..Self::default() }
    }

    pub fn with_constraint(mut self, a: Point2, b: Point2) -> Self {
        self.constraints.push((a, b));
        self
    }
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            target_edge: 0.1,
            min_angle_deg: DEFAULT_MIN_ANGLE_DEG,
            lattice_seed: true,
            constraints: Vec::new(),
            max_vertices: 4_000_000,
        }
    }
}

/// Quality triangulation with default options.
pub fn triangulate(d: &JordanDomain, target_edge: f64) -> Result<TriangleMesh, MeshError> {
    triangulate_with(d, &MeshOptions::new(target_edge))
}

/// Lattice spacing relative to the target edge; spacing at the target itself
/// lets every Steiner point trigger a chain of long-edge splits.
const LATTICE_FACTOR: f64 = 0.8;

fn subdivide(a: Point2, b: Point2, h: f64) -> Vec<Point2> {
    let n = libm::ceil((b - a).norm() / h).max(1.0) as usize;
    (0..n).map(|k| a + (b - a) * (k as f64 / n as f64)).collect()
}

pub fn triangulate_with(d: &JordanDomain, opts: &MeshOptions) -> Result<TriangleMesh, MeshError> {
    let h = TargetEdge::new(opts.target_edge)?.get();
    let outline = d.boundary();
    let n = outline.len();
    let mut refiner = delaunay::Refiner::new(outline, h, opts.min_angle_deg);
    let mut scratch = Vec::new();

    let mut chain = Vec::new();
    for i in 0..n {
        chain.extend(subdivide(outline[i], outline[(i + 1) % n], h));
    }
    let ids: Vec<usize> = chain.iter().map(|&p| refiner.insert(p, &mut scratch)).collect();
    let mut segments: Vec<(Point2, Point2)> = (0..n).map(|i| (outline[i], outline[(i + 1) % n])).collect();
    let mut seg_ids = Vec::new();
    for k in 0..ids.len() {
        seg_ids.push((ids[k], ids[(k + 1) % ids.len()]));
    }
    for &(a, b) in &opts.constraints {
        let mut pts = subdivide(a, b, h);
        pts.push(b);
        let cids: Vec<usize> = pts.iter().map(|&p| refiner.insert(p, &mut scratch)).collect();
        for w in cids.windows(2) {
            seg_ids.push((w[0], w[1]));
        }
        segments.push((a, b));
    }
    if opts.lattice_seed {
        let s = LATTICE_FACTOR * h;
        for p in delaunay::lattice_points(outline, &segments, s, 0.5 * s) {
            refiner.insert(p, &mut scratch);
        }
    }
    for (a, b) in seg_ids {
        refiner.add_segment(a, b);
    }
    refiner.refine(opts.max_vertices)?;
    let out = refiner.finish();
    TriangleMesh::from_triangles(out.vertices, out.triangles)
}

/// Triangulates a domain symmetric under `z -> -conj(z)` so that the mesh has
/// the same symmetry exactly. Returns the mesh and the vertex involution.
pub fn triangulate_mirror_symmetric(d: &JordanDomain, opts: &MeshOptions) -> Result<(TriangleMesh, Vec<usize>), MeshError> {
    let pts = d.boundary();
    let n = pts.len();
    let snap = 1e-12 * d.diameter();
    for &p in pts {
        let q = -p.conj();
        let nearest = pts.iter().map(|&r| (r - q).norm()).fold(f64::INFINITY, f64::min);
        if nearest > 1e-9 * d.diameter() && d.boundary_distance(q) > 1e-9 * d.diameter() {
            return Err(MeshError::NotMirrorSymmetric);
        }
    }
    let x = |p: Point2| if p.re.abs() <= snap { 0.0 } else { p.re };
    // Right half, counterclockwise from the lower axis crossing to the upper one.
    let mut half: Vec<Point2> = Vec::new();
    let mut start = None;
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        if x(a) <= 0.0 && x(b) > 0.0 {
            start = Some(i);
            break;
        }
    }
    let start = start.ok_or(MeshError::NotMirrorSymmetric)?;
    let cross_axis = |a: Point2, b: Point2| {
        if x(a) == 0.0 {
            Point2::new(0.0, a.im)
        } else {
            let t = a.re / (a.re - b.re);
            Point2::new(0.0, a.im + t * (b.im - a.im))
        }
    };
    half.push(cross_axis(pts[start], pts[(start + 1) % n]));
    let mut i = (start + 1) % n;
    loop {
        let p = pts[i];
        if x(p) > 0.0 {
            half.push(p);
        } else {
            let prev = pts[(i + n - 1) % n];
            half.push(cross_axis(prev, p));
            break;
        }
        i = (i + 1) % n;
        if i == start {
            return Err(MeshError::NotMirrorSymmetric);
        }
    }
    let half_domain = JordanDomain::trusted("half", half);
    let mut half_opts = opts.clone();
    half_opts.constraints.retain(|(a, b)| a.re >= 0.0 && b.re >= 0.0);
    let hm = triangulate_with(&half_domain, &half_opts)?;

    let nh = hm.vertex_count();
    let mut vertices = hm.vertices().to_vec();
    let mut mirror = vec![usize::MAX; nh];
    for v in 0..nh {
        let p = hm.vertices()[v];
        if p.re == 0.0 {
            mirror[v] = v;
        } else {
            mirror[v] = vertices.len();
            vertices.push(-p.conj());
        }
    }
    let mut triangles = hm.triangles().to_vec();
    for &[a, b, c] in hm.triangles() {
        triangles.push([mirror[a], mirror[c], mirror[b]]);
    }
    let mut involution = vec![0; vertices.len()];
    for v in 0..nh {
        involution[v] = mirror[v];
        involution[mirror[v]] = v;
    }
    let mesh = TriangleMesh::from_triangles(vertices, triangles)?;
    Ok((mesh, involution))
}

/// Piecewise-linear map: one complex value per mesh vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshMap {
    mesh: Arc<TriangleMesh>,
    values: Vec<Point2>,
}

impl MeshMap {
    pub fn new(mesh: Arc<TriangleMesh>, values: Vec<Point2>) -> Result<Self, MeshError> {
        if values.len() != mesh.vertex_count() {
            return Err(MeshError::ValueCount(values.len(), mesh.vertex_count()));
        }
        if let Some(i) = values.iter().position(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(MeshError::NonFiniteValue(i));
        }
        Ok(Self { mesh, values })
    }

    /// Samples `f` at the vertices.
    pub fn from_fn(mesh: Arc<TriangleMesh>, f: impl Fn(Point2) -> Point2) -> Result<Self, MeshError> {
        let values = mesh.vertices().iter().map(|&z| f(z)).collect();
        Self::new(mesh, values)
    }

    pub fn identity(mesh: Arc<TriangleMesh>) -> Self {
        let values = mesh.vertices().to_vec();
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<TriangleMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[Point2] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Point2] {
        &mut self.values
    }

    /// Largest vertexwise distance to another map on the same mesh.
    pub fn sup_distance(&self, other: &MeshMap) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Affine interpolant at `z`, if `z` lies in (or within `tol` of) some triangle.
    pub fn eval(&self, z: Point2, tol: f64) -> Option<Point2> {
        let m = &*self.mesh;
        let mut best: Option<(f64, Point2)> = None;
        for t in 0..m.triangle_count() {
            let [a, b, c] = m.corners(t);
            let area = tri_area(a, b, c);
            let l0 = tri_area(z, b, c) / area;
            let l1 = tri_area(a, z, c) / area;
            let l2 = 1.0 - l0 - l1;
            let worst = l0.min(l1).min(l2);
            if worst >= 0.0 {
                let [i, j, k] = m.triangles[t];
                return Some(self.values[i] * l0 + self.values[j] * l1 + self.values[k] * l2);
            }
            let scale = (b - a).norm().max((c - a).norm());
            let slack = -worst * scale;
            if slack <= tol && best.is_none_or(|(s, _)| slack < s) {
                let [i, j, k] = m.triangles[t];
                best = Some((slack, self.values[i] * l0 + self.values[j] * l1 + self.values[k] * l2));
            }
        }
        best.map(|(_, w)| w)
    }
}

/// Per-triangle Wirtinger derivatives of the affine interpolant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleDerivatives {
    pub h_z: Point2,
    pub h_zbar: Point2,
    pub jacobian: f64,
    pub area: f64,
}

/// `h_z`, `h_zbar` of the affine map sending `z_k` to `w_k`.
pub fn affine_wirtinger(z: [Point2; 3], w: [Point2; 3]) -> Option<(Point2, Point2)> {
    let (e1, e2) = (z[1] - z[0], z[2] - z[0]);
    let (d1, d2) = (w[1] - w[0], w[2] - w[0]);
    let det = e1 * e2.conj() - e1.conj() * e2;
    if det.norm() == 0.0 {
        return None;
    }
    let hz = (d1 * e2.conj() - d2 * e1.conj()) / det;
    let hzb = (e1 * d2 - e2 * d1) / det;
    Some((hz, hzb))
}

pub fn wirtinger(m: &MeshMap) -> Result<Vec<TriangleDerivatives>, MeshError> {
    let mesh = m.mesh();
    (0..mesh.triangle_count())
        .map(|t| {
            let [i, j, k] = mesh.triangles[t];
            let z = mesh.corners(t);
            let area = tri_area(z[0], z[1], z[2]);
            let (h_z, h_zbar) = affine_wirtinger(z, [m.values[i], m.values[j], m.values[k]])
                .filter(|_| area > 0.0)
                .ok_or(MeshError::DegenerateTriangle(t, area))?;
            Ok(TriangleDerivatives { h_z, h_zbar, jacobian: h_z.norm_sqr() - h_zbar.norm_sqr(), area })
        })
        .collect()
}

fn energy_of(ders: &[TriangleDerivatives]) -> f64 {
    fsum(ders.iter().map(|d| 2.0 * (d.h_z.norm_sqr() + d.h_zbar.norm_sqr()) * d.area))
}

/// Dirichlet energy of the interpolant, `sum 2(|h_z|^2 + |h_zbar|^2) area`.
pub fn dirichlet_energy(m: &MeshMap) -> f64 {
    wirtinger(m).map(|d| energy_of(&d)).unwrap_or(f64::NAN)
}

/// `sum area * J`: the signed area swept by the map.
pub fn signed_image_area(m: &MeshMap) -> f64 {
    wirtinger(m).map(|d| fsum(d.iter().map(|t| t.area * t.jacobian))).unwrap_or(f64::NAN)
}

/// Triangles whose vertex images all lie strictly inside a region, with the
/// vertices split into those fully surrounded by selected triangles and the rest.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Submesh {
    pub triangles: Vec<usize>,
    pub interior: Vec<usize>,
    pub boundary: Vec<usize>,
}

impl Submesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }
}

pub fn submesh_by_image(m: &MeshMap, region: &JordanDomain) -> Submesh {
    let mesh = m.mesh();
    let inside: Vec<bool> = m.values.iter().map(|&w| region.contains(w, BOUNDARY_TOL) == Containment::Inside).collect();
    let selected: Vec<bool> = mesh.triangles.iter().map(|t| t.iter().all(|&v| inside[v])).collect();
    let triangles: Vec<usize> = (0..mesh.triangle_count()).filter(|&t| selected[t]).collect();
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    for v in 0..mesh.vertex_count() {
        let inc = mesh.incident_triangles(v);
        let touched = inc.iter().any(|&t| selected[t]);
        if !touched {
            continue;
        }
        if !mesh.is_boundary_vertex(v) && inc.iter().all(|&t| selected[t]) {
            interior.push(v);
        } else {
            boundary.push(v);
        }
    }
    Submesh { triangles, interior, boundary }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianStats {
    pub min_jacobian: f64,
    pub count_negative: usize,
    pub count_near_zero: usize,
    /// Minimum of `J * area / mean_area`: small triangles weigh less.
    pub area_weighted_min: f64,
}

pub fn jacobian_stats(m: &MeshMap, near_zero_tol: f64) -> JacobianStats {
    let ders = wirtinger(m).unwrap_or_default();
    let mean_area = fsum(ders.iter().map(|d| d.area)) / ders.len().max(1) as f64;
    let mut s = JacobianStats {
        min_jacobian: f64::INFINITY,
        count_negative: 0,
        count_near_zero: 0,
        area_weighted_min: f64::INFINITY,
    };
    for d in &ders {
        s.min_jacobian = s.min_jacobian.min(d.jacobian);
        if d.jacobian < -near_zero_tol {
            s.count_negative += 1;
        } else if d.jacobian.abs() <= near_zero_tol {
            s.count_near_zero += 1;
        }
        s.area_weighted_min = s.area_weighted_min.min(d.jacobian * d.area / mean_area);
    }
    s
}

/// Arclength position of each boundary-loop vertex along a polygon, measured
/// from the polygon's first vertex. Vertices must lie on the polygon.
pub fn boundary_arclength(mesh: &TriangleMesh, outline: &[Point2]) -> Vec<f64> {
    let n = outline.len();
    let mut cum = Vec::with_capacity(n + 1);
    let mut acc = CompensatedSum::new();
    cum.push(0.0);
    for i in 0..n {
        acc.add((outline[(i + 1) % n] - outline[i]).norm());
        cum.push(acc.value());
    }
    let total = cum[n];
    mesh.boundary_loop
        .iter()
        .map(|&v| {
            let p = mesh.vertices[v];
            let (mut best, mut s_best) = (f64::INFINITY, 0.0);
            for i in 0..n {
                let (a, b) = (outline[i], outline[(i + 1) % n]);
                let dist = segment_distance(p, a, b);
                if dist < best {
                    best = dist;
                    let t = (p - a).norm();
                    s_best = cum[i] + t;
                }
            }
            if s_best >= total {
                s_best - total
            } else {
                s_best
            }
        })
        .collect()
}
