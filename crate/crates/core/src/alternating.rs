//! Alternating harmonic replacement onto a target covered by two convex
//! cells, with squeezing and monotonicity diagnostics.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::gallery::{clover, CloverEps, GalleryError};
use crate::geometry::{convex_intersection_area, cross, signed_area, ConvexCell, GeometryError, JordanDomain};
use crate::harmonic::{rkc_on_mesh, sample_boundary, BoundaryMap, HarmonicError, HarmonicSolver, ESCAPE_TOL};
use crate::hopf::{holomorphy_residual, hopf_product, HopfError};
use crate::mesh::{dirichlet_energy, submesh_by_image, triangulate, wirtinger, MeshError, MeshMap};
use crate::Point2;

pub const DEFAULT_MAX_ITERS: usize = 50;
pub const DEFAULT_ENERGY_TOL: f64 = 1e-10;
pub const DEFAULT_SUP_TOL: f64 = 1e-8;
/// Relative area mismatch allowed between `Y1 u Y2` and the target.
pub const UNION_AREA_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlternatingError {
    #[error("cells do not overlap (intersection area {0:e})")]
    Disjoint(f64),
    #[error("cell union area {union} differs from target area {target}")]
    UnionMismatch { union: f64, target: f64 },
    #[error("target boundary point {0} is in neither cell")]
    Uncovered(Point2),
    #[error("{0} must be positive and finite")]
    BadParameter(&'static str),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Hopf(#[from] HopfError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
}

#[derive(Debug, Clone)]
pub struct AlternatingConfig {
    pub cells: (ConvexCell, ConvexCell),
    pub max_iters: usize,
    pub energy_tol: f64,
    pub sup_tol: f64,
    pub target_edge: f64,
}

impl AlternatingConfig {
    pub fn new(y1: ConvexCell, y2: ConvexCell, target_edge: f64) -> Result<Self, AlternatingError> {
        let cfg = Self { cells: (y1, y2), max_iters: DEFAULT_MAX_ITERS, energy_tol: DEFAULT_ENERGY_TOL, sup_tol: DEFAULT_SUP_TOL, target_edge };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the tolerances and that the cells overlap.
    pub fn validate(&self) -> Result<(), AlternatingError> {
        if !(self.target_edge > 0.0 && self.target_edge.is_finite()) {
            return Err(AlternatingError::BadParameter("target_edge"));
        }
        if !(self.energy_tol >= 0.0 && self.sup_tol >= 0.0) {
            return Err(AlternatingError::BadParameter("tolerance"));
        }
        let a = convex_intersection_area(&self.cells.0, &self.cells.1);
        if !(a > 0.0) {
            return Err(AlternatingError::Disjoint(a));
        }
        Ok(())
    }

    /// Checks that the cells cover the polygon `target` and add up to its area.
    pub fn validate_target(&self, target: &[Point2]) -> Result<(), AlternatingError> {
        self.validate()?;
        let (y1, y2) = (&self.cells.0, &self.cells.1);
        let union = y1.signed_area() + y2.signed_area() - convex_intersection_area(y1, y2);
        let area = signed_area(target)?;
        if (union - area).abs() > UNION_AREA_TOL * area.abs() {
            return Err(AlternatingError::UnionMismatch { union, target: area });
        }
        let tol = 1e-9 * (y1.diameter() + y2.diameter());
        if let Some(&p) = target.iter().find(|&&p| !(y1.contains_closed(p, tol) || y2.contains_closed(p, tol))) {
            return Err(AlternatingError::Uncovered(p));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub index: usize,
    pub energy: f64,
    /// Sup distance to the previous iterate.
    pub sup_delta: f64,
    pub replaced_interior_count: usize,
    pub hopf_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlternatingStatus {
    Converged,
    MaxIters,
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlternatingTrace {
    /// Record 0 describes the initial map.
    pub records: Vec<IterationRecord>,
    pub final_status: AlternatingStatus,
}

impl AlternatingTrace {
    /// Largest energy increase between consecutive records.
    pub fn energy_slack(&self) -> f64 {
        self.records.windows(2).map(|w| w[1].energy - w[0].energy).fold(0.0, f64::max)
    }

    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }
}

#[derive(Debug, Clone)]
pub struct AlternatingRun {
    pub final_map: MeshMap,
    pub trace: AlternatingTrace,
}

/// Meshes `x`, starts from the discrete harmonic extension of `g` and runs
/// the replacement cycle.
pub fn run_alternating(x: &JordanDomain, g: &BoundaryMap, cfg: &AlternatingConfig) -> Result<AlternatingRun, AlternatingError> {
    cfg.validate_target(&g.image())?;
    let solver = HarmonicSolver::new(Arc::new(triangulate(x, cfg.target_edge)?));
    let bv = sample_boundary(solver.mesh(), x.boundary(), g);
    let (h0, _) = solver.dirichlet(&bv)?;
    run_alternating_from(&solver, h0, cfg, |_, _| {})
}

/// Runs the cycle from a given initial map on the solver's mesh. Odd
/// iterations replace on the preimage of the first cell, even ones on the
/// second. `observe` sees every iterate after it is recorded.
pub fn run_alternating_from(
    solver: &HarmonicSolver,
    h0: MeshMap,
    cfg: &AlternatingConfig,
    mut observe: impl FnMut(&IterationRecord, &MeshMap),
) -> Result<AlternatingRun, AlternatingError> {
    cfg.validate()?;
    let same_cells = cfg.cells.0.boundary() == cfg.cells.1.boundary();
    let mut records = vec![record(0, &h0, 0.0, 0)?];
    observe(&records[0], &h0);
    let mut h = h0;
    let mut status = AlternatingStatus::MaxIters;
    let mut empty_run = 0;
    let mut quiet_prev = false;
    for j in 1..=cfg.max_iters {
        let cell = if j % 2 == 1 { &cfg.cells.0 } else { &cfg.cells.1 };
        let sub = submesh_by_image(&h, cell.domain());
        let (next, _) = solver.replace(&h, &sub)?;
        let rec = record(j, &next, next.sup_distance(&h), sub.interior.len())?;
        let drop = records[j - 1].energy - rec.energy;
        observe(&rec, &next);
        records.push(rec);
        h = next;
        empty_run = if sub.interior.is_empty() { empty_run + 1 } else { 0 };
        if empty_run >= 2 {
            status = AlternatingStatus::Stalled;
            break;
        }
        let quiet = rec.sup_delta < cfg.sup_tol && drop < cfg.energy_tol;
        if quiet && (quiet_prev || same_cells) {
            status = AlternatingStatus::Converged;
            break;
        }
        quiet_prev = quiet;
    }
    Ok(AlternatingRun { final_map: h, trace: AlternatingTrace { records, final_status: status } })
}

fn record(index: usize, m: &MeshMap, sup_delta: f64, replaced: usize) -> Result<IterationRecord, AlternatingError> {
    let hopf_residual = holomorphy_residual(&hopf_product(m)?).global;
    Ok(IterationRecord { index, energy: dirichlet_energy(m), sup_delta, replaced_interior_count: replaced, hopf_residual })
}

/// `z -> -conj(h(-conj z))` on a mirror-symmetric mesh with vertex involution `mirror`.
pub fn reflect_map(m: &MeshMap, mirror: &[usize]) -> Result<MeshMap, MeshError> {
    let v = m.values();
    MeshMap::new(m.mesh_arc().clone(), mirror.iter().map(|&k| -v[k].conj()).collect())
}

/// Sup distance between `b` and the reflection of `a`.
pub fn mirror_defect(a: &MeshMap, b: &MeshMap, mirror: &[usize]) -> f64 {
    let (va, vb) = (a.values(), b.values());
    mirror.iter().enumerate().map(|(i, &k)| (vb[i] + va[k].conj()).norm()).fold(0.0, f64::max)
}

/// Reflex vertices of a polygon: the designated non-convex boundary points.
pub fn reflex_corners(y: &JordanDomain) -> Vec<Point2> {
    let b = y.boundary();
    let n = b.len();
    let scale = y.diameter();
    (0..n)
        .filter(|&i| {
            let (p, q, r) = (b[(i + n - 1) % n], b[i], b[(i + 1) % n]);
            let tol = 1e-12 * scale * scale;
            if cross(q - p, r - q) >= -tol {
                return false;
            }
            let eps = 0.25 * (q - p).norm().min((r - q).norm());
            y.somewhere_convex_probe(q, eps).map_or(true, |convex| !convex)
        })
        .map(|i| b[i])
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqueezedComponent {
    pub vertices: Vec<usize>,
    pub image_point: Point2,
    /// Largest distance between two member vertices in the source.
    pub diameter: f64,
}

/// Connected vertex sets whose images lie within `corner_tol` of a reflex
/// corner of `y`.
pub fn detect_squeezing(m: &MeshMap, y: &JordanDomain, corner_tol: f64) -> Vec<SqueezedComponent> {
    let mesh = m.mesh();
    let mut out = Vec::new();
    for c in reflex_corners(y) {
        let near: Vec<bool> = m.values().iter().map(|w| (w - c).norm() <= corner_tol).collect();
        let mut uf = UnionFind::new(mesh.vertex_count());
        for t in mesh.triangles() {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                if near[a] && near[b] {
                    uf.union(a, b);
                }
            }
        }
        for group in uf.groups(|v| near[v]) {
            let diameter = diameter_of(group.iter().map(|&v| mesh.vertices()[v]));
            out.push(SqueezedComponent { vertices: group, image_point: c, diameter });
        }
    }
    out
}

fn diameter_of(pts: impl Iterator<Item = Point2>) -> f64 {
    let pts: Vec<Point2> = pts.collect();
    let mut d: f64 = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Classes of the elements passing `keep`, each sorted, ordered by smallest member.
    fn groups(&mut self, keep: impl Fn(usize) -> bool) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut slot: Vec<Option<usize>> = vec![None; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for v in (0..n).filter(|&v| keep(v)) {
            let r = self.find(v);
            match slot[r] {
                Some(k) => out[k].push(v),
                None => {
                    slot[r] = Some(out.len());
                    out.push(vec![v]);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonotonicityVerdict {
    Clean,
    CollapsedOk,
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityTolerances {
    /// `J < -reversed_tol * max|J|` counts as reversed. Sampling a
    /// collapsing map gives tiny Jacobians of either sign, so this should
    /// not be below `near_zero_tol`.
    pub reversed_tol: f64,
    /// `|J| <= near_zero_tol * max|J|` counts as collapsed.
    pub near_zero_tol: f64,
}

impl Default for MonotonicityTolerances {
    fn default() -> Self {
        Self { reversed_tol: 1e-2, near_zero_tol: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapsedRegion {
    pub triangles: Vec<usize>,
    pub source_area: f64,
    /// Summed `|J| * area` over the region.
    pub image_area: f64,
    pub image_diameter: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub reversed_triangles: usize,
    pub near_zero_area_fraction: f64,
    pub collapsed: Vec<CollapsedRegion>,
    pub verdict: MonotonicityVerdict,
}

pub fn check_discrete_monotonicity(m: &MeshMap) -> Result<MonotonicityReport, MeshError> {
    check_discrete_monotonicity_with(m, MonotonicityTolerances::default())
}

/// Collapsed regions are edge-connected sets of near-zero-Jacobian
/// triangles. The verdict is `CollapsedOk` when nothing is reversed and
/// every collapsed region has image area small against its source area.
pub fn check_discrete_monotonicity_with(m: &MeshMap, tol: MonotonicityTolerances) -> Result<MonotonicityReport, MeshError> {
    let ders = wirtinger(m)?;
    let mesh = m.mesh();
    let jmax = ders.iter().map(|d| d.jacobian.abs()).fold(0.0, f64::max);
    let reversed_triangles = ders.iter().filter(|d| d.jacobian < -tol.reversed_tol * jmax).count();
    let near: Vec<bool> = ders.iter().map(|d| d.jacobian.abs() <= tol.near_zero_tol * jmax).collect();
    let total_area: f64 = ders.iter().map(|d| d.area).sum();
    let near_area: f64 = ders.iter().zip(&near).filter(|(_, &n)| n).map(|(d, _)| d.area).sum();

    let mut uf = UnionFind::new(mesh.triangle_count());
    let mut edge_owner: alloc::collections::BTreeMap<(usize, usize), usize> = alloc::collections::BTreeMap::new();
    for (t, tri) in mesh.triangles().iter().enumerate().filter(|(t, _)| near[*t]) {
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            let key = (a.min(b), a.max(b));
            if let Some(&s) = edge_owner.get(&key) {
                uf.union(s, t);
            } else {
                edge_owner.insert(key, t);
            }
        }
    }
    let collapsed: Vec<CollapsedRegion> = uf
        .groups(|t| near[t])
        .into_iter()
        .map(|tris| {
            let source_area = tris.iter().map(|&t| ders[t].area).sum();
            let image_area = tris.iter().map(|&t| ders[t].area * ders[t].jacobian.abs()).sum();
            let image_diameter = diameter_of(tris.iter().flat_map(|&t| mesh.triangles()[t]).map(|v| m.values()[v]));
            CollapsedRegion { triangles: tris, source_area, image_area, image_diameter }
        })
        .collect();
    let verdict = if reversed_triangles > 0 {
        MonotonicityVerdict::Reversed
    } else if collapsed.is_empty() {
        MonotonicityVerdict::Clean
    } else {
        MonotonicityVerdict::CollapsedOk
    };
    Ok(MonotonicityReport {
        reversed_triangles,
        near_zero_area_fraction: if total_area > 0.0 { near_area / total_area } else { 0.0 },
        collapsed,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalEpsilonOptions {
    pub target_edge: f64,
    pub samples_per_arc: usize,
    /// Escape depth above which the extension counts as escaping,
    /// relative to the target diameter.
    pub depth_tol: f64,
}

impl Default for CriticalEpsilonOptions {
    fn default() -> Self {
        Self { target_edge: 0.05, samples_per_arc: 64, depth_tol: ESCAPE_TOL }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalEpsilon {
    pub eps_hat: f64,
    /// Escapes at `lo`, none at `hi`.
    pub bracket: (f64, f64),
    /// `(eps, escape_depth)` for every probe, in order.
    pub probes: Vec<(f64, f64)>,
    /// Set when the predicate did not change sign on the probed range.
    pub diagnostic: Option<&'static str>,
}

pub fn estimate_critical_epsilon(resolution: f64) -> Result<CriticalEpsilon, AlternatingError> {
    estimate_critical_epsilon_with(resolution, &CriticalEpsilonOptions::default())
}

/// Bisection on the clover family for the parameter where the harmonic
/// extension of the boundary data stops leaving the target. One mesh of the
/// clover serves every probe.
pub fn estimate_critical_epsilon_with(resolution: f64, opts: &CriticalEpsilonOptions) -> Result<CriticalEpsilon, AlternatingError> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(AlternatingError::BadParameter("resolution"));
    }
    let x = clover(CloverEps::new(1.0)?, opts.samples_per_arc)?.x;
    let solver = HarmonicSolver::new(Arc::new(triangulate(&x, opts.target_edge)?));
    let mut probes = Vec::new();
    let mut depth = |eps: f64| -> Result<f64, AlternatingError> {
        let data = clover(CloverEps::new(eps)?, opts.samples_per_arc)?;
        let y = data.y.as_ref().ok_or(AlternatingError::BadParameter("eps"))?;
        let r = rkc_on_mesh(&solver, x.boundary(), y, &data.g)?;
        probes.push((eps, r.escape_depth));
        Ok(r.escape_depth / y.diameter())
    };
    let (mut lo, mut hi) = ((0.5 * resolution).min(0.5), 1.0);
    let escapes_lo = depth(lo)? > opts.depth_tol;
    let escapes_hi = depth(hi)? > opts.depth_tol;
    let diagnostic = match (escapes_lo, escapes_hi) {
        (true, false) => None,
        (false, false) => Some("no escapes anywhere on the probed range"),
        (true, true) => Some("escapes everywhere on the probed range"),
        (false, true) => Some("escapes only at large parameters"),
    };
    if diagnostic.is_none() {
        while hi - lo > resolution {
            let mid = 0.5 * (lo + hi);
            if depth(mid)? > opts.depth_tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(CriticalEpsilon { eps_hat: 0.5 * (lo + hi), bracket: (lo, hi), probes, diagnostic })
}
