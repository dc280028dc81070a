use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{BoundaryMap, HarmonicError, HarmonicSolver, SolveReport};
use crate::geometry::{Containment, JordanDomain};
use crate::mesh::{boundary_arclength, triangulate, wirtinger, MeshMap, TriangleMesh};
use crate::Point2;

/// Escape threshold relative to the target diameter.
pub const ESCAPE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct RkcReport {
    pub map: MeshMap,
    pub solve: SolveReport,
    pub min_jacobian: f64,
    /// Source positions of interior vertices mapped outside the closed target.
    pub escape_points: Vec<Point2>,
    pub escape_depth: f64,
}

impl RkcReport {
    pub fn escaped(&self) -> bool {
        !self.escape_points.is_empty()
    }
}

/// Samples `g` at the boundary-loop vertices of `mesh`, reading arclength
/// along `outline` proportionally onto the parameter range of `g`.
pub fn sample_boundary(mesh: &TriangleMesh, outline: &[Point2], g: &BoundaryMap) -> Vec<Point2> {
    let s = boundary_arclength(mesh, outline);
    let k = g.period() / crate::geometry::perimeter(outline);
    let s0 = g.knots()[0].0;
    s.into_iter().map(|s| g.eval(s0 + s * k)).collect()
}

pub fn rkc_extend_and_check(x: &JordanDomain, y: &JordanDomain, g: &BoundaryMap, target_edge: f64) -> Result<RkcReport, HarmonicError> {
    let mesh = Arc::new(triangulate(x, target_edge)?);
    rkc_on_mesh(&HarmonicSolver::new(mesh), x.boundary(), y, g)
}

/// Same check on a prepared solver, so that a mesh can be reused across
/// boundary data.
pub fn rkc_on_mesh(solver: &HarmonicSolver, outline: &[Point2], y: &JordanDomain, g: &BoundaryMap) -> Result<RkcReport, HarmonicError> {
    let bv = sample_boundary(solver.mesh(), outline, g);
    let (map, solve) = solver.dirichlet(&bv)?;
    let min_jacobian = wirtinger(&map)?.iter().map(|d| d.jacobian).fold(f64::INFINITY, f64::min);
    let tol = ESCAPE_TOL * y.diameter();
    let mut escape_points = Vec::new();
    let mut escape_depth = 0.0_f64;
    for v in map.mesh().interior_vertices() {
        let w = map.values()[v];
        if y.contains(w, tol) == Containment::Outside {
            escape_points.push(map.mesh().vertices()[v]);
            escape_depth = escape_depth.max(y.distance_outside(w));
        }
    }
    Ok(RkcReport { map, solve, min_jacobian, escape_points, escape_depth })
}
