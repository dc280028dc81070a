use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::HarmonicError;
use crate::geometry::{cross, dot};
use crate::mesh::{dirichlet_energy, MeshMap, Submesh, TriangleMesh};
use crate::Point2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Target for `|b - Ax| / |b|`, per component.
    pub rel_tol: f64,
    /// Iteration cap; `None` means ten times the number of unknowns.
    pub max_iters: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_iters: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub residual_norm: f64,
    pub iterations: usize,
    pub energy: f64,
}

/// Cotangent Laplacian in compressed rows: off-diagonal weights `w_ij`
/// (so that the stiffness entry is `-w_ij`) and the row sums on the diagonal.
#[derive(Debug, Clone)]
pub struct CotanLaplacian {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
    diag: Vec<f64>,
}

impl CotanLaplacian {
    pub fn new(mesh: &TriangleMesh) -> Self {
        let n = mesh.vertex_count();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for t in mesh.triangles() {
            for k in 0..3 {
                let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                let va = mesh.vertices()[a];
                let (eb, ec) = (mesh.vertices()[b] - va, mesh.vertices()[c] - va);
                let w = 0.5 * dot(eb, ec) / cross(eb, ec);
                rows[b].push((c, w));
                rows[c].push((b, w));
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        let mut diag = vec![0.0; n];
        offsets.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut w = 0.0;
                while k < row.len() && row[k].0 == j {
                    w += row[k].1;
                    k += 1;
                }
                cols.push(j);
                weights.push(w);
                diag[i] += w;
            }
            offsets.push(cols.len());
        }
        Self { offsets, cols, weights, diag }
    }

    pub fn vertex_count(&self) -> usize {
        self.diag.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.diag[i]
    }

    /// `(L u)_i = sum_j w_ij (u_i - u_j)`, the gradient of half the energy.
    pub fn apply_at(&self, u: &[Point2], i: usize) -> Point2 {
        self.row(i).fold(Point2::new(0.0, 0.0), |acc, (j, w)| acc + (u[i] - u[j]) * w)
    }
}

/// Reusable harmonic solver bound to one mesh.
#[derive(Debug, Clone)]
pub struct HarmonicSolver {
    mesh: Arc<TriangleMesh>,
    lap: CotanLaplacian,
    opts: SolverOptions,
}

impl HarmonicSolver {
    pub fn new(mesh: Arc<TriangleMesh>) -> Self {
        Self::with_options(mesh, SolverOptions::default())
    }

    pub fn with_options(mesh: Arc<TriangleMesh>, opts: SolverOptions) -> Self {
        let lap = CotanLaplacian::new(&mesh);
        Self { mesh, lap, opts }
    }

    pub fn mesh(&self) -> &Arc<TriangleMesh> {
        &self.mesh
    }

    pub fn laplacian(&self) -> &CotanLaplacian {
        &self.lap
    }

    pub fn options(&self) -> SolverOptions {
        self.opts
    }

    /// Discrete harmonic extension of values given along `boundary_loop`.
    pub fn dirichlet(&self, boundary_values: &[Point2]) -> Result<(MeshMap, SolveReport), HarmonicError> {
        let bl = self.mesh.boundary_loop();
        if boundary_values.len() != bl.len() {
            return Err(HarmonicError::BoundaryCount { expected: bl.len(), got: boundary_values.len() });
        }
        if let Some(i) = boundary_values.iter().position(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(HarmonicError::NonFinite(i));
        }
        let mean = boundary_values.iter().fold(Point2::new(0.0, 0.0), |a, &b| a + b) / bl.len() as f64;
        let mut values = vec![mean; self.mesh.vertex_count()];
        for (&v, &w) in bl.iter().zip(boundary_values) {
            values[v] = w;
        }
        let free: Vec<usize> = self.mesh.interior_vertices().collect();
        let (residual_norm, iterations) = self.solve_free(&mut values, &free)?;
        let map = MeshMap::new(self.mesh.clone(), values)?;
        let energy = dirichlet_energy(&map);
        Ok((map, SolveReport { residual_norm, iterations, energy }))
    }

    /// Replaces the values at `sub.interior` by the discrete harmonic solve
    /// with every other vertex held fixed.
    pub fn replace(&self, m: &MeshMap, sub: &Submesh) -> Result<(MeshMap, SolveReport), HarmonicError> {
        if !Arc::ptr_eq(m.mesh_arc(), &self.mesh) && m.mesh_arc().vertices() != self.mesh.vertices() {
            return Err(HarmonicError::ForeignMesh);
        }
        let mut out = m.clone();
        if sub.interior.is_empty() {
            let energy = dirichlet_energy(&out);
            return Ok((out, SolveReport { residual_norm: 0.0, iterations: 0, energy }));
        }
        if let Some(&v) = sub.interior.iter().find(|&&v| v >= self.mesh.vertex_count() || self.mesh.is_boundary_vertex(v)) {
            return Err(HarmonicError::BadSubmesh(v));
        }
        let (residual_norm, iterations) = self.solve_free(out.values_mut(), &sub.interior)?;
        let energy = dirichlet_energy(&out);
        Ok((out, SolveReport { residual_norm, iterations, energy }))
    }

    /// Jacobi-preconditioned conjugate gradients on the rows of `free`,
    /// warm-started from the current values, one real component at a time.
    fn solve_free(&self, values: &mut [Point2], free: &[usize]) -> Result<(f64, usize), HarmonicError> {
        let n = free.len();
        if n == 0 {
            return Ok((0.0, 0));
        }
        let mut local = vec![usize::MAX; values.len()];
        for (k, &v) in free.iter().enumerate() {
            if !(self.lap.diagonal(v) > 0.0) {
                return Err(HarmonicError::Singular(v));
            }
            local[v] = k;
        }
        let max_iters = self.opts.max_iters.unwrap_or(10 * n + 100);
        let mut worst = 0.0_f64;
        let mut iters = 0;
        for comp in 0..2 {
            let part = |w: Point2| if comp == 0 { w.re } else { w.im };
            let mut b = vec![0.0; n];
            let mut x = vec![0.0; n];
            for (k, &v) in free.iter().enumerate() {
                x[k] = part(values[v]);
                b[k] = self.lap.row(v).filter(|&(j, _)| local[j] == usize::MAX).map(|(j, w)| w * part(values[j])).sum();
            }
            let (res, it) = self.pcg(free, &local, &b, &mut x, max_iters)?;
            worst = worst.max(res);
            iters += it;
            for (k, &v) in free.iter().enumerate() {
                if comp == 0 {
                    values[v].re = x[k];
                } else {
                    values[v].im = x[k];
                }
            }
        }
        Ok((worst, iters))
    }

    fn apply_free(&self, free: &[usize], local: &[usize], x: &[f64], y: &mut [f64]) {
        for (k, &v) in free.iter().enumerate() {
            let mut acc = self.lap.diagonal(v) * x[k];
            for (j, w) in self.lap.row(v) {
                let l = local[j];
                if l != usize::MAX {
                    acc -= w * x[l];
                }
            }
            y[k] = acc;
        }
    }

    fn pcg(&self, free: &[usize], local: &[usize], b: &[f64], x: &mut [f64], max_iters: usize) -> Result<(f64, usize), HarmonicError> {
        let n = b.len();
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let dotp = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let bnorm = norm(b);
        let scale = if bnorm > 0.0 { bnorm } else { 1.0 };
        let inv_diag: Vec<f64> = free.iter().map(|&v| 1.0 / self.lap.diagonal(v)).collect();
        let mut ax = vec![0.0; n];
        self.apply_free(free, local, x, &mut ax);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let mut rel = norm(&r) / scale;
        if rel <= self.opts.rel_tol {
            return Ok((rel, 0));
        }
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
        let mut p = z.clone();
        let mut rz = dotp(&r, &z);
        let mut ap = vec![0.0; n];
        for it in 1..=max_iters {
            self.apply_free(free, local, &p, &mut ap);
            let pap = dotp(&p, &ap);
            if !(pap > 0.0) {
                return Err(HarmonicError::Singular(free[0]));
            }
            let alpha = rz / pap;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            rel = norm(&r) / scale;
            if rel <= self.opts.rel_tol {
                // report the true residual, not the recurrence
                self.apply_free(free, local, x, &mut ax);
                let true_rel = b.iter().zip(&ax).map(|(b, a)| (b - a) * (b - a)).sum::<f64>().sqrt() / scale;
                if true_rel <= 10.0 * self.opts.rel_tol {
                    return Ok((true_rel, it));
                }
                r = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            }
            for k in 0..n {
                z[k] = r[k] * inv_diag[k];
            }
            let rz_new = dotp(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        Err(HarmonicError::NotConverged { residual: rel, iterations: max_iters })
    }
}

/// Discrete harmonic extension of `boundary_values` (one per
/// `boundary_loop` vertex) with the default tolerance.
pub fn solve_dirichlet(mesh: Arc<TriangleMesh>, boundary_values: &[Point2]) -> Result<(MeshMap, SolveReport), HarmonicError> {
    HarmonicSolver::new(mesh).dirichlet(boundary_values)
}

pub fn harmonic_replacement(m: &MeshMap, sub: &Submesh) -> Result<(MeshMap, SolveReport), HarmonicError> {
    HarmonicSolver::new(m.mesh_arc().clone()).replace(m, sub)
}
