//! Incremental Delaunay triangulation (Bowyer-Watson) with conforming
//! refinement: encroached constraint subsegments are split at their midpoints
//! and poor triangles receive their circumcentres.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{cross, dot, segment_distance, winding_number};
use crate::Point2;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [usize; 3],
    /// `n[i]` is the neighbour across the edge opposite `v[i]`.
    n: [usize; 3],
    alive: bool,
}

fn coord(p: Point2) -> robust::Coord<f64> {
    robust::Coord { x: p.re, y: p.im }
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    robust::orient2d(coord(a), coord(b), coord(c))
}

fn in_circle(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    robust::incircle(coord(a), coord(b), coord(c), coord(d))
}

pub(crate) fn circumcenter(a: Point2, b: Point2, c: Point2) -> Point2 {
    let (ba, ca) = (b - a, c - a);
    let d = 2.0 * cross(ba, ca);
    let (b2, c2) = (ba.norm_sqr(), ca.norm_sqr());
    a + Point2::new(ca.im * b2 - ba.im * c2, ba.re * c2 - ca.re * b2) / d
}

/// Smallest interior angle of a triangle, in radians.
pub(crate) fn min_angle(a: Point2, b: Point2, c: Point2) -> f64 {
    let ang = |p: Point2, q: Point2, r: Point2| {
        let (u, v) = (q - p, r - p);
        libm::atan2(cross(u, v).abs(), dot(u, v))
    };
    ang(a, b, c).min(ang(b, c, a)).min(ang(c, a, b))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RefineError {
    #[error("refinement exceeded {0} vertices without meeting quality targets")]
    VertexBudget(usize),
}

pub(crate) struct Refined {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
}

pub(crate) struct Refiner<'a> {
    pts: Vec<Point2>,
    tris: Vec<Tri>,
    vert_tri: Vec<usize>,
    hint: usize,
    /// Constraint subsegments; dead ones are `None`.
    segs: Vec<Option<(usize, usize)>>,
    outline: &'a [Point2],
    max_edge: f64,
    min_angle: f64,
    dup_eps: f64,
}

impl<'a> Refiner<'a> {
    /// `outline` is the counterclockwise domain polygon used for inside tests.
    pub fn new(outline: &'a [Point2], max_edge: f64, min_angle_deg: f64) -> Self {
        let (mut lo, mut hi) = (outline[0], outline[0]);
        for p in outline {
            lo = Point2::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Point2::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        let c = (lo + hi) * 0.5;
        let r = (hi - lo).norm().max(1e-300) * 64.0;
        let pts = vec![
            c + Point2::new(-r, -r),
            c + Point2::new(r, -r),
            c + Point2::new(0.0, r),
        ];
        let tris = vec![Tri { v: [0, 1, 2], n: [NONE; 3], alive: true }];
        Self {
            pts,
            tris,
            vert_tri: vec![0, 0, 0],
            hint: 0,
            segs: Vec::new(),
            outline,
            max_edge,
            min_angle: min_angle_deg.to_radians(),
            dup_eps: 1e-12 * (hi - lo).norm(),
        }
    }

    fn locate(&mut self, p: Point2) -> usize {
        let mut t = self.hint;
        if !self.tris[t].alive {
            t = self.tris.iter().rposition(|t| t.alive).unwrap_or(0);
        }
        let mut rot = 0usize;
        let mut steps = 0usize;
        'walk: loop {
            steps += 1;
            if steps > 4 * self.tris.len() + 16 {
                // Fall back to a scan; only reachable through pathological input.
                return self.scan_locate(p);
            }
            let tri = self.tris[t];
            rot = (rot + 1) % 3;
            for k in 0..3 {
                let i = (k + rot) % 3;
                let a = self.pts[tri.v[(i + 1) % 3]];
                let b = self.pts[tri.v[(i + 2) % 3]];
                if orient(a, b, p) < 0.0 && tri.n[i] != NONE {
                    t = tri.n[i];
                    continue 'walk;
                }
            }
            return t;
        }
    }

    fn scan_locate(&self, p: Point2) -> usize {
        self.tris
            .iter()
            .position(|t| {
                t.alive
                    && (0..3).all(|i| {
                        orient(self.pts[t.v[(i + 1) % 3]], self.pts[t.v[(i + 2) % 3]], p) >= 0.0
                    })
            })
            .unwrap_or(0)
    }

    fn tri_pts(&self, t: usize) -> [Point2; 3] {
        let v = self.tris[t].v;
        [self.pts[v[0]], self.pts[v[1]], self.pts[v[2]]]
    }

    /// Inserts `p`, returning its vertex index, or the index of an existing
    /// vertex closer than the duplicate tolerance.
    pub fn insert(&mut self, p: Point2, new_tris: &mut Vec<usize>) -> usize {
        let start = self.locate(p);
        for &v in &self.tris[start].v {
            if (self.pts[v] - p).norm() <= self.dup_eps {
                return v;
            }
        }
        let pid = self.pts.len();
        self.pts.push(p);
        self.vert_tri.push(NONE);

        // Cavity of triangles whose circumcircle contains p.
        let mut cavity = vec![start];
        let mut in_cavity = BTreeSet::new();
        in_cavity.insert(start);
        let mut k = 0;
        while k < cavity.len() {
            let t = cavity[k];
            k += 1;
            for &nb in &self.tris[t].n {
                if nb == NONE || in_cavity.contains(&nb) {
                    continue;
                }
                let [a, b, c] = self.tri_pts(nb);
                if in_circle(a, b, c, p) > 0.0 {
                    in_cavity.insert(nb);
                    cavity.push(nb);
                }
            }
        }

        // Boundary edges of the cavity, oriented counterclockwise.
        let mut rim: Vec<(usize, usize, usize)> = Vec::new();
        for &t in &cavity {
            let tri = self.tris[t];
            for i in 0..3 {
                let nb = tri.n[i];
                if nb == NONE || !in_cavity.contains(&nb) {
                    rim.push((tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb));
                }
            }
        }
        for &t in &cavity {
            self.tris[t].alive = false;
        }

        let first = self.tris.len();
        for (j, &(a, b, outer)) in rim.iter().enumerate() {
            let id = first + j;
            self.tris.push(Tri { v: [pid, a, b], n: [outer, NONE, NONE], alive: true });
            if outer != NONE {
                let o = &mut self.tris[outer];
                for m in 0..3 {
                    let (x, y) = (o.v[(m + 1) % 3], o.v[(m + 2) % 3]);
                    if x == b && y == a {
                        o.n[m] = id;
                    }
                }
            }
            self.vert_tri[a] = id;
            self.vert_tri[b] = id;
            new_tris.push(id);
        }
        self.vert_tri[pid] = first;
        // Link the fan: edge (pid, a) is opposite b, edge (b, pid) is opposite a.
        let mut by_start = BTreeSet::new();
        for (j, &(a, _, _)) in rim.iter().enumerate() {
            by_start.insert((a, first + j));
        }
        for (j, &(_, b, _)) in rim.iter().enumerate() {
            let id = first + j;
            if let Some(&(_, other)) = by_start.range((b, 0)..=(b, usize::MAX)).next() {
                self.tris[id].n[1] = other;
                self.tris[other].n[2] = id;
            }
        }
        self.hint = first;
        pid
    }

    /// Vertices adjacent to `a`.
    fn ring(&self, a: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let start = self.vert_tri[a];
        if start == NONE {
            return out;
        }
        let mut t = start;
        loop {
            let tri = self.tris[t];
            let i = tri.v.iter().position(|&v| v == a).expect("vertex-triangle link");
            out.push(tri.v[(i + 1) % 3]);
            let next = tri.n[(i + 2) % 3];
            if next == NONE || next == start {
                break;
            }
            t = next;
            if out.len() > self.tris.len() {
                break;
            }
        }
        out
    }

    fn has_edge(&self, a: usize, b: usize) -> bool {
        self.ring(a).contains(&b)
    }

    pub fn add_segment(&mut self, a: usize, b: usize) {
        if a != b {
            self.segs.push(Some((a, b)));
        }
    }

    fn encroaches(&self, s: (usize, usize), p: Point2) -> bool {
        let (a, b) = (self.pts[s.0], self.pts[s.1]);
        let scale = (b - a).norm_sqr();
        dot(a - p, b - p) < -1e-12 * scale
    }

    fn segment_encroached(&self, s: (usize, usize)) -> bool {
        if !self.has_edge(s.0, s.1) {
            return true;
        }
        // Any encroaching vertex of a Delaunay triangulation is adjacent to the edge.
        let ra = self.ring(s.0);
        ra.iter().any(|&v| v != s.1 && v >= 3 && self.encroaches(s, self.pts[v]))
    }

    fn split_segment(&mut self, k: usize, new_tris: &mut Vec<usize>) -> usize {
        let (a, b) = self.segs[k].expect("live segment");
        let m = (self.pts[a] + self.pts[b]) * 0.5;
        let mid = self.insert(m, new_tris);
        self.segs[k] = Some((a, mid));
        self.segs.push(Some((mid, b)));
        mid
    }

    fn inside_domain(&self, p: Point2) -> bool {
        winding_number(self.outline, p) != 0
    }

    fn is_bad(&self, t: usize) -> bool {
        let tri = self.tris[t];
        if !tri.alive || tri.v.iter().any(|&v| v < 3) {
            return false;
        }
        let [a, b, c] = self.tri_pts(t);
        let longest = (b - a).norm().max((c - b).norm()).max((a - c).norm());
        if longest <= self.max_edge * (1.0 + 1e-9) && min_angle(a, b, c) >= self.min_angle {
            return false;
        }
        self.inside_domain((a + b + c) / 3.0)
    }

    fn encroached_by(&self, p: Point2) -> Vec<usize> {
        (0..self.segs.len()).filter(|&k| self.segs[k].is_some_and(|s| self.encroaches(s, p))).collect()
    }

    fn settle_segments(&mut self, mut queue: Vec<usize>, new_tris: &mut Vec<usize>, budget: usize) -> Result<(), RefineError> {
        while let Some(k) = queue.pop() {
            let Some(s) = self.segs[k] else { continue };
            if !self.segment_encroached(s) {
                continue;
            }
            if self.pts.len() > budget {
                return Err(RefineError::VertexBudget(budget));
            }
            let before = self.segs.len();
            let mid = self.split_segment(k, new_tris);
            queue.push(k);
            queue.push(before);
            let p = self.pts[mid];
            queue.extend(self.encroached_by(p));
        }
        Ok(())
    }

    /// Runs the refinement to completion.
    pub fn refine(&mut self, budget: usize) -> Result<(), RefineError> {
        let mut new_tris = Vec::new();
        self.settle_segments((0..self.segs.len()).collect(), &mut new_tris, budget)?;
        let mut work: Vec<usize> = (0..self.tris.len()).filter(|&t| self.tris[t].alive).collect();
        work.append(&mut new_tris);
        let mut skipped = BTreeSet::new();
        while let Some(t) = work.pop() {
            if skipped.contains(&t) || !self.is_bad(t) {
                continue;
            }
            if self.pts.len() > budget {
                return Err(RefineError::VertexBudget(budget));
            }
            let [a, b, c] = self.tri_pts(t);
            let cc = circumcenter(a, b, c);
            let hit = self.encroached_by(cc);
            if !hit.is_empty() {
                let mut queue = Vec::new();
                for k in hit {
                    let before = self.segs.len();
                    let mid = self.split_segment(k, &mut new_tris);
                    queue.push(k);
                    queue.push(before);
                    queue.extend(self.encroached_by(self.pts[mid]));
                }
                self.settle_segments(queue, &mut new_tris, budget)?;
                work.push(t);
            } else if self.inside_domain(cc) {
                let before = self.pts.len();
                let v = self.insert(cc, &mut new_tris);
                if v < before {
                    skipped.insert(t);
                }
            } else {
                skipped.insert(t);
            }
            work.append(&mut new_tris);
        }
        Ok(())
    }

    /// Drops the bounding triangle and everything outside the outline; compacts indices.
    pub fn finish(self) -> Refined {
        let mut keep = vec![false; self.pts.len()];
        let mut tris = Vec::new();
        for t in &self.tris {
            if !t.alive || t.v.iter().any(|&v| v < 3) {
                continue;
            }
            let [a, b, c] = [self.pts[t.v[0]], self.pts[t.v[1]], self.pts[t.v[2]]];
            if !self.inside_domain((a + b + c) / 3.0) {
                continue;
            }
            for &v in &t.v {
                keep[v] = true;
            }
            tris.push(t.v);
        }
        let mut remap = vec![NONE; self.pts.len()];
        let mut vertices = Vec::new();
        for (i, &k) in keep.iter().enumerate() {
            if k {
                remap[i] = vertices.len();
                vertices.push(self.pts[i]);
            }
        }
        let triangles = tris.iter().map(|v| [remap[v[0]], remap[v[1]], remap[v[2]]]).collect();
        Refined { vertices, triangles }
    }
}

/// Points of a triangular lattice with spacing `s` anchored at the origin,
/// restricted to the polygon and kept `clearance` away from `segments`.
pub(crate) fn lattice_points(outline: &[Point2], segments: &[(Point2, Point2)], s: f64, clearance: f64) -> Vec<Point2> {
    let (mut lo, mut hi) = (outline[0], outline[0]);
    for p in outline {
        lo = Point2::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = Point2::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    let dy = s * 3.0f64.sqrt() * 0.5;
    let j0 = (lo.im / dy).floor() as i64 - 1;
    let j1 = (hi.im / dy).ceil() as i64 + 1;
    let mut out = Vec::new();
    for j in j0..=j1 {
        let y = j as f64 * dy;
        let off = if j.rem_euclid(2) == 1 { 0.5 * s } else { 0.0 };
        let i0 = ((lo.re - off) / s).floor() as i64 - 1;
        let i1 = ((hi.re - off) / s).ceil() as i64 + 1;
        for i in i0..=i1 {
            let p = Point2::new(i as f64 * s + off, y);
            if winding_number(outline, p) == 0 {
                continue;
            }
            if segments.iter().all(|&(a, b)| segment_distance(p, a, b) > clearance) {
                out.push(p);
            }
        }
    }
    out
}
