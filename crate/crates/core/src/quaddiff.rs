//! Holomorphic quadratic differentials `phi dz^2`: critical points,
//! vertical and horizontal trajectories, and phi-metric lengths.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Containment, JordanDomain};
use crate::hopf::{holomorphy_residual, solve3, HopfField};
use crate::Point2;

pub const MAX_DEGREE: usize = 16;
/// Critical tolerance relative to the domain diameter.
pub const CRIT_TOL_FACTOR: f64 = 1e-8;
/// Smallest trace step, as a fraction of the nominal step.
pub const MIN_STEP_DIVISOR: f64 = 64.0;
pub const ANGLE_TOL: f64 = 1e-3;
/// Neighbours used by the sampled-form evaluator.
pub const SAMPLED_NEIGHBOURS: usize = 12;
const BISECT_ITERS: usize = 60;
const NEWTON_POLISH: usize = 4;
const MAX_REJECTIONS: usize = 100_000;
const SEGMENT_PROBES: usize = 32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("polynomial degree {0} exceeds {MAX_DEGREE}")]
    Degree(usize),
    #[error("the differential vanishes identically")]
    Zero,
    #[error("critical points are not available for sampled differentials")]
    Unsupported,
    #[error("coefficient {0} is not finite")]
    NonFinite(usize),
    #[error("{0} is a critical point")]
    Critical(Point2),
    #[error("{0} is not inside the domain")]
    Outside(Point2),
    #[error("step must be positive and finite")]
    BadStep,
    #[error("companion eigenvalue iteration did not converge")]
    Eigen,
    #[error("sampled field is empty")]
    EmptySample,
    #[error("no competitor inside the domain after {0} draws")]
    Rejection(usize),
    #[error("trajectory endpoint {0} is outside the closed domain")]
    OpenEnd(Point2),
    #[error("index range {0}..={1} is not inside the trajectory")]
    BadRange(usize, usize),
}

/// A Hopf field read back as a function by weighted local linear fits.
#[derive(Debug, Clone)]
pub struct SampledPhi {
    centroid: Vec<Point2>,
    phi: Vec<Point2>,
    fit_residual: f64,
}

impl SampledPhi {
    pub fn new(field: &HopfField) -> Result<Self, QuadError> {
        if field.is_empty() {
            return Err(QuadError::EmptySample);
        }
        Ok(Self { centroid: field.centroid.clone(), phi: field.phi.clone(), fit_residual: holomorphy_residual(field).global })
    }

    /// Global holomorphy residual of the underlying field.
    pub fn fit_residual(&self) -> f64 {
        self.fit_residual
    }

    /// Fits `a + b d + c conj(d)` to the nearest centroids with inverse
    /// square distance weights and returns `a`.
    pub fn eval(&self, z: Point2) -> Point2 {
        let k = SAMPLED_NEIGHBOURS.min(self.phi.len());
        let mut near: Vec<(f64, usize)> = self.centroid.iter().enumerate().map(|(i, c)| ((c - z).norm_sqr(), i)).collect();
        near.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
        near.truncate(k);
        if k < 3 {
            return self.phi[near[0].1];
        }
        let scale = near.iter().map(|p| p.0).fold(0.0, f64::max).sqrt().max(f64::MIN_POSITIVE);
        let zero = Point2::new(0.0, 0.0);
        let mut normal = [[zero; 3]; 3];
        let mut rhs = [zero; 3];
        for &(d2, i) in &near {
            let d = (self.centroid[i] - z) / scale;
            let w = 1.0 / (d2 / (scale * scale) + 1e-6);
            let row = [Point2::new(1.0, 0.0), d, d.conj()];
            for a in 0..3 {
                for b in 0..3 {
                    normal[a][b] += row[a].conj() * row[b] * w;
                }
                rhs[a] += row[a].conj() * self.phi[i] * w;
            }
        }
        match solve3(normal, rhs) {
            Some(x) => x[0],
            None => self.phi[near.iter().min_by(|a, b| a.0.total_cmp(&b.0)).map_or(0, |p| p.1)],
        }
    }
}

#[derive(Debug, Clone)]
pub enum QuadForm {
    /// Coefficients `c_0, ..., c_d` of `sum c_k z^k`.
    Polynomial(Vec<Point2>),
    Constant(Point2),
    Sampled(SampledPhi),
}

#[derive(Debug, Clone)]
pub struct QuadDifferential {
    form: QuadForm,
    domain: JordanDomain,
}

impl QuadDifferential {
    pub fn polynomial(coeffs: Vec<Point2>, domain: JordanDomain) -> Result<Self, QuadError> {
        if let Some(i) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(QuadError::NonFinite(i));
        }
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| *c == Point2::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Point2::new(0.0, 0.0));
        }
        if coeffs.len() - 1 > MAX_DEGREE {
            return Err(QuadError::Degree(coeffs.len() - 1));
        }
        Ok(Self { form: QuadForm::Polynomial(coeffs), domain })
    }

    pub fn constant(c: Point2, domain: JordanDomain) -> Result<Self, QuadError> {
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(QuadError::NonFinite(0));
        }
        Ok(Self { form: QuadForm::Constant(c), domain })
    }

    pub fn sampled(field: &HopfField, domain: JordanDomain) -> Result<Self, QuadError> {
        Ok(Self { form: QuadForm::Sampled(SampledPhi::new(field)?), domain })
    }

    pub fn form(&self) -> &QuadForm {
        &self.form
    }

    pub fn domain(&self) -> &JordanDomain {
        &self.domain
    }

    pub fn crit_tol(&self) -> f64 {
        CRIT_TOL_FACTOR * self.domain.diameter()
    }

    pub fn eval(&self, z: Point2) -> Point2 {
        match &self.form {
            QuadForm::Polynomial(c) => horner(c, z),
            QuadForm::Constant(c) => *c,
            QuadForm::Sampled(s) => s.eval(z),
        }
    }
}

fn horner(c: &[Point2], z: Point2) -> Point2 {
    c.iter().rev().fold(Point2::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Shifts tried in turn (times the domain diameter) when the QR iteration
/// stalls, as it does on cyclic companion matrices.
const COMPANION_SHIFTS: [(f64, f64); 4] = [(0.0, 0.0), (0.0123, 0.0371), (-0.0517, 0.0213), (0.0311, -0.0629)];
const SCHUR_MAX_ITERS: usize = 10_000;

/// Coefficients of `p(w + s)` in `w`.
fn taylor_shift(c: &[Point2], s: Point2) -> Vec<Point2> {
    let mut out = c.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let hi = out[j + 1];
            out[j] += s * hi;
        }
    }
    out
}

fn companion_eigenvalues(c: &[Point2]) -> Option<Vec<Point2>> {
    let d = c.len() - 1;
    let lead = c[d];
    let mut companion = DMatrix::<Point2>::zeros(d, d);
    for i in 1..d {
        companion[(i, i - 1)] = Point2::new(1.0, 0.0);
    }
    for i in 0..d {
        companion[(i, d - 1)] = -c[i] / lead;
    }
    let (_, t) = nalgebra::Schur::try_new(companion, f64::EPSILON, SCHUR_MAX_ITERS)?.unpack();
    Some((0..d).map(|i| t[(i, i)]).collect())
}

fn derivative(c: &[Point2]) -> Vec<Point2> {
    c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect()
}

/// Zeros of `phi` in the closed domain, sorted by real then imaginary part.
pub fn critical_points(q: &QuadDifferential) -> Result<Vec<Point2>, QuadError> {
    let coeffs = match &q.form {
        QuadForm::Sampled(_) => return Err(QuadError::Unsupported),
        QuadForm::Constant(c) if *c == Point2::new(0.0, 0.0) => return Err(QuadError::Zero),
        QuadForm::Constant(_) => return Ok(Vec::new()),
        QuadForm::Polynomial(c) => c,
    };
    let d = coeffs.len() - 1;
    if d == 0 {
        return if coeffs[0] == Point2::new(0.0, 0.0) { Err(QuadError::Zero) } else { Ok(Vec::new()) };
    }
    let scale = q.domain.diameter().max(f64::MIN_POSITIVE);
    let eig = COMPANION_SHIFTS
        .iter()
        .find_map(|&(re, im)| {
            let s = Point2::new(re, im) * scale;
            companion_eigenvalues(&taylor_shift(coeffs, s)).map(|e| e.into_iter().map(|w| w + s).collect::<Vec<_>>())
        })
        .ok_or(QuadError::Eigen)?;
    let dc = derivative(coeffs);
    let tol = 1e-9 * scale;
    let mut roots: Vec<Point2> = eig
        .into_iter()
        .map(|mut z| {
            for _ in 0..NEWTON_POLISH {
                let dp = horner(&dc, z);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = horner(coeffs, z) / dp;
                if !(step.re.is_finite() && step.im.is_finite()) {
                    break;
                }
                z -= step;
            }
            z
        })
        .filter(|&z| q.domain.contains_closed(z, tol))
        .collect();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    Vertical,
    Horizontal,
}

impl TrajectoryKind {
    /// `-1` for vertical (`tau^2 phi < 0`), `+1` for horizontal.
    fn sign(self) -> f64 {
        match self {
            Self::Vertical => -1.0,
            Self::Horizontal => 1.0,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Self::Vertical => Self::Horizontal,
            Self::Horizontal => Self::Vertical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    HitBoundary,
    HitCritical,
    StepLimit,
}

/// Unit `tau` with `tau^2 phi(z)` real of the sign fixed by `kind`, the
/// sign of `tau` chosen against `prev` or canonically when `prev` is `None`.
pub fn direction(q: &QuadDifferential, kind: TrajectoryKind, z: Point2, prev: Option<Point2>) -> Result<Point2, QuadError> {
    direction_of(q.eval(z), q.crit_tol(), kind, z, prev)
}

fn direction_of(phi: Point2, crit_tol: f64, kind: TrajectoryKind, z: Point2, prev: Option<Point2>) -> Result<Point2, QuadError> {
    let r = phi.norm();
    if !(r > crit_tol) {
        return Err(QuadError::Critical(z));
    }
    // tau^2 = sign * conj(phi) / |phi|
    let mut tau = (phi.conj() * (kind.sign() / r)).sqrt();
    tau /= tau.norm();
    let flip = match prev {
        Some(p) => tau.re * p.re + tau.im * p.im < 0.0,
        None => tau.im < 0.0 || (tau.im == 0.0 && tau.re < 0.0),
    };
    Ok(if flip { -tau } else { tau })
}

pub fn vertical_direction(q: &QuadDifferential, z: Point2, prev: Option<Point2>) -> Result<Point2, QuadError> {
    direction(q, TrajectoryKind::Vertical, z, prev)
}

pub fn horizontal_direction(q: &QuadDifferential, z: Point2, prev: Option<Point2>) -> Result<Point2, QuadError> {
    direction(q, TrajectoryKind::Horizontal, z, prev)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub step: f64,
    pub max_steps: usize,
    pub angle_tol: f64,
    /// Defaults to [`QuadDifferential::crit_tol`].
    pub crit_tol: Option<f64>,
    /// Start along `-tau` instead of the canonical `tau`.
    pub reversed: bool,
}

impl TraceOptions {
    pub fn new(step: f64, max_steps: usize) -> Self {
        Self { step, max_steps, angle_tol: ANGLE_TOL, crit_tol: None, reversed: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<Point2>,
    pub kind: TrajectoryKind,
    /// How the first and the last point were reached.
    pub ends: [Termination; 2],
    pub phi_length: f64,
    /// Largest `|Im(tau^2 phi)| / |phi|` over accepted steps.
    pub worst_angle: f64,
}

impl Trajectory {
    /// A polyline that was not traced, e.g. a competitor curve.
    pub fn from_points(q: &QuadDifferential, kind: TrajectoryKind, points: Vec<Point2>) -> Self {
        let phi_length = midpoint_length(q, &points);
        Self { points, kind, ends: [Termination::StepLimit; 2], phi_length, worst_angle: f64::NAN }
    }

    /// Summary termination: critical beats step limit beats boundary.
    pub fn termination(&self) -> Termination {
        if self.ends.contains(&Termination::HitCritical) {
            Termination::HitCritical
        } else if self.ends.contains(&Termination::StepLimit) {
            Termination::StepLimit
        } else {
            Termination::HitBoundary
        }
    }

    pub fn endpoints(&self) -> (Point2, Point2) {
        (self.points[0], self.points[self.points.len() - 1])
    }

    /// Points `from..=to`, lengths recomputed.
    pub fn sub_arc(&self, q: &QuadDifferential, from: usize, to: usize) -> Result<Self, QuadError> {
        if from > to || to >= self.points.len() {
            return Err(QuadError::BadRange(from, to));
        }
        let points = self.points[from..=to].to_vec();
        let phi_length = midpoint_length(q, &points);
        Ok(Self { points, kind: self.kind, ends: [Termination::StepLimit; 2], phi_length, worst_angle: self.worst_angle })
    }

    /// Longest contiguous run of points satisfying `keep`.
    pub fn restrict(&self, q: &QuadDifferential, keep: impl Fn(Point2) -> bool) -> Option<Self> {
        let mut best: Option<(usize, usize)> = None;
        let mut start = None;
        for (i, &p) in self.points.iter().enumerate() {
            if keep(p) {
                let s = *start.get_or_insert(i);
                if best.is_none_or(|(a, b)| i - s > b - a) {
                    best = Some((s, i));
                }
            } else {
                start = None;
            }
        }
        best.and_then(|(a, b)| self.sub_arc(q, a, b).ok())
    }
}

fn midpoint_length(q: &QuadDifferential, pts: &[Point2]) -> f64 {
    pts.windows(2).map(|w| q.eval(0.5 * (w[0] + w[1])).norm().sqrt() * (w[1] - w[0]).norm()).sum()
}

pub fn trace_vertical(q: &QuadDifferential, z0: Point2, step: f64, max_steps: usize) -> Result<Trajectory, QuadError> {
    trace(q, TrajectoryKind::Vertical, z0, &TraceOptions::new(step, max_steps))
}

pub fn trace_horizontal(q: &QuadDifferential, z0: Point2, step: f64, max_steps: usize) -> Result<Trajectory, QuadError> {
    trace(q, TrajectoryKind::Horizontal, z0, &TraceOptions::new(step, max_steps))
}

/// RK4 in both directions from `z0`; the result runs from the backward end
/// through `z0` to the forward end. `max_steps` applies to each direction.
pub fn trace(q: &QuadDifferential, kind: TrajectoryKind, z0: Point2, opts: &TraceOptions) -> Result<Trajectory, QuadError> {
    if !(opts.step > 0.0 && opts.step.is_finite()) {
        return Err(QuadError::BadStep);
    }
    if q.domain.contains(z0, 0.0) != Containment::Inside {
        return Err(QuadError::Outside(z0));
    }
    let crit = opts.crit_tol.unwrap_or_else(|| q.crit_tol());
    let mut tau0 = direction_of(q.eval(z0), crit, kind, z0, None)?;
    if opts.reversed {
        tau0 = -tau0;
    }
    let fwd = march(q, kind, z0, tau0, crit, opts);
    let bwd = march(q, kind, z0, -tau0, crit, opts);
    let mut points: Vec<Point2> = bwd.points.iter().rev().copied().collect();
    points.push(z0);
    points.extend_from_slice(&fwd.points);
    Ok(Trajectory {
        points,
        kind,
        ends: [bwd.end, fwd.end],
        phi_length: fwd.length + bwd.length,
        worst_angle: fwd.worst_angle.max(bwd.worst_angle),
    })
}

struct HalfTrace {
    points: Vec<Point2>,
    end: Termination,
    length: f64,
    worst_angle: f64,
}

fn march(q: &QuadDifferential, kind: TrajectoryKind, z0: Point2, tau0: Point2, crit: f64, opts: &TraceOptions) -> HalfTrace {
    let min_step = opts.step / MIN_STEP_DIVISOR;
    let mut out = HalfTrace { points: Vec::new(), end: Termination::StepLimit, length: 0.0, worst_angle: 0.0 };
    let mut z = z0;
    let mut prev = tau0;
    let mut h = opts.step;
    for _ in 0..opts.max_steps {
        let near = q.eval(z).norm() < 10.0 * crit;
        if near {
            h *= 0.5;
        } else {
            h = opts.step;
        }
        let accepted = loop {
            if h < min_step {
                break None;
            }
            if let Some(s) = rk4_step(q, kind, z, prev, h, crit, opts.angle_tol) {
                break Some(s);
            }
            h *= 0.5;
        };
        let Some((z1, tau, angle)) = accepted else {
            out.end = Termination::HitCritical;
            return out;
        };
        if q.domain.contains(z1, 0.0) != Containment::Inside {
            let zb = boundary_crossing(&q.domain, z, z1);
            out.length += q.eval(0.5 * (z + zb)).norm().sqrt() * (zb - z).norm();
            out.points.push(zb);
            out.worst_angle = out.worst_angle.max(angle);
            out.end = Termination::HitBoundary;
            return out;
        }
        out.length += q.eval(0.5 * (z + z1)).norm().sqrt() * (z1 - z).norm();
        out.worst_angle = out.worst_angle.max(angle);
        out.points.push(z1);
        z = z1;
        prev = tau;
    }
    out
}

/// One RK4 step; `None` if a stage meets a critical point or the chord
/// violates the sign condition at its midpoint.
fn rk4_step(q: &QuadDifferential, kind: TrajectoryKind, z: Point2, prev: Point2, h: f64, crit: f64, angle_tol: f64) -> Option<(Point2, Point2, f64)> {
    let dir = |p: Point2, pr: Point2| direction_of(q.eval(p), crit, kind, p, Some(pr)).ok();
    let k1 = dir(z, prev)?;
    let k2 = dir(z + k1 * (0.5 * h), k1)?;
    let k3 = dir(z + k2 * (0.5 * h), k1)?;
    let k4 = dir(z + k3 * h, k1)?;
    let z1 = z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    let chord = z1 - z;
    let len = chord.norm();
    if !(len > 0.0) {
        return None;
    }
    let t = chord / len;
    let phi = q.eval(0.5 * (z + z1));
    let w = t * t * phi;
    let angle = w.im.abs() / phi.norm();
    if !(w.re * kind.sign() > 0.0 && angle <= angle_tol) {
        return None;
    }
    Some((z1, k4, angle))
}

/// Boundary point on the segment from the inside point `a` to `b`.
fn boundary_crossing(d: &JordanDomain, a: Point2, b: Point2) -> Point2 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if d.contains(a + (b - a) * mid, 0.0) == Containment::Inside {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    a + (b - a) * hi
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalLength {
    pub traj_length: f64,
    pub min_competitor: f64,
    pub competitors: usize,
    pub pass: bool,
}

/// Compares the phi-length of `t` with random polylines joining its
/// endpoints through one to three waypoints. Competitor 0 is the straight
/// chord when it lies in the domain. Both sides are integrated by the
/// midpoint rule on a common spacing of one eighth of the longest step.
pub fn minimal_length_check(q: &QuadDifferential, t: &Trajectory, competitors: usize, seed: u64) -> Result<MinimalLength, QuadError> {
    let (a, b) = t.endpoints();
    let diam = q.domain.diameter();
    let tol = 1e-9 * diam;
    for p in [a, b] {
        if !q.domain.contains_closed(p, tol) {
            return Err(QuadError::OpenEnd(p));
        }
    }
    let longest = t.points.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max);
    if !(longest > 0.0) {
        return Ok(MinimalLength { traj_length: 0.0, min_competitor: 0.0, competitors: 0, pass: true });
    }
    let ds = longest / 8.0;
    let traj_length = fine_length(q, &t.points, ds);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bb = bbox(q.domain.boundary());
    let mut best = f64::INFINITY;
    let chord = [a, 0.5 * (a + b), b];
    let mut drawn = 0;
    if competitors > 0 && polyline_inside(&q.domain, &chord, tol) {
        best = fine_length(q, &chord, ds);
        drawn = 1;
    }
    let mut rejections = 0;
    while drawn < competitors {
        let n = rng.gen_range(1..=3);
        let mut poly = Vec::with_capacity(n + 2);
        poly.push(a);
        for _ in 0..n {
            poly.push(Point2::new(rng.gen_range(bb.0.re..=bb.1.re), rng.gen_range(bb.0.im..=bb.1.im)));
        }
        poly.push(b);
        let interior = poly[1..=n].iter().all(|&p| q.domain.contains(p, 0.0) == Containment::Inside);
        if !(interior && polyline_inside(&q.domain, &poly, tol)) {
            rejections += 1;
            if rejections > MAX_REJECTIONS {
                return Err(QuadError::Rejection(rejections));
            }
            continue;
        }
        best = best.min(fine_length(q, &poly, ds));
        drawn += 1;
    }
    let pass = traj_length <= best + 1e-6 * (1.0 + traj_length);
    Ok(MinimalLength { traj_length, min_competitor: best, competitors: drawn, pass })
}

fn bbox(pts: &[Point2]) -> (Point2, Point2) {
    pts.iter().fold((pts[0], pts[0]), |(lo, hi), p| {
        (Point2::new(lo.re.min(p.re), lo.im.min(p.im)), Point2::new(hi.re.max(p.re), hi.im.max(p.im)))
    })
}

fn polyline_inside(d: &JordanDomain, poly: &[Point2], tol: f64) -> bool {
    poly.windows(2).all(|w| (0..=SEGMENT_PROBES).all(|k| d.contains_closed(w[0] + (w[1] - w[0]) * (k as f64 / SEGMENT_PROBES as f64), tol)))
}

fn fine_length(q: &QuadDifferential, poly: &[Point2], ds: f64) -> f64 {
    let mut total = 0.0;
    for w in poly.windows(2) {
        let d = w[1] - w[0];
        let n = ((d.norm() / ds).ceil() as usize).max(1);
        let piece = d.norm() / n as f64;
        for k in 0..n {
            let m = w[0] + d * ((k as f64 + 0.5) / n as f64);
            total += q.eval(m).norm().sqrt() * piece;
        }
    }
    total
}

/// Largest pairwise distance of `map` over the trajectory points, which
/// must lie in the closed `domain`.
pub fn constancy_on_trajectory(map: impl Fn(Point2) -> Point2, domain: &JordanDomain, t: &Trajectory) -> Result<f64, QuadError> {
    let tol = 1e-9 * domain.diameter();
    if let Some(&p) = t.points.iter().find(|&&p| !domain.contains_closed(p, tol)) {
        return Err(QuadError::Outside(p));
    }
    let vals: Vec<Point2> = t.points.iter().map(|&p| map(p)).collect();
    let mut osc: f64 = 0.0;
    for (i, a) in vals.iter().enumerate() {
        for b in &vals[i + 1..] {
            osc = osc.max((a - b).norm());
        }
    }
    Ok(osc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{butterfly, unit_disk, ClosedFormMap};
    use crate::geometry::regular_polygon;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Point2 {
        Point2::new(re, im)
    }

    fn butterfly_phi() -> QuadDifferential {
        QuadDifferential::polynomial(vec![c(-1.0, 0.0), c(-2.25, 0.0)], unit_disk(256)).unwrap()
    }

    fn strip_phi() -> QuadDifferential {
        QuadDifferential::constant(c(-0.25, 0.0), ClosedFormMap::strip().domain().clone()).unwrap()
    }

    use alloc::vec;

    #[test]
    fn critical_points_examples() {
        let r = critical_points(&butterfly_phi()).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - c(-4.0 / 9.0, 0.0)).norm() < 1e-12);
        assert!(critical_points(&strip_phi()).unwrap().is_empty());
        let q = QuadDifferential::polynomial(vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], regular_polygon(c(0.0, 0.0), 2.0, 64, 0.0).try_into_domain()).unwrap();
        let r = critical_points(&q).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] + 1.0).norm() < 1e-12 && (r[1] - 1.0).norm() < 1e-12);
        let zero = QuadDifferential::constant(c(0.0, 0.0), unit_disk(16)).unwrap();
        assert_eq!(critical_points(&zero), Err(QuadError::Zero));
    }

    trait IntoDomain {
        fn try_into_domain(self) -> JordanDomain;
    }

    impl IntoDomain for Vec<Point2> {
        fn try_into_domain(self) -> JordanDomain {
            JordanDomain::new("poly", self).unwrap()
        }
    }

    #[test]
    fn critical_points_outside_are_dropped_and_degree_is_capped() {
        // roots at 0.5 and 3
        let q = QuadDifferential::polynomial(vec![c(1.5, 0.0), c(-3.5, 0.0), c(1.0, 0.0)], unit_disk(64)).unwrap();
        let r = critical_points(&q).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.5).norm() < 1e-12);
        let big = vec![c(1.0, 0.0); MAX_DEGREE + 2];
        assert_eq!(QuadDifferential::polynomial(big, unit_disk(16)).unwrap_err(), QuadError::Degree(MAX_DEGREE + 1));
    }

    #[test]
    fn critical_points_of_degree_sixteen_roots_of_unity() {
        // z^16 - (0.9)^16
        let mut coeffs = vec![c(0.0, 0.0); 17];
        coeffs[0] = c(-libm::pow(0.9, 16.0), 0.0);
        coeffs[16] = c(1.0, 0.0);
        let q = QuadDifferential::polynomial(coeffs, unit_disk(256)).unwrap();
        let r = critical_points(&q).unwrap();
        assert_eq!(r.len(), 16);
        for z in r {
            assert!((z.norm() - 0.9).abs() < 1e-10);
        }
    }

    #[test]
    fn direction_examples() {
        let q = strip_phi();
        let t = vertical_direction(&q, c(0.1, 0.1), None).unwrap();
        assert_eq!(t, c(1.0, 0.0));
        assert_eq!(vertical_direction(&q, c(0.1, 0.1), Some(c(-1.0, 0.2))).unwrap(), c(-1.0, 0.0));
        let plus = QuadDifferential::constant(c(1.0, 0.0), unit_disk(32)).unwrap();
        assert!((vertical_direction(&plus, c(0.0, 0.0), None).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        // phi(0.5) = -17/8 is negative real
        let b = butterfly_phi();
        assert_eq!(b.eval(c(0.5, 0.0)), c(-17.0 / 8.0, 0.0));
        assert_eq!(vertical_direction(&b, c(0.5, 0.0), None).unwrap(), c(1.0, 0.0));
        assert!(matches!(vertical_direction(&b, c(-4.0 / 9.0, 0.0), None), Err(QuadError::Critical(_))));
    }

    #[test]
    fn sampled_form_rejects_critical_points_and_reads_field() {
        let map = ClosedFormMap::strip();
        let mesh = alloc::sync::Arc::new(crate::mesh::triangulate_with(map.domain(), &map.mesh_options(0.2)).unwrap());
        let f = crate::hopf::hopf_product(&map.sample_on(mesh).unwrap()).unwrap();
        let q = QuadDifferential::sampled(&f, map.domain().clone()).unwrap();
        assert_eq!(critical_points(&q), Err(QuadError::Unsupported));
        assert!((q.eval(c(0.3, 0.2)) - c(-0.25, 0.0)).norm() < 0.05);
        match q.form() {
            QuadForm::Sampled(s) => assert!(s.fit_residual().is_finite()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn strip_trajectory_is_horizontal_segment() {
        let q = strip_phi();
        let t = trace_vertical(&q, c(0.5, 0.2), 0.01, 10_000).unwrap();
        assert_eq!(t.ends, [Termination::HitBoundary; 2]);
        let dev = t.points.iter().map(|p| (p.im - 0.2).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-8);
        let (a, b) = t.endpoints();
        assert!((a.re + 1.0).abs() < 1e-12 && (b.re - 1.0).abs() < 1e-12);
        // |phi|^(1/2) = 1/2
        assert!((t.phi_length - 0.5 * (b - a).norm()).abs() < 1e-12);
    }

    #[test]
    fn butterfly_trajectory_on_real_axis() {
        let q = butterfly_phi();
        let t = trace_vertical(&q, c(0.5, 0.0), 0.01, 10_000).unwrap();
        let im = t.points.iter().map(|p| p.im.abs()).fold(0.0, f64::max);
        assert!(im < 1e-6);
        assert_eq!(t.ends, [Termination::HitCritical, Termination::HitBoundary]);
        assert!((t.points[0] - c(-4.0 / 9.0, 0.0)).norm() < 0.02);
        assert!(t.points.iter().any(|p| p.re < 0.01) && t.points.iter().any(|p| p.re > 0.99));
    }

    #[test]
    fn sign_condition_holds_on_curved_trajectories() {
        let q = butterfly_phi();
        for kind in [TrajectoryKind::Vertical, TrajectoryKind::Horizontal] {
            for z0 in [c(0.3, 0.4), c(-0.2, -0.5), c(0.1, -0.1)] {
                let t = trace(&q, kind, z0, &TraceOptions::new(0.01, 2000)).unwrap();
                assert!(t.worst_angle <= ANGLE_TOL);
                for w in t.points.windows(2) {
                    let d = w[1] - w[0];
                    let v = d * d * q.eval(0.5 * (w[0] + w[1]));
                    assert!(v.re * kind.sign() > 0.0, "{kind:?} {z0}");
                }
            }
        }
    }

    #[test]
    fn reversed_start_traverses_same_points_backwards() {
        let q = butterfly_phi();
        let z0 = c(0.2, 0.35);
        let fwd = trace_vertical(&q, z0, 0.01, 5000).unwrap();
        let mut opts = TraceOptions::new(0.01, 5000);
        opts.reversed = true;
        let rev = trace(&q, TrajectoryKind::Vertical, z0, &opts).unwrap();
        assert_eq!(fwd.points.len(), rev.points.len());
        for (a, b) in fwd.points.iter().zip(rev.points.iter().rev()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn phi_length_stable_under_step_halving() {
        let q = butterfly_phi();
        let z0 = c(0.2, 0.35);
        let lens: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&h| trace_vertical(&q, z0, h, 10_000).unwrap().phi_length).collect();
        let d1 = (lens[0] - lens[1]).abs();
        let d2 = (lens[1] - lens[2]).abs();
        assert!(d2 < 1e-3 * lens[2], "{lens:?}");
        assert!(d2 < d1, "{lens:?}");
    }

    #[test]
    fn minimal_length_examples() {
        let q = strip_phi();
        let t = trace_vertical(&q, c(0.1, -0.7), 0.02, 10_000).unwrap();
        let r = minimal_length_check(&q, &t, 50, 3).unwrap();
        assert!(r.pass && r.competitors == 50);

        let q = butterfly_phi();
        let t = trace_vertical(&q, c(0.5, 0.0), 0.01, 10_000).unwrap();
        let i = t.points.iter().position(|p| p.re >= 0.1 - 1e-9).unwrap();
        let j = t.points.iter().rposition(|p| p.re <= 0.9 + 1e-9).unwrap();
        let arc = t.sub_arc(&q, i, j).unwrap();
        let r = minimal_length_check(&q, &arc, 100, 7).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn non_vertical_arc_loses_to_chord() {
        let plus = QuadDifferential::constant(c(1.0, 0.0), unit_disk(128)).unwrap();
        // half circle from -0.5i to 0.5i bulging to the right
        let arc: Vec<Point2> = (0..=64).map(|k| 0.5 * Point2::from_polar(1.0, -core::f64::consts::FRAC_PI_2 + core::f64::consts::PI * k as f64 / 64.0)).collect();
        let t = Trajectory::from_points(&plus, TrajectoryKind::Horizontal, arc);
        let r = minimal_length_check(&plus, &t, 20, 1).unwrap();
        assert!(!r.pass);
        assert!((r.min_competitor - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constancy_examples() {
        let q = strip_phi();
        let strip = ClosedFormMap::strip();
        let t = trace_vertical(&q, c(-0.5, 0.7), 0.01, 10_000).unwrap();
        let left = t.restrict(&q, |z| z.re <= 0.0).unwrap();
        assert!(constancy_on_trajectory(|z| strip.eval(z), strip.domain(), &left).unwrap() < 1e-9);

        let q = butterfly_phi();
        let t = trace_vertical(&q, c(0.5, 0.0), 0.01, 10_000).unwrap();
        let arc = t.restrict(&q, |z| (0.05..=0.95).contains(&z.re)).unwrap();
        assert!(constancy_on_trajectory(|z| butterfly(z).value, q.domain(), &arc).unwrap() < 1e-9);

        let (a, b) = arc.endpoints();
        let id = constancy_on_trajectory(|z| z, q.domain(), &arc).unwrap();
        assert!((id - (b - a).norm()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn vertical_and_horizontal_are_orthogonal(re in -0.9f64..0.9, im in -0.4f64..0.4, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let q = QuadDifferential::polynomial(vec![c(a, b), c(1.0, 0.5), c(0.0, -0.7)], unit_disk(64)).unwrap();
            let z = c(re, im);
            prop_assume!(q.eval(z).norm() > 1e-6);
            let v = vertical_direction(&q, z, None).unwrap();
            let h = horizontal_direction(&q, z, None).unwrap();
            prop_assert!((v.re * h.re + v.im * h.im).abs() < 1e-10);
            prop_assert!((v.norm() - 1.0).abs() < 1e-14);
            let phi = q.eval(z);
            prop_assert!((v * v * phi).re < 0.0 && (h * h * phi).re > 0.0);
            prop_assert!((v * v * phi).im.abs() < 1e-12 * phi.norm());
        }
    }
}
