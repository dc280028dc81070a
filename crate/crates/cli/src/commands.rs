//! One function per subcommand. Each fills a [`Session`] and returns `Ok`
//! or the error that ends the run.

use std::path::Path;
use std::sync::Arc;

use hopfharm_core::alternating::{
    check_discrete_monotonicity, detect_squeezing, run_alternating_from, AlternatingConfig, AlternatingStatus, IterationRecord,
    MonotonicityVerdict,
};
use hopfharm_core::gallery::cone_extension;
use hopfharm_core::geometry::{ConvexCell, JordanDomain};
use hopfharm_core::harmonic::{douglas_sequence, rkc_extend_and_check, sample_boundary, HarmonicSolver};
use hopfharm_core::hopf::{convergence_rate, holomorphy_residual, hopf_product, HopfField};
use hopfharm_core::mesh::{triangulate, triangulate_with, wirtinger, MeshMap};
use hopfharm_core::quaddiff::{
    critical_points, minimal_length_check, trace, QuadDifferential, QuadError, Termination, TraceOptions, TrajectoryKind,
};
use hopfharm_core::Point2;
use serde::Serialize;

use crate::error::CliError;
use crate::formats::{
    AlternateConfigFile, BoundaryFile, BoundarySource, DomainFile, InitialMap, KindName, MapFile, MeshMapFile, QuadSpec, QuadSpecFile,
    DEFAULT_CORNER_TOL,
};
use crate::report::Session;
use crate::svg::SvgCanvas;

fn load_domain(s: &mut Session, path: &Path, role: &str) -> Result<JordanDomain, CliError> {
    let f: DomainFile = s.read_json(path)?;
    let loaded = f.load()?;
    if loaded.reoriented {
        s.diagnostic(format!("{role} boundary was clockwise and has been reversed"));
    }
    s.metric(format!("{role}_reoriented"), f64::from(u8::from(loaded.reoriented)));
    Ok(loaded.domain)
}

fn load_cell(s: &mut Session, path: &Path, role: &str) -> Result<ConvexCell, CliError> {
    Ok(ConvexCell::try_from(load_domain(s, path, role)?)?)
}

fn load_boundary(s: &mut Session, path: &Path) -> Result<BoundarySource, CliError> {
    let f: BoundaryFile = s.read_json(path)?;
    Ok(f.load()?)
}

/// Image mesh shaded by the per-triangle Jacobian.
fn image_figure(m: &MeshMap, outlines: &[&[Point2]], markers: &[Point2]) -> Result<String, CliError> {
    let ders = wirtinger(m)?;
    let extent = m.values().iter().copied().chain(outlines.iter().flat_map(|o| o.iter().copied()));
    let mut svg = SvgCanvas::fit(extent);
    let v = m.values();
    let jac: Vec<f64> = ders.iter().map(|d| d.jacobian).collect();
    svg.shaded_triangles(m.mesh().triangles().iter().map(|t| [v[t[0]], v[t[1]], v[t[2]]]), &jac);
    for o in outlines {
        svg.polygon(o, "black", "none");
    }
    for &p in markers {
        svg.marker(p, "green");
    }
    Ok(svg.finish())
}

/// Metrics: `min_jacobian`, `escape_count`, `escape_depth`, `energy`,
/// `solver_iterations`, `solver_residual`, `vertices`, `triangles`.
pub fn extend(s: &mut Session, domain: &Path, target: &Path, boundary: &Path, edge: f64) -> Result<(), CliError> {
    s.flag("edge", edge);
    let x = load_domain(s, domain, "domain")?;
    let y = load_domain(s, target, "target")?;
    let g = load_boundary(s, boundary)?.to_map()?;
    let r = rkc_extend_and_check(&x, &y, &g, edge)?;
    s.metric("min_jacobian", r.min_jacobian);
    s.metric("escape_count", r.escape_points.len() as f64);
    s.metric("escape_depth", r.escape_depth);
    s.metric("energy", r.solve.energy);
    s.metric("solver_iterations", r.solve.iterations as f64);
    s.metric("solver_residual", r.solve.residual_norm);
    s.metric("vertices", r.map.mesh().vertex_count() as f64);
    s.metric("triangles", r.map.mesh().triangle_count() as f64);
    if r.escaped() {
        s.diagnostic(format!("{} interior vertices map outside the target", r.escape_points.len()));
    }
    let escaped: Vec<Point2> = r.escape_points.iter().filter_map(|&p| r.map.eval(p, 1e-9)).collect();
    let fig = image_figure(&r.map, &[y.boundary()], &escaped)?;
    s.write("extend.svg", fig)?;
    s.write_json("map.json", &MeshMapFile::from_map(&r.map))
}

#[derive(Serialize)]
struct SqueezeEntry {
    image_point: [f64; 2],
    vertex_count: usize,
    diameter: f64,
    vertices: Vec<usize>,
}

#[derive(Serialize)]
struct SqueezeReport {
    corner_tol: f64,
    reflex_corners: Vec<[f64; 2]>,
    components: Vec<SqueezeEntry>,
    reversed_triangles: usize,
    near_zero_area_fraction: f64,
    verdict: &'static str,
}

#[derive(Serialize)]
struct TraceSummary {
    status: &'static str,
    iterations: usize,
    energy_slack: f64,
    records: Vec<TraceRow>,
}

#[derive(Serialize, Clone, Copy)]
struct TraceRow {
    iter: usize,
    energy: f64,
    sup_delta: f64,
    hopf_residual: f64,
    replaced_interior: usize,
}

impl From<&IterationRecord> for TraceRow {
    fn from(r: &IterationRecord) -> Self {
        Self { iter: r.index, energy: r.energy, sup_delta: r.sup_delta, hopf_residual: r.hopf_residual, replaced_interior: r.replaced_interior_count }
    }
}

fn status_name(st: AlternatingStatus) -> &'static str {
    match st {
        AlternatingStatus::Converged => "converged",
        AlternatingStatus::MaxIters => "max_iters",
        AlternatingStatus::Stalled => "stalled",
    }
}

/// Metrics: `iterations`, `status` (0 converged, 1 max_iters, 2 stalled),
/// `initial_energy`, `final_energy`, `energy_slack`, `initial_hopf_residual`,
/// `final_hopf_residual`, `final_sup_delta`, `squeezed_components`,
/// `reversed_triangles`, `near_zero_area_fraction`, `monotonicity`
/// (0 clean, 1 collapsed, 2 reversed).
pub fn alternate(s: &mut Session, domain: &Path, cells: [&Path; 2], boundary: &Path, config: &Path) -> Result<(), CliError> {
    let x = load_domain(s, domain, "domain")?;
    let y1 = load_cell(s, cells[0], "cell1")?;
    let y2 = load_cell(s, cells[1], "cell2")?;
    let g = load_boundary(s, boundary)?.to_map()?;
    let text = s.read_text(config)?;
    let file = AlternateConfigFile::parse(&text).map_err(|m| CliError::parse(config, m))?;
    let mut cfg = AlternatingConfig::new(y1, y2, file.target_edge)?;
    cfg.max_iters = file.max_iters.unwrap_or(cfg.max_iters);
    cfg.energy_tol = file.energy_tol.unwrap_or(cfg.energy_tol);
    cfg.sup_tol = file.sup_tol.unwrap_or(cfg.sup_tol);
    cfg.validate()?;
    let image = g.image();
    cfg.validate_target(&image)?;

    let mesh = Arc::new(triangulate(&x, cfg.target_edge)?);
    let solver = HarmonicSolver::new(mesh.clone());
    let h0 = match file.initial {
        InitialMap::Harmonic => solver.dirichlet(&sample_boundary(&mesh, x.boundary(), &g))?.0,
        InitialMap::Cone => cone_extension(&x, &g, mesh.clone())?,
    };
    s.metric("vertices", mesh.vertex_count() as f64);

    let outlines: [&[Point2]; 3] = [&image, cfg.cells.0.boundary(), cfg.cells.1.boundary()];
    let mut frame_err = None;
    let run = run_alternating_from(&solver, h0, &cfg, |rec, m| {
        if frame_err.is_some() {
            return;
        }
        let res = image_figure(m, &outlines, &[]).and_then(|fig| s.write(&format!("frames/iter_{:03}.svg", rec.index), fig));
        frame_err = res.err();
    })?;
    if let Some(e) = frame_err {
        return Err(e);
    }

    let tr = &run.trace;
    let rows: Vec<TraceRow> = tr.records.iter().map(TraceRow::from).collect();
    let (first, last) = (rows[0], rows[rows.len() - 1]);
    s.metric("iterations", tr.iterations() as f64);
    s.metric("status", tr.final_status as u8 as f64);
    s.metric("initial_energy", first.energy);
    s.metric("final_energy", last.energy);
    s.metric("energy_slack", tr.energy_slack());
    s.metric("initial_hopf_residual", first.hopf_residual);
    s.metric("final_hopf_residual", last.hopf_residual);
    s.metric("final_sup_delta", last.sup_delta);
    if tr.final_status == AlternatingStatus::Stalled {
        s.diagnostic("stalled: no mesh vertex maps inside a cell");
    }
    s.write_csv("trace.csv", &["iter", "energy", "sup_delta", "hopf_residual", "replaced_interior"], rows.iter().copied())?;
    let summary = TraceSummary { status: status_name(tr.final_status), iterations: tr.iterations(), energy_slack: tr.energy_slack(), records: rows };
    s.write_json("trace.json", &summary)?;
    s.write_json("final_map.json", &MeshMapFile::from_map(&run.final_map))?;

    let mono = check_discrete_monotonicity(&run.final_map)?;
    s.metric("reversed_triangles", mono.reversed_triangles as f64);
    s.metric("near_zero_area_fraction", mono.near_zero_area_fraction);
    s.metric("monotonicity", mono.verdict as u8 as f64);
    let verdict = match mono.verdict {
        MonotonicityVerdict::Clean => "clean",
        MonotonicityVerdict::CollapsedOk => "collapsed",
        MonotonicityVerdict::Reversed => "reversed",
    };
    match JordanDomain::reorienting("target", image.clone()) {
        Ok((y, _)) => {
            let corner_tol = file.corner_tol.unwrap_or(DEFAULT_CORNER_TOL) * y.diameter();
            let comps = detect_squeezing(&run.final_map, &y, corner_tol);
            s.metric("squeezed_components", comps.len() as f64);
            let report = SqueezeReport {
                corner_tol,
                reflex_corners: hopfharm_core::alternating::reflex_corners(&y).iter().map(|p| [p.re, p.im]).collect(),
                components: comps
                    .into_iter()
                    .map(|c| SqueezeEntry { image_point: [c.image_point.re, c.image_point.im], vertex_count: c.vertices.len(), diameter: c.diameter, vertices: c.vertices })
                    .collect(),
                reversed_triangles: mono.reversed_triangles,
                near_zero_area_fraction: mono.near_zero_area_fraction,
                verdict,
            };
            s.write_json("squeezing.json", &report)
        }
        Err(e) => {
            s.diagnostic(format!("squeezing skipped: boundary image is not a Jordan polygon ({e})"));
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct FieldRow {
    centroid_x: f64,
    centroid_y: f64,
    re_phi: f64,
    im_phi: f64,
    area: f64,
}

fn field_figure(f: &HopfField) -> String {
    let m = f.mesh();
    let mut svg = SvgCanvas::fit(m.vertices().iter().copied());
    let mags: Vec<f64> = f.phi.iter().map(|p| p.norm()).collect();
    svg.shaded_triangles((0..m.triangle_count()).map(|t| m.corners(t)), &mags);
    svg.finish()
}

/// Metrics per level `k`: `residual.k`, `edge.k`, `vertices.k`, and for
/// closed forms `hopf_error.k`. With two or more levels also `rate` and
/// `error_rate`, the fitted slopes against the edge length.
pub fn hopf_check(s: &mut Session, map: &Path, refinements: usize, edge: f64) -> Result<(), CliError> {
    s.flag("refinements", refinements);
    s.flag("edge", edge);
    if refinements == 0 {
        return Err(CliError::Config("refinements must be at least 1".into()));
    }
    let file: MapFile = s.read_json(map)?;
    let mut levels: Vec<(MeshMap, Option<f64>)> = Vec::new();
    match &file {
        MapFile::ClosedForm { closed_form } => {
            let cf = closed_form.closed_form();
            s.diagnostic(format!("closed form {}", cf.name()));
            let mut h = edge;
            for _ in 0..refinements {
                let mesh = Arc::new(triangulate_with(cf.domain(), &cf.mesh_options(h))?);
                let m = cf.sample_on(mesh)?;
                let field = hopf_product(&m)?;
                levels.push((m, Some(field.max_error(|z| cf.hopf(z)))));
                h *= 0.5;
            }
        }
        MapFile::Mesh(f) => {
            if refinements > 1 {
                s.diagnostic("a mesh map has a single level; refinements ignored");
            }
            levels.push((f.load()?, None));
        }
    }
    let mut hs = Vec::new();
    let mut res = Vec::new();
    let mut errs = Vec::new();
    let mut finest = None;
    for (k, (m, err)) in levels.iter().enumerate() {
        let field = hopf_product(m)?;
        let r = holomorphy_residual(&field);
        hs.push(m.mesh().max_edge());
        res.push(r.global);
        s.metric(format!("residual.{k}"), r.global);
        s.metric(format!("edge.{k}"), m.mesh().max_edge());
        s.metric(format!("vertices.{k}"), m.mesh().vertex_count() as f64);
        if let Some(e) = err {
            s.metric(format!("hopf_error.{k}"), *e);
            errs.push(*e);
        }
        finest = Some(field);
    }
    if hs.len() >= 2 {
        s.metric("rate", convergence_rate(&hs, &res));
        if errs.len() == hs.len() {
            s.metric("error_rate", convergence_rate(&hs, &errs));
        }
    }
    let field = finest.expect("at least one level");
    let rows = (0..field.len()).map(|t| FieldRow {
        centroid_x: field.centroid[t].re,
        centroid_y: field.centroid[t].im,
        re_phi: field.phi[t].re,
        im_phi: field.phi[t].im,
        area: field.area[t],
    });
    s.write_csv("hopf_field.csv", &["centroid_x", "centroid_y", "re_phi", "im_phi", "area"], rows)?;
    s.write("hopf.svg", field_figure(&field))
}

/// Options of the `trace` command.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRequest {
    pub starts: Vec<Point2>,
    pub step: f64,
    pub max_steps: usize,
    pub kind: Option<KindName>,
    pub competitors: usize,
    pub angle_tol: f64,
}

fn termination_code(t: Termination) -> f64 {
    match t {
        Termination::HitBoundary => 0.0,
        Termination::HitCritical => 1.0,
        Termination::StepLimit => 2.0,
    }
}

/// Metrics: `trajectories`, `critical_points` (exact forms only), per
/// trajectory `i`: `phi_length.i`, `points.i`, `termination.i` (0 boundary,
/// 1 critical, 2 step limit), and with competitors `min_competitor.i`,
/// `minimal_length_pass.i`, then `minimal_length_pass_rate`.
pub fn trace_cmd(s: &mut Session, spec_path: &Path, req: &TraceRequest, seed: u64) -> Result<(), CliError> {
    s.flag("step", req.step);
    s.flag("max_steps", req.max_steps);
    s.flag("competitors", req.competitors);
    s.flag("angle_tol", req.angle_tol);
    let starts: Vec<String> = req.starts.iter().map(|p| format!("{},{}", p.re, p.im)).collect();
    s.flag("starts", starts.join(";"));
    if let Some(k) = req.kind {
        s.flag("kind", format!("{k:?}").to_lowercase());
    }
    if req.starts.is_empty() {
        return Err(CliError::Config("give at least one --start".into()));
    }
    let spec: QuadSpecFile = s.read_json(spec_path)?;
    let (qs, domain) = spec.resolve().map_err(|m| CliError::parse(spec_path, m))?;
    let q = match qs {
        QuadSpec::Exact(q) => q,
        QuadSpec::Sampled { map, edge } => {
            let cf = map.closed_form();
            let mesh = Arc::new(triangulate_with(cf.domain(), &cf.mesh_options(edge))?);
            let field = HopfField::sample(mesh, |z| cf.hopf(z));
            QuadDifferential::sampled(&field, domain.unwrap_or_else(|| cf.domain().clone()))?
        }
    };
    let kind: TrajectoryKind = req.kind.unwrap_or(spec.kind).into();
    let crit = match critical_points(&q) {
        Ok(c) => {
            s.metric("critical_points", c.len() as f64);
            c
        }
        Err(QuadError::Unsupported) => Vec::new(),
        Err(e) => return Err(e.into()),
    };

    let mut opts = TraceOptions::new(req.step, req.max_steps);
    opts.angle_tol = req.angle_tol;
    let mut trajs = Vec::new();
    let mut passed = 0usize;
    for (i, &z0) in req.starts.iter().enumerate() {
        let t = trace(&q, kind, z0, &opts)?;
        s.metric(format!("phi_length.{i}"), t.phi_length);
        s.metric(format!("points.{i}"), t.points.len() as f64);
        s.metric(format!("termination.{i}"), termination_code(t.termination()));
        if req.competitors > 0 {
            let ml = minimal_length_check(&q, &t, req.competitors, seed.wrapping_add(i as u64))?;
            s.metric(format!("min_competitor.{i}"), ml.min_competitor);
            s.metric(format!("minimal_length_pass.{i}"), f64::from(u8::from(ml.pass)));
            passed += usize::from(ml.pass);
        }
        trajs.push(t);
    }
    s.metric("trajectories", trajs.len() as f64);
    if req.competitors > 0 {
        s.metric("minimal_length_pass_rate", passed as f64 / trajs.len() as f64);
    }

    let rows = trajs.iter().enumerate().flat_map(|(i, t)| t.points.iter().enumerate().map(move |(k, p)| (i, k, p.re, p.im)));
    s.write_csv("trajectories.csv", &["trajectory", "t_index", "x", "y"], rows)?;
    let mut svg = SvgCanvas::fit(q.domain().boundary().iter().copied());
    svg.polygon(q.domain().boundary(), "black", "none");
    for t in &trajs {
        svg.polyline(&t.points, "navy");
    }
    for &c in &crit {
        svg.marker(c, "red");
    }
    s.write("trace.svg", svg.finish())
}

/// Metrics: `integral.N` per sample count, `ratio.k` between consecutive
/// counts, `diverging` (0 or 1).
pub fn douglas(s: &mut Session, boundary: &Path, samples: &[usize]) -> Result<(), CliError> {
    let list: Vec<String> = samples.iter().map(usize::to_string).collect();
    s.flag("n", list.join(","));
    let src = load_boundary(s, boundary)?;
    if let BoundarySource::Circle(c) = src {
        s.diagnostic(format!("closed form {}", c.name()));
    }
    let r = douglas_sequence(src.circle_fn(), samples)?;
    for (n, v) in r.samples.iter().zip(&r.values) {
        s.metric(format!("integral.{n}"), *v);
    }
    s.metric_seq("ratio", r.ratios.iter().copied());
    s.metric("diverging", f64::from(u8::from(r.diverging)));
    if r.diverging {
        s.diagnostic("Douglas sums are diverging: the boundary map has no finite-energy extension");
    }
    let ratio = |k: usize| if k == 0 { f64::NAN } else { r.ratios[k - 1] };
    let rows = r.samples.iter().zip(&r.values).enumerate().map(|(k, (n, v))| (*n, *v, ratio(k)));
    s.write_csv("douglas.csv", &["n", "integral", "ratio"], rows)
}
