//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use hopfharm_core::alternating::{estimate_critical_epsilon, mirror_defect, run_alternating_from, AlternatingConfig};
use hopfharm_core::gallery::{clover, heart_setup, unit_disk, ClosedFormMap, CloverEps, MapSample};
use hopfharm_core::geometry::{convex_hull, signed_area, JordanDomain};
use hopfharm_core::harmonic::{douglas_integral_fn, douglas_sequence, log_modulus_map, rkc_extend_and_check, rkc_on_mesh, sample_boundary, BoundaryMap, HarmonicSolver};
use hopfharm_core::hopf::{convergence_rate, energy_identity_gap, holomorphy_residual, hopf_product, stretch_of, EllipticDomain};
use hopfharm_core::mesh::{dirichlet_energy, signed_image_area, triangulate, triangulate_mirror_symmetric, triangulate_with, wirtinger, MeshMap, MeshOptions};
use hopfharm_core::quaddiff::{constancy_on_trajectory, minimal_length_check, trace_vertical, QuadDifferential};
use hopfharm_core::Point2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Point2 {
    Point2::new(re, im)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Maps computed by the criteria, checked again by the energy bound.
type Pool = Vec<MeshMap>;

fn stretch_identities(pool: &mut Pool) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let maps = [ClosedFormMap::butterfly(), ClosedFormMap::strip(), ClosedFormMap::control()];
    let mut worst_prod: f64 = 0.0;
    let mut worst_diff: f64 = 0.0;
    let mut order_ok = true;
    let mut count = 0;
    for map in &maps {
        let mesh = Arc::new(triangulate_with(map.domain(), &map.mesh_options(0.05)).unwrap());
        let m = map.sample_on(mesh).unwrap();
        let ders = wirtinger(&m).unwrap();
        for _ in 0..334 {
            let d = ders[rng.gen_range(0..ders.len())];
            let s = stretch_of(d.h_z, d.h_zbar);
            let j = d.jacobian.abs();
            let phi = (d.h_z * d.h_zbar.conj()).norm();
            let scale = 1.0 + s.dh * s.dh;
            worst_prod = worst_prod.max((s.dh * s.dv - j).abs() / scale);
            worst_diff = worst_diff.max((s.dh * s.dh - s.dv * s.dv - 4.0 * phi).abs() / scale);
            order_ok &= s.dv * s.dv <= j + 1e-12 * scale && j <= s.dh * s.dh + 1e-12 * scale;
            count += 1;
        }
        pool.push(m);
    }
    let pass = worst_prod < 1e-12 && worst_diff < 1e-12 && order_ok && count >= 1000;
    outcome(pass, format!("{count} triangles, |dH dV - |J|| <= {worst_prod:.1e}, |dH^2 - dV^2 - 4|phi|| <= {worst_diff:.1e}, ordering {order_ok}"))
}

fn refinement_errors(map: &ClosedFormMap, exact: impl Fn(Point2) -> Point2, pool: &mut Pool) -> (Vec<f64>, Vec<f64>) {
    let mut err = Vec::new();
    let mut res = Vec::new();
    for h in [0.1, 0.05, 0.025] {
        let mesh = Arc::new(triangulate_with(map.domain(), &map.mesh_options(h)).unwrap());
        let m = map.sample_on(mesh).unwrap();
        let f = hopf_product(&m).unwrap();
        err.push(f.max_error(&exact));
        res.push(holomorphy_residual(&f).global);
        pool.push(m);
    }
    (err, res)
}

fn hopf_oracle(pool: &mut Pool, residuals: &mut Vec<(String, Vec<f64>)>) -> Outcome {
    let (eb, rb) = refinement_errors(&ClosedFormMap::butterfly(), |z| -(c(1.0, 0.0) + z * 2.25), pool);
    let (es, rs) = refinement_errors(&ClosedFormMap::strip(), |_| c(-0.25, 0.0), pool);
    residuals.push(("butterfly".into(), rb));
    residuals.push(("strip".into(), rs));
    let ok = |e: &[f64]| e.windows(2).all(|w| w[0] / w[1] >= 1.5);
    outcome(ok(&eb) && ok(&es), format!("butterfly max error {eb:.4?}, strip {es:.4?}"))
}

fn holomorphy(pool: &mut Pool, residuals: &[(String, Vec<f64>)]) -> Outcome {
    let hs = [0.1, 0.05, 0.025];
    let (_, rc) = refinement_errors(&ClosedFormMap::control(), |_| c(0.0, 0.0), pool);
    let rb = &residuals[0].1;
    let rs = &residuals[1].1;
    let rate_b = convergence_rate(&hs, rb);
    let rate_s = convergence_rate(&hs, rs);
    let stalled = rc[2] > 10.0 * rb[2];
    let pass = rate_b >= 0.8 && rate_s >= 0.8 && stalled;
    outcome(pass, format!("rates butterfly {rate_b:.2} strip {rate_s:.2}; control {rc:.3?} vs butterfly finest {:.4}", rb[2]))
}

fn affine(b: f64) -> impl Fn(Point2) -> MapSample + Copy {
    move |z: Point2| MapSample { value: z + z.conj() * b, h_z: c(1.0, 0.0), h_zbar: c(b, 0.0) }
}

/// `H = h o f^{-1}` for the disk automorphism `f^{-1}(w) = (w + a) / (1 + conj(a) w)`.
fn through_mobius(h: impl Fn(Point2) -> MapSample + Copy, a: Point2) -> impl Fn(Point2) -> MapSample + Copy {
    move |w: Point2| {
        let den = c(1.0, 0.0) + a.conj() * w;
        let z = (w + a) / den;
        let dz = (c(1.0, 0.0) - a.norm_sqr()) / (den * den);
        let s = h(z);
        MapSample { value: s.value, h_z: s.h_z * dz, h_zbar: s.h_zbar * dz.conj() }
    }
}

fn energy_identity() -> Outcome {
    let disk = EllipticDomain::disk(c(0.0, 0.0), 1.0);
    let quad = |z: Point2| {
        let zb = z.conj();
        MapSample { value: z + zb * zb * 0.1, h_z: c(1.0, 0.0), h_zbar: zb * 0.2 }
    };
    let cubic = |z: Point2| {
        let zb = z.conj();
        MapSample { value: z + zb * zb * zb * 0.2, h_z: c(1.0, 0.0), h_zbar: zb * zb * 0.6 }
    };
    let mut details = Vec::new();
    let mut pass = true;
    type GapAt = Box<dyn Fn(usize) -> f64>;
    let pairs: [(&str, GapAt); 3] = [
        ("affine/mobius", Box::new(move |n| energy_identity_gap(affine(0.3), through_mobius(affine(0.3), c(0.3, 0.0)), &disk, &disk, |z| z, n).unwrap().relative_gap)),
        ("quadratic/mobius", Box::new(move |n| energy_identity_gap(quad, through_mobius(quad, c(0.2, 0.1)), &disk, &disk, |z| z, n).unwrap().relative_gap)),
        ("cubic/mobius", Box::new(move |n| energy_identity_gap(cubic, through_mobius(cubic, c(0.0, -0.25)), &disk, &disk, |z| z, n).unwrap().relative_gap)),
    ];
    for (name, gap) in pairs {
        let g: Vec<f64> = [64, 128, 256].iter().map(|&n| gap(n)).collect();
        pass &= g[2] < 1e-3 && g.windows(2).all(|w| w[1] < w[0]);
        let shown: Vec<String> = g.iter().map(|v| format!("{v:.1e}")).collect();
        details.push(format!("{name} [{}]", shown.join(", ")));
    }
    outcome(pass, details.join("; "))
}

/// Convex hull of random points around the origin, and a random monotone
/// reparametrisation of the radial projection onto it.
fn random_convex_data(rng: &mut ChaCha8Rng) -> (JordanDomain, BoundaryMap) {
    let pts: Vec<Point2> = (0..24).map(|_| Point2::from_polar(rng.gen_range(0.7..1.6), rng.gen_range(0.0..2.0 * PI))).collect();
    let mut hull = convex_hull(&pts);
    hull.extend([c(0.3, 0.0), c(0.0, 0.3), c(-0.3, 0.0), c(0.0, -0.3)]);
    let hull = convex_hull(&hull);
    let y = JordanDomain::new("random-convex", hull.clone()).unwrap();
    let amps: Vec<f64> = (1..=3).map(|k| rng.gen_range(-0.3..0.3) / k as f64).collect();
    let shift = rng.gen_range(0.0..2.0 * PI);
    let g = BoundaryMap::on_unit_circle(256, |t| {
        let s = t + shift + amps.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * t).sin()).sum::<f64>() / 3.0;
        radial_hit(&hull, Point2::from_polar(1.0, s))
    })
    .unwrap();
    (y, g)
}

fn radial_hit(poly: &[Point2], u: Point2) -> Point2 {
    let n = poly.len();
    let t = (0..n)
        .filter_map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let normal = c((b - a).im, -(b - a).re);
            let s = normal.re * u.re + normal.im * u.im;
            (s > 0.0).then(|| (normal.re * a.re + normal.im * a.im) / s)
        })
        .fold(f64::INFINITY, f64::min);
    u * t
}

fn rkc(pool: &mut Pool) -> Outcome {
    let x = unit_disk(256);
    let mesh = Arc::new(triangulate(&x, 0.05).unwrap());
    let solver = HarmonicSolver::new(mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut convex_ok = true;
    let mut min_j = f64::INFINITY;
    for _ in 0..5 {
        let (y, g) = random_convex_data(&mut rng);
        let r = rkc_on_mesh(&solver, x.boundary(), &y, &g).unwrap();
        convex_ok &= r.min_jacobian > 0.0 && !r.escaped();
        min_j = min_j.min(r.min_jacobian);
        pool.push(r.map);
    }
    let data = clover(CloverEps::new(0.05).unwrap(), 64).unwrap();
    let r = rkc_extend_and_check(&data.x, data.y.as_ref().unwrap(), &data.g, 0.05).unwrap();
    let depth = r.escape_depth;
    pool.push(r.map);
    let est = estimate_critical_epsilon(0.05).unwrap();
    let (lo, hi) = est.bracket;
    let bracket_ok = est.diagnostic.is_none() && 0.0 < lo && hi <= 1.0 && hi - lo <= 0.05;
    outcome(
        convex_ok && depth > 0.01 && bracket_ok,
        format!("convex min J {min_j:.3e}; clover eps=0.05 escape depth {depth:.3}; critical eps in ({lo:.4}, {hi:.4})"),
    )
}

fn alternating(pool: &mut Pool) -> Outcome {
    let heart = heart_setup(128).unwrap();
    let (mesh, mirror) = triangulate_mirror_symmetric(&heart.x, &MeshOptions::new(0.06)).unwrap();
    let mesh = Arc::new(mesh);
    let solver = HarmonicSolver::new(mesh.clone());
    let h0 = heart.cone_extension(mesh.clone()).unwrap();
    let mut cfg = AlternatingConfig::new(heart.y1.clone(), heart.y2.clone(), 0.06).unwrap();
    // tight stopping tolerances so that the run goes past twenty iterations
    cfg.max_iters = 40;
    cfg.sup_tol = 1e-12;
    cfg.energy_tol = 1e-14;
    cfg.validate_target(heart.y.boundary()).unwrap();
    let mut swapped = cfg.clone();
    swapped.cells = (cfg.cells.1.clone(), cfg.cells.0.clone());

    let boundary = mesh.boundary_loop().to_vec();
    let trace0: Vec<Point2> = boundary.iter().map(|&v| h0.values()[v]).collect();
    let mut trace_ok = true;
    let mut forward = Vec::new();
    let run = run_alternating_from(&solver, h0.clone(), &cfg, |_, m| {
        trace_ok &= boundary.iter().zip(&trace0).all(|(&v, &w)| m.values()[v] == w);
        forward.push(m.clone());
    })
    .unwrap();
    let mut sym: f64 = 0.0;
    let mut k = 0;
    run_alternating_from(&solver, h0, &swapped, |_, m| {
        if let Some(a) = forward.get(k) {
            sym = sym.max(mirror_defect(a, m, &mirror));
        }
        k += 1;
    })
    .unwrap();
    let recs = &run.trace.records;
    let slack = run.trace.energy_slack();
    let (r0, r1) = (recs[0].hopf_residual, recs.last().unwrap().hopf_residual);
    let iters = run.trace.iterations();
    let pass = iters >= 20 && slack <= 1e-9 && trace_ok && k == forward.len() && sym <= 1e-8 && r1 <= 0.5 * r0;
    pool.push(run.final_map);
    outcome(
        pass,
        format!(
            "{iters} iterations ({:?}), energy {:.5} -> {:.5}, slack {slack:.1e}, trace fixed {trace_ok}, mirror defect {sym:.1e}, residual {r0:.4} -> {r1:.4}",
            run.trace.final_status,
            recs[0].energy,
            recs.last().unwrap().energy
        ),
    )
}

fn trajectories() -> Outcome {
    let strip = ClosedFormMap::strip();
    let q = QuadDifferential::constant(c(-0.25, 0.0), strip.domain().clone()).unwrap();
    let mut dev: f64 = 0.0;
    for y0 in [-1.2, -0.4, 0.0, 0.5, 1.3] {
        let t = trace_vertical(&q, c(0.3, y0), 0.01, 10_000).unwrap();
        dev = dev.max(t.points.iter().map(|p| (p.im - y0).abs()).fold(0.0, f64::max));
    }
    let disk = unit_disk(256);
    let qb = QuadDifferential::polynomial(vec![c(-1.0, 0.0), c(-2.25, 0.0)], disk.clone()).unwrap();
    let t = trace_vertical(&qb, c(0.5, 0.0), 0.01, 10_000).unwrap();
    let im = t.points.iter().map(|p| p.im.abs()).fold(0.0, f64::max);
    let arc = t.restrict(&qb, |z| (0.05..=0.95).contains(&z.re)).unwrap();
    let osc = constancy_on_trajectory(|z| hopfharm_core::gallery::butterfly(z).value, &disk, &arc).unwrap();
    let span_ok = arc.points[0].re < 0.06 && arc.points[arc.points.len() - 1].re > 0.94;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut passed = 0;
    let mut worst: f64 = f64::INFINITY;
    for k in 0..20 {
        let z0 = loop {
            let z = c(rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
            if z.norm() < 0.9 && (z + 4.0 / 9.0).norm() > 0.05 {
                break z;
            }
        };
        let t = trace_vertical(&qb, z0, 0.01, 300).unwrap();
        let r = minimal_length_check(&qb, &t, 100, k).unwrap();
        worst = worst.min(r.min_competitor - r.traj_length);
        passed += usize::from(r.pass && r.competitors == 100);
    }
    let pass = dev < 1e-8 && im < 1e-6 && osc < 1e-9 && span_ok && passed == 20;
    outcome(pass, format!("strip deviation {dev:.1e}; butterfly |Im| {im:.1e}, oscillation {osc:.1e}; minimal length {passed}/20 (smallest margin {worst:.2e})"))
}

fn douglas() -> Outcome {
    let id = douglas_integral_fn(|t| Point2::from_polar(1.0, t), 4096).unwrap();
    let rel = (id - 4.0 * PI * PI).abs() / (4.0 * PI * PI);
    let lm = douglas_sequence(log_modulus_map, &[256, 512, 1024, 2048]).unwrap();
    outcome(rel < 1e-3 && lm.diverging, format!("identity relative error {rel:.2e}; log-modulus ratios {:.3?}", lm.ratios))
}

fn energy_bound(pool: &mut Pool) -> Outcome {
    let mut pool_ok = true;
    for m in pool.iter() {
        pool_ok &= dirichlet_energy(m) >= 2.0 * signed_image_area(m).abs() * (1.0 - 1e-12);
    }
    let mut gallery_ok = true;
    let mut margins = Vec::new();
    let heart = heart_setup(128).unwrap();
    let data_a = clover(CloverEps::new(0.05).unwrap(), 64).unwrap();
    let data_b = clover(CloverEps::new(0.5).unwrap(), 64).unwrap();
    let cases: [(&JordanDomain, &JordanDomain, &BoundaryMap); 3] =
        [(&heart.x, &heart.y, &heart.g), (&data_a.x, data_a.y.as_ref().unwrap(), &data_a.g), (&data_b.x, data_b.y.as_ref().unwrap(), &data_b.g)];
    for (x, y, g) in cases {
        let solver = HarmonicSolver::new(Arc::new(triangulate(x, 0.05).unwrap()));
        let (m, _) = solver.dirichlet(&sample_boundary(solver.mesh(), x.boundary(), g)).unwrap();
        let e = dirichlet_energy(&m);
        let area = signed_area(y.boundary()).unwrap();
        gallery_ok &= e >= 2.0 * area - 1e-2;
        margins.push(e - 2.0 * area);
        pool_ok &= e >= 2.0 * signed_image_area(&m).abs() * (1.0 - 1e-12);
    }
    outcome(pool_ok && gallery_ok, format!("{} maps checked; E - 2|Y| = {margins:.4?}", pool.len() + 3))
}

fn main() {
    let mut pool: Pool = Vec::new();
    let mut residuals = Vec::new();
    let mut all = true;
    let mut report = |id: usize, name: &str, budget: Duration, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = run();
        let dt = start.elapsed();
        let pass = o.pass && dt <= budget;
        all &= pass;
        println!("{} criterion {id} ({name}): {} [{:.2}s of {}s]", if pass { "PASS" } else { "FAIL" }, o.detail, dt.as_secs_f64(), budget.as_secs());
    };
    report(1, "stretch identities", Duration::from_secs(1), &mut || stretch_identities(&mut pool));
    report(2, "Hopf product oracle", Duration::from_secs(30), &mut || hopf_oracle(&mut pool, &mut residuals));
    report(3, "holomorphy residual", Duration::from_secs(60), &mut || holomorphy(&mut pool, &residuals));
    report(4, "energy identity", Duration::from_secs(60), &mut energy_identity);
    report(5, "RKC and its failure", Duration::from_secs(300), &mut || rkc(&mut pool));
    report(6, "alternating process", Duration::from_secs(300), &mut || alternating(&mut pool));
    report(7, "trajectories", Duration::from_secs(60), &mut trajectories);
    report(8, "Douglas integral", Duration::from_secs(30), &mut douglas);
    report(9, "energy lower bound", Duration::from_secs(10), &mut || energy_bound(&mut pool));
    if !all {
        std::process::exit(1);
    }
}
