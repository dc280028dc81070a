use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{BoundaryMap, HarmonicError};
use crate::sum::{csum, CompensatedSum};
use crate::Point2;

pub const POISSON_SAMPLES: usize = 2048;
pub const POISSON_EDGE_TOL: f64 = 1e-9;
pub const DOUGLAS_MIN_SAMPLES: usize = 16;
/// Consecutive-doubling ratio above which a Douglas sequence is flagged.
pub const DIVERGENCE_RATIO: f64 = 1.5;

/// Reads a unit-circle boundary map as a function of the angle.
pub fn circle_fn(g: &BoundaryMap) -> impl Fn(f64) -> Point2 + '_ {
    let k = g.period() / (2.0 * PI);
    move |t| g.eval(t * k)
}

pub fn poisson_extension(g: &BoundaryMap, eval: &[Point2]) -> Result<Vec<Point2>, HarmonicError> {
    poisson_extension_fn(circle_fn(g), eval, POISSON_SAMPLES)
}

/// Poisson integral by the trapezoid rule on `samples` equispaced angles.
pub fn poisson_extension_fn(g: impl Fn(f64) -> Point2, eval: &[Point2], samples: usize) -> Result<Vec<Point2>, HarmonicError> {
    if let Some(&z) = eval.iter().find(|z| !(z.norm() < 1.0 - POISSON_EDGE_TOL)) {
        return Err(HarmonicError::OutsideDisk(z));
    }
    let nodes: Vec<(Point2, Point2)> = (0..samples)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / samples as f64;
            (Point2::from_polar(1.0, t), g(t))
        })
        .collect();
    Ok(eval
        .iter()
        .map(|&z| {
            let c = 1.0 - z.norm_sqr();
            csum(nodes.iter().map(|&(xi, w)| w * (c / (xi - z).norm_sqr()))) / samples as f64
        })
        .collect())
}

pub fn douglas_integral(g: &BoundaryMap, n: usize) -> Result<f64, HarmonicError> {
    douglas_integral_fn(circle_fn(g), n)
}

/// Double trapezoid sum of `|g(xi) - g(eta)|^2 / |xi - eta|^2` over `n x n`
/// equispaced angles, leaving out the cyclic band `|i - j| <= 1`.
pub fn douglas_integral_fn(g: impl Fn(f64) -> Point2, n: usize) -> Result<f64, HarmonicError> {
    if n < DOUGLAS_MIN_SAMPLES {
        return Err(HarmonicError::TooFewSamples { got: n, min: DOUGLAS_MIN_SAMPLES });
    }
    let vals: Vec<Point2> = (0..n).map(|k| g(2.0 * PI * k as f64 / n as f64)).collect();
    let mut total = CompensatedSum::new();
    for d in 2..=n / 2 {
        let s = libm::sin(PI * d as f64 / n as f64);
        let chord2 = 4.0 * s * s;
        let mut row = CompensatedSum::new();
        for i in 0..n {
            row.add((vals[i] - vals[(i + d) % n]).norm_sqr());
        }
        // offsets d and n - d give the same pairs, except d = n/2
        let mult = if 2 * d == n { 1.0 } else { 2.0 };
        total.add(mult * row.value() / chord2);
    }
    let h = 2.0 * PI / n as f64;
    Ok(total.value() * h * h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DouglasReport {
    pub samples: Vec<usize>,
    pub values: Vec<f64>,
    /// `values[k + 1] / values[k]`.
    pub ratios: Vec<f64>,
    /// Last ratio exceeds [`DIVERGENCE_RATIO`].
    pub diverging: bool,
}

pub fn douglas_sequence(g: impl Fn(f64) -> Point2, samples: &[usize]) -> Result<DouglasReport, HarmonicError> {
    let values = samples.iter().map(|&n| douglas_integral_fn(&g, n)).collect::<Result<Vec<_>, _>>()?;
    let ratios: Vec<f64> = values.windows(2).map(|w| w[1] / w[0]).collect();
    let diverging = ratios.last().is_some_and(|&r| r > DIVERGENCE_RATIO);
    Ok(DouglasReport { samples: samples.to_vec(), values, ratios, diverging })
}

pub const LOG_MODULUS_TERMS: u32 = 30;
pub const LOG_MODULUS_SHIFT: f64 = 16.0;

/// Lacunary boundary map `sum_k a_k e^{i 2^k t}` with
/// `a_k = ((k0 + 1) / (k + k0))^2`. Its modulus of continuity behaves like
/// `1 / log(1/delta)`, and its Douglas sums grow without bound.
pub fn log_modulus_map(t: f64) -> Point2 {
    let mut acc = Point2::new(0.0, 0.0);
    for k in 1..=LOG_MODULUS_TERMS {
        let a = (LOG_MODULUS_SHIFT + 1.0) / (k as f64 + LOG_MODULUS_SHIFT);
        let freq = (1u64 << k) as f64;
        acc += Point2::from_polar(a * a, freq * t);
    }
    acc
}
