use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geometry::cross;
use crate::sum::CompensatedSum;
use crate::Point2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundaryMapError {
    #[error("boundary map needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample {0} is not finite")]
    NonFinite(usize),
    #[error("arclength parameters must increase strictly (sample {0})")]
    NotIncreasing(usize),
    #[error("period {period} does not exceed the last parameter {last}")]
    BadPeriod { period: f64, last: f64 },
    #[error("boundary image winds {0} times instead of once counterclockwise")]
    NotPositivelyOriented(i32),
}

/// Closed boundary correspondence `s -> g(s)`, with `s` an arclength
/// parameter on the source boundary, periodic with the given period, and
/// linear between knots.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMap {
    knots: Vec<(f64, Point2)>,
    period: f64,
}

impl BoundaryMap {
    pub fn new(knots: Vec<(f64, Point2)>, period: f64) -> Result<Self, BoundaryMapError> {
        if knots.len() < 3 {
            return Err(BoundaryMapError::TooFewSamples(knots.len()));
        }
        for (i, &(s, w)) in knots.iter().enumerate() {
            if !(s.is_finite() && w.re.is_finite() && w.im.is_finite()) {
                return Err(BoundaryMapError::NonFinite(i));
            }
            if i > 0 && !(s > knots[i - 1].0) {
                return Err(BoundaryMapError::NotIncreasing(i));
            }
        }
        let last = knots[knots.len() - 1].0 - knots[0].0;
        if !(period > last) || !period.is_finite() {
            return Err(BoundaryMapError::BadPeriod { period, last });
        }
        Ok(Self { knots, period })
    }

    /// Knots at the vertices of `outline` (each edge split into `per_edge`
    /// pieces), parameterized by arclength from `outline[0]`.
    pub fn sample_polygon(outline: &[Point2], per_edge: usize, g: impl Fn(Point2) -> Point2) -> Result<Self, BoundaryMapError> {
        let n = outline.len();
        let per_edge = per_edge.max(1);
        let mut knots = Vec::with_capacity(n * per_edge);
        let mut s = CompensatedSum::new();
        for i in 0..n {
            let (a, b) = (outline[i], outline[(i + 1) % n]);
            let len = (b - a).norm();
            for k in 0..per_edge {
                let t = k as f64 / per_edge as f64;
                knots.push((s.value() + t * len, g(a + (b - a) * t)));
            }
            s.add(len);
        }
        Self::new(knots, s.value())
    }

    /// Knots on the unit circle, with `s` the angle in `[0, 2pi)`.
    pub fn on_unit_circle(samples: usize, g: impl Fn(f64) -> Point2) -> Result<Self, BoundaryMapError> {
        let knots = (0..samples)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / samples as f64;
                (t, g(t))
            })
            .collect();
        Self::new(knots, 2.0 * PI)
    }

    pub fn knots(&self) -> &[(f64, Point2)] {
        &self.knots
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Periodic linear interpolation at parameter `s`.
    pub fn eval(&self, s: f64) -> Point2 {
        let s0 = self.knots[0].0;
        let mut u = (s - s0) % self.period;
        if u < 0.0 {
            u += self.period;
        }
        let u = s0 + u;
        let k = self.knots.partition_point(|&(t, _)| t <= u);
        let (t0, w0) = self.knots[k - 1];
        let (t1, w1) = if k < self.knots.len() {
            self.knots[k]
        } else {
            (self.knots[0].0 + self.period, self.knots[0].1)
        };
        let lam = (u - t0) / (t1 - t0);
        w0 + (w1 - w0) * lam
    }

    /// Evaluation at a fraction of the period, `frac` in `[0, 1)`.
    pub fn eval_fraction(&self, frac: f64) -> Point2 {
        self.eval(self.knots[0].0 + frac * self.period)
    }

    /// Image polyline at the knots.
    pub fn image(&self) -> Vec<Point2> {
        self.knots.iter().map(|&(_, w)| w).collect()
    }

    /// Checks that the image polyline turns once counterclockwise about its
    /// centroid (a cheap orientation test for star-shaped images).
    pub fn check_orientation(&self) -> Result<(), BoundaryMapError> {
        let img = self.image();
        let c = img.iter().fold(Point2::new(0.0, 0.0), |a, &b| a + b) / img.len() as f64;
        let mut total = 0.0;
        for i in 0..img.len() {
            let (a, b) = (img[i] - c, img[(i + 1) % img.len()] - c);
            total += libm::atan2(cross(a, b), a.re * b.re + a.im * b.im);
        }
        let turns = libm::round(total / (2.0 * PI)) as i32;
        if turns == 1 {
            Ok(())
        } else {
            Err(BoundaryMapError::NotPositivelyOriented(turns))
        }
    }
}
