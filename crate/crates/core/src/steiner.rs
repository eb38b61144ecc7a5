//! Steiner points of convex bodies given by their support functions.
//!
//! `st(K) = d * E[theta * h_K(theta)]` for `theta` uniform on the sphere.
//! The Monte-Carlo estimator averages `d * h_K(theta_i) * theta_i` over
//! random directions; in the plane a uniform angular grid gives a
//! deterministic reference value.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{check_dim, sample_unit_sphere, Ball, Vector};
use crate::work_function::SupportFunction;

/// Default cap on the number of support queries of one estimate.
pub const DEFAULT_MAX_SAMPLES: usize = 10_000_000;

/// Smallest grid accepted by [`quadrature_steiner_2d`].
pub const MIN_QUADRATURE_RESOLUTION: usize = 10_000;

/// Directions are drawn and queried in chunks of this size.
const CHUNK: usize = 1024;

/// Parameters of one Steiner-point estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct SteinerQuery {
    /// Radius of a ball around the origin containing the body.
    pub radius: f64,
    /// Target accuracy.
    pub eps: f64,
    /// Failure probability, in `(0, 1]`.
    pub delta: f64,
    /// Cap on the number of directions; exceeding it is an error.
    pub max_samples: usize,
    /// Optional control point `m`: the estimate becomes
    /// `m + (d / N) * sum (h(theta_i) - <theta_i, m>) theta_i`, which has the
    /// same mean and is exact whenever the sample reproduces the identity.
    pub center: Option<Vector>,
}

impl SteinerQuery {
    pub fn new(radius: f64, eps: f64, delta: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("bounding radius must be positive, got {radius}")));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::invalid(format!("accuracy must be positive, got {eps}")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::invalid(format!("failure probability must lie in (0, 1], got {delta}")));
        }
        Ok(SteinerQuery { radius, eps, delta, max_samples: DEFAULT_MAX_SAMPLES, center: None })
    }

    pub fn with_max_samples(mut self, max_samples: usize) -> Self {
        self.max_samples = max_samples;
        self
    }

    pub fn with_center(mut self, center: Vector) -> Self {
        self.center = Some(center);
        self
    }

    /// Number of directions the estimate draws in dimension `d`.
    pub fn samples(&self, d: usize) -> f64 {
        required_samples(d, self.radius, self.eps, self.delta)
    }
}

/// `ceil((d+1)^2 R^2 / (eps^2 delta))`, as a float since it may overflow.
pub fn required_samples(d: usize, radius: f64, eps: f64, delta: f64) -> f64 {
    let k = (d as f64 + 1.0) * radius / eps;
    (k * k / delta).ceil()
}

/// Accuracy reached with `n` directions, the inverse of [`required_samples`].
pub fn accuracy_for_samples(d: usize, radius: f64, n: usize, delta: f64) -> f64 {
    (d as f64 + 1.0) * radius / (n as f64 * delta).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteinerEstimate {
    pub point: Vector,
    /// Number of directions drawn.
    pub samples: usize,
}

/// Monte-Carlo Steiner point.
///
/// Draws `N = q.samples(d)` directions from `rng`, queries the support
/// function at accuracy `eps / d` and returns `(d / N) * sum h(theta_i) theta_i`.
pub fn estimate_steiner<S, R>(support: &S, q: &SteinerQuery, rng: &mut R) -> Result<SteinerEstimate>
where
    S: SupportFunction + ?Sized,
    R: Rng + ?Sized,
{
    let d = support.dim();
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let required = q.samples(d);
    if required > q.max_samples as f64 {
        return Err(Error::OracleBudgetExceeded { required, cap: q.max_samples });
    }
    let n = required as usize;
    let query_eps = q.eps / d as f64;
    let mut acc = Accumulator::new(d, q.center.clone())?;
    let mut thetas = Vec::with_capacity(CHUNK.min(n));
    let mut left = n;
    while left > 0 {
        let m = left.min(CHUNK);
        thetas.clear();
        thetas.extend((0..m).map(|_| sample_unit_sphere(d, rng)));
        acc.add(support, &thetas, query_eps)?;
        left -= m;
    }
    Ok(SteinerEstimate { point: acc.finish(), samples: n })
}

/// Steiner estimate from caller-supplied directions.
///
/// Uses the first `q.samples(d)` entries of `thetas`, which must be
/// independent uniform unit vectors for the estimate to carry the usual
/// guarantee. Reusing one direction sequence across a run couples
/// successive estimates: each is still unbiased, but the sampled selector
/// becomes a fixed Lipschitz function of the body.
pub fn estimate_steiner_with<S>(support: &S, q: &SteinerQuery, thetas: &[Vector]) -> Result<SteinerEstimate>
where
    S: SupportFunction + ?Sized,
{
    let d = support.dim();
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let required = q.samples(d);
    if required > q.max_samples as f64 {
        return Err(Error::OracleBudgetExceeded { required, cap: q.max_samples });
    }
    let n = required as usize;
    if thetas.len() < n {
        return Err(Error::invalid(format!("estimate needs {n} directions, got {}", thetas.len())));
    }
    let mut acc = Accumulator::new(d, q.center.clone())?;
    for chunk in thetas[..n].chunks(CHUNK) {
        for th in chunk {
            check_dim(d, th.dim())?;
        }
        acc.add(support, chunk, q.eps / d as f64)?;
    }
    Ok(SteinerEstimate { point: acc.finish(), samples: n })
}

/// Running sum of `h(theta) theta`. In one dimension only `h(+1)` and
/// `h(-1)` exist and each is queried once.
struct Accumulator {
    sum: Vec<f64>,
    n: usize,
    line: [Option<f64>; 2],
    center: Option<Vector>,
}

impl Accumulator {
    fn new(d: usize, center: Option<Vector>) -> Result<Self> {
        if let Some(m) = &center {
            check_dim(d, m.dim())?;
        }
        Ok(Accumulator { sum: vec![0.0; d], n: 0, line: [None, None], center })
    }

    fn add<S: SupportFunction + ?Sized>(&mut self, support: &S, thetas: &[Vector], eps: f64) -> Result<()> {
        for th in thetas {
            let p = if self.sum.len() == 1 {
                let slot = usize::from(th[0] < 0.0);
                match self.line[slot] {
                    Some(p) => p,
                    None => *self.line[slot].insert(support.support(th, eps)?),
                }
            } else {
                support.support(th, eps)?
            };
            let p = match &self.center {
                Some(m) => p - m.dot(th),
                None => p,
            };
            for (s, c) in self.sum.iter_mut().zip(th.iter()) {
                *s += p * c;
            }
        }
        self.n += thetas.len();
        Ok(())
    }

    fn finish(self) -> Vector {
        let scale = self.sum.len() as f64 / self.n as f64;
        let s = Vector::new(self.sum.into_iter().map(|s| s * scale).collect());
        match self.center {
            Some(m) => m.add_scaled(1.0, &s),
            None => s,
        }
    }
}

/// Planar Steiner point by the rectangle rule on `resolution` equally
/// spaced angles, with support values queried at accuracy `eps`.
pub fn quadrature_steiner_2d<S>(support: &S, resolution: usize, eps: f64) -> Result<Vector>
where
    S: SupportFunction + ?Sized,
{
    if support.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: support.dim() });
    }
    if resolution < MIN_QUADRATURE_RESOLUTION {
        return Err(Error::invalid(format!(
            "quadrature needs at least {MIN_QUADRATURE_RESOLUTION} angles, got {resolution}"
        )));
    }
    let thetas: Vec<Vector> = (0..resolution)
        .map(|j| {
            let a = std::f64::consts::TAU * j as f64 / resolution as f64;
            Vector::from([a.cos(), a.sin()])
        })
        .collect();
    let h = support.support_sweep(&thetas, eps)?;
    let mut s = [0.0; 2];
    for (th, p) in thetas.iter().zip(&h) {
        s[0] += p * th[0];
        s[1] += p * th[1];
    }
    let scale = 2.0 / resolution as f64;
    Ok(Vector::from([s[0] * scale, s[1] * scale]))
}

/// The Steiner point of a ball is its center.
pub fn exact_steiner_ball(ball: &Ball) -> Vector {
    ball.center.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::work_function::FnSupport;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square(theta: &[f64]) -> f64 {
        theta[0].max(0.0) + theta[1].max(0.0)
    }

    #[test]
    fn sample_count() {
        assert_eq!(required_samples(2, 1.0, 0.1, 0.25), 3600.0);
        assert_eq!(required_samples(1, 2.0, 1.0, 1.0), 16.0);
        let eps = accuracy_for_samples(3, 2.0, 400, 1.0);
        assert_abs_diff_eq!(required_samples(3, 2.0, eps, 1.0), 400.0, epsilon = 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SteinerQuery::new(0.0, 0.1, 0.5).is_err());
        assert!(SteinerQuery::new(1.0, 0.0, 0.5).is_err());
        assert!(SteinerQuery::new(1.0, 0.1, 0.0).is_err());
        assert!(SteinerQuery::new(1.0, 0.1, 1.5).is_err());
        assert!(SteinerQuery::new(1.0, 0.1, 1.0).is_ok());
    }

    #[test]
    fn budget_cap() {
        let ball = FnSupport::new(3, |_: &[f64]| 1.0);
        let q = SteinerQuery::new(1.0, 1e-4, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(estimate_steiner(&ball, &q, &mut rng), Err(Error::OracleBudgetExceeded { .. })));
    }

    #[test]
    fn unit_disk_estimate() {
        let disk = FnSupport::new(2, |_: &[f64]| 1.0);
        let q = SteinerQuery::new(1.0, 0.1, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let est = estimate_steiner(&disk, &q, &mut rng).unwrap();
        assert_eq!(est.samples, 3600);
        assert!(est.point.norm() <= 0.2);
    }

    #[test]
    fn square_estimate() {
        let sq = FnSupport::new(2, square);
        let q = SteinerQuery::new(2.0, 0.05, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let est = estimate_steiner(&sq, &q, &mut rng).unwrap();
        assert!(est.point.dist(&[0.5, 0.5]) <= 0.1);
    }

    #[test]
    fn interval_uses_two_queries() {
        let calls = std::cell::Cell::new(0);
        let seg = FnSupport::new(1, |th: &[f64]| {
            calls.set(calls.get() + 1);
            if th[0] > 0.0 { 2.0 } else { 0.0 }
        });
        let q = SteinerQuery::new(2.0, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let est = estimate_steiner(&seg, &q, &mut rng).unwrap();
        assert_eq!(est.samples, 16);
        assert!(calls.get() <= 2);
        assert!((est.point[0] - 1.0).abs() <= 2.0);
    }

    #[test]
    fn same_seed_same_estimate() {
        let sq = FnSupport::new(3, |th: &[f64]| th.iter().map(|c| c.abs()).sum());
        let q = SteinerQuery::new(2.0, 0.5, 0.5).unwrap();
        let a = estimate_steiner(&sq, &q, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = estimate_steiner(&sq, &q, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn supplied_directions() {
        let sq = FnSupport::new(2, square);
        let q = SteinerQuery::new(2.0, 0.05, 0.25).unwrap();
        let n = q.samples(2) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let thetas: Vec<Vector> = (0..n + 10).map(|_| sample_unit_sphere(2, &mut rng)).collect();
        let a = estimate_steiner_with(&sq, &q, &thetas).unwrap();
        let b = estimate_steiner(&sq, &q, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert!(estimate_steiner_with(&sq, &q, &thetas[..n - 1]).is_err());
    }

    #[test]
    fn centered_pairs_are_exact_on_symmetric_bodies() {
        let disk = FnSupport::new(2, |th: &[f64]| 2.0 * th[0] - th[1] + 0.5);
        let q = SteinerQuery::new(4.0, 1.0, 1.0).unwrap().with_center(Vector::from([2.0, -1.0]));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = q.samples(2) as usize;
        let mut thetas = Vec::new();
        while thetas.len() < n {
            let th = sample_unit_sphere(2, &mut rng);
            thetas.push(th.scale(-1.0));
            thetas.push(th);
        }
        let est = estimate_steiner_with(&disk, &q, &thetas).unwrap();
        assert_abs_diff_eq!(est.point[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(est.point[1], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_examples() {
        let disk = FnSupport::new(2, |_: &[f64]| 1.0);
        let s = quadrature_steiner_2d(&disk, 10_000, 1e-9).unwrap();
        assert_abs_diff_eq!(s.norm(), 0.0, epsilon = 1e-6);

        let shifted = FnSupport::new(2, |th: &[f64]| 3.0 * th[0] - th[1] + 2.0);
        let s = quadrature_steiner_2d(&shifted, 10_000, 1e-9).unwrap();
        assert_abs_diff_eq!(s[0], 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s[1], -1.0, epsilon = 1e-6);

        let sq = FnSupport::new(2, square);
        let s = quadrature_steiner_2d(&sq, 10_000, 1e-9).unwrap();
        assert_abs_diff_eq!(s[0], 0.5, epsilon = 1e-4);
        assert_abs_diff_eq!(s[1], 0.5, epsilon = 1e-4);

        assert!(quadrature_steiner_2d(&sq, 100, 1e-9).is_err());
        let ball3 = FnSupport::new(3, |_: &[f64]| 1.0);
        assert!(quadrature_steiner_2d(&ball3, 10_000, 1e-9).is_err());
    }

    #[test]
    fn ball_examples() {
        let b = Ball::new(Vector::zeros(2), 1.0).unwrap();
        assert_eq!(exact_steiner_ball(&b).as_slice(), &[0.0, 0.0]);
        let b = Ball::new(Vector::from([2.0, 3.0]), 5.0).unwrap();
        assert_eq!(exact_steiner_ball(&b).as_slice(), &[2.0, 3.0]);
        let b = Ball::new(Vector::from([-1.0]), 0.1).unwrap();
        assert_eq!(exact_steiner_ball(&b).as_slice(), &[-1.0]);
    }
}
