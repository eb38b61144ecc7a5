//! Euclidean primitives: points, half-space requests, projections,
//! reflections and uniform sampling on the unit sphere.
//!
//! Half-spaces are stored in the normalized form `{x : <normal, x> >= offset}`
//! with `|normal| = 1`, so the signed residual `offset - <normal, x>` is a true
//! Euclidean distance.

use std::fmt;
use std::ops::{Deref, Index};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Smallest normal length accepted by [`HalfSpace::new`].
pub const MIN_NORMAL_NORM: f64 = 1e-14;

/// Relative slack used by [`HalfSpace::contains`].
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A point or direction in `R^d`.
#[derive(Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Self {
        Vector(coords)
    }

    /// Like [`Vector::new`] but rejects empty or non-finite input.
    pub fn try_new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("vector must have dimension >= 1"));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate {c}")));
        }
        Ok(Vector(coords))
    }

    pub fn zeros(d: usize) -> Self {
        Vector(vec![0.0; d])
    }

    /// The `j`-th standard basis vector of `R^d`.
    pub fn basis(d: usize, j: usize) -> Self {
        let mut v = vec![0.0; d];
        v[j] = 1.0;
        Vector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn dist(&self, other: &[f64]) -> f64 {
        dist(&self.0, other)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// `self + s * dir`
    pub fn add_scaled(&self, s: f64, dir: &[f64]) -> Vector {
        Vector(self.0.iter().zip(dir).map(|(x, v)| x + s * v).collect())
    }

    pub fn sub(&self, other: &[f64]) -> Vector {
        Vector(self.0.iter().zip(other).map(|(x, y)| x - y).collect())
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|x| s * x).collect())
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`.
    pub fn lerp(&self, other: &[f64], lambda: f64) -> Vector {
        Vector(
            self.0
                .iter()
                .zip(other)
                .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
                .collect(),
        )
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl From<&[f64]> for Vector {
    fn from(v: &[f64]) -> Self {
        Vector(v.to_vec())
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(v: [f64; N]) -> Self {
        Vector(v.to_vec())
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// A request `{x : <normal, x> >= offset}` with unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace {
    normal: Vector,
    offset: f64,
}

impl HalfSpace {
    /// Normalizes the raw request `{x : <a, x> >= b}`.
    ///
    /// Rejects `|a| <= 1e-14`: such a request is either all of `R^d` or empty,
    /// and neither is a meaningful body to chase.
    pub fn new(a: &[f64], b: f64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::invalid("half-space normal must have dimension >= 1"));
        }
        if !b.is_finite() || a.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("half-space coefficients must be finite"));
        }
        let n = norm(a);
        if n <= MIN_NORMAL_NORM {
            return Err(Error::ZeroNormal { norm: n });
        }
        Ok(HalfSpace {
            normal: Vector(a.iter().map(|c| c / n).collect()),
            offset: b / n,
        })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    /// `<normal, x> - offset`; nonnegative exactly on the half-space.
    #[inline]
    pub fn slack(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    /// Euclidean distance from `x` to the half-space.
    pub fn distance(&self, x: &[f64]) -> f64 {
        (-self.slack(x)).max(0.0)
    }

    /// Membership with the default relative tolerance `1e-9 * max(1, |x|)`.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_with_tol(x, MEMBERSHIP_TOL * norm(x).max(1.0))
    }

    pub fn contains_with_tol(&self, x: &[f64], tol: f64) -> bool {
        self.slack(x) >= -tol
    }

    /// Nearest point of the half-space; identity on feasible points.
    pub fn project(&self, x: &[f64]) -> Vector {
        let s = self.slack(x);
        if s >= 0.0 {
            Vector::from(x)
        } else {
            Vector(x.iter().zip(self.normal.iter()).map(|(xi, ai)| xi - s * ai).collect())
        }
    }

    /// Mirror image of `x` across the bounding hyperplane.
    pub fn reflect(&self, x: &[f64]) -> Vector {
        let s = self.slack(x);
        Vector(
            x.iter()
                .zip(self.normal.iter())
                .map(|(xi, ai)| xi - 2.0 * s * ai)
                .collect(),
        )
    }
}

/// Closed ball `B(center, radius)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vector,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("ball radius must be finite and >= 0, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.center.dist(x) <= self.radius * (1.0 + MEMBERSHIP_TOL) + MEMBERSHIP_TOL
    }

    /// Support function `max_{x in B} <theta, x>` for a unit direction.
    pub fn support(&self, theta: &[f64]) -> f64 {
        self.center.dot(theta) + self.radius * norm(theta)
    }
}

pub fn normalize_halfspace(a: &[f64], b: f64) -> Result<HalfSpace> {
    HalfSpace::new(a, b)
}

pub fn project_halfspace(x: &[f64], k: &HalfSpace) -> Vector {
    k.project(x)
}

pub fn reflect(x: &[f64], h: &HalfSpace) -> Vector {
    h.reflect(x)
}

/// Uniform direction on `S^{d-1}`: a normalized standard Gaussian vector.
pub fn sample_unit_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vector {
    assert!(d >= 1, "sphere dimension must be >= 1");
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&g);
        // Gaussian vectors vanish with probability zero; this only guards
        // against a degenerate draw underflowing.
        if n > 1e-300 {
            return Vector(g.into_iter().map(|c| c / n).collect());
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
