//! Reference oracles for the test suites.
//!
//! Everything here is computed without the cone solver: grid searches,
//! dynamic programs on a line, closed-form support functions and Steiner
//! points, and Dykstra's alternating projections.

use chase_core::{HalfSpace, Vector};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn gap(k: &HalfSpace, x: &[f64]) -> f64 {
    (k.offset() - dot(k.normal(), x)).max(0.0)
}

/// Minimum movement `min sum |x_k - x_{k-1}|` over `x_k in K_k` by grid search.
///
/// The last point is eliminated exactly (it is the projection of the one
/// before), leaving `d (t - 1)` coordinates in `[-half_width, half_width]`.
/// A coarse grid over the whole box is refined around the best point until
/// the spacing reaches `step`. Intended for `d (t - 1) <= 4`.
pub fn grid_min_movement(start: &[f64], requests: &[HalfSpace], half_width: f64, step: f64) -> f64 {
    let d = start.len();
    let t = requests.len();
    assert!(t >= 1, "need a request");
    let m = d * (t - 1);
    if m == 0 {
        return gap(&requests[0], start);
    }
    let cost = |u: &[f64]| -> f64 {
        let mut prev = start;
        let mut total = 0.0;
        for (k, x) in u.chunks(d).enumerate() {
            if dot(requests[k].normal(), x) < requests[k].offset() {
                return f64::INFINITY;
            }
            total += dist(prev, x);
            prev = x;
        }
        total + gap(&requests[t - 1], prev)
    };

    let coarse = 40;
    let mut h = 2.0 * half_width / coarse as f64;
    let mut best = (f64::INFINITY, vec![0.0; m]);
    scan(m, &vec![0.0; m], half_width, coarse, &cost, &mut best);
    while h > step {
        let center = best.1.clone();
        // 17 points over [-4h, 4h] per coordinate halve the spacing.
        scan(m, &center, 4.0 * h, 16, &cost, &mut best);
        h /= 2.0;
    }
    best.0
}

/// Evaluates `cost` on the grid `center + [-w, w]^m` with `n + 1` points per axis.
fn scan(m: usize, center: &[f64], w: f64, n: usize, cost: &dyn Fn(&[f64]) -> f64, best: &mut (f64, Vec<f64>)) {
    let h = 2.0 * w / n as f64;
    let mut idx = vec![0usize; m];
    let mut u = vec![0.0; m];
    loop {
        for j in 0..m {
            u[j] = center[j] - w + h * idx[j] as f64;
        }
        let c = cost(&u);
        if c < best.0 {
            *best = (c, u.clone());
        }
        let mut j = 0;
        loop {
            if j == m {
                return;
            }
            idx[j] += 1;
            if idx[j] <= n {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Work function of a one-dimensional prefix tabulated on a uniform grid.
#[derive(Clone, Debug)]
pub struct LineWorkFunction {
    pub xs: Vec<f64>,
    pub w: Vec<f64>,
}

impl LineWorkFunction {
    /// Dynamic program over `n + 1` grid points in `[lo, hi]`; each request
    /// restricts the table, then a two-pass distance transform adds a leg.
    pub fn new(start: f64, requests: &[HalfSpace], lo: f64, hi: f64, n: usize) -> Self {
        let h = (hi - lo) / n as f64;
        let xs: Vec<f64> = (0..=n).map(|i| lo + h * i as f64).collect();
        let mut w: Vec<f64> = xs.iter().map(|x| (x - start).abs()).collect();
        for k in requests {
            for (wi, x) in w.iter_mut().zip(&xs) {
                if k.normal()[0] * x < k.offset() {
                    *wi = f64::INFINITY;
                }
            }
            for i in 1..w.len() {
                w[i] = w[i].min(w[i - 1] + h);
            }
            for i in (0..w.len() - 1).rev() {
                w[i] = w[i].min(w[i + 1] + h);
            }
        }
        LineWorkFunction { xs, w }
    }

    pub fn min(&self) -> f64 {
        self.w.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Linear interpolation of the table.
    pub fn eval(&self, x: f64) -> f64 {
        let lo = self.xs[0];
        let h = self.xs[1] - lo;
        let s = ((x - lo) / h).clamp(0.0, (self.xs.len() - 1) as f64);
        let i = (s.floor() as usize).min(self.xs.len() - 2);
        let f = s - i as f64;
        self.w[i] * (1.0 - f) + self.w[i + 1] * f
    }

    /// Endpoints of `{w <= budget}` on the grid.
    pub fn sublevel(&self, budget: f64) -> Option<(f64, f64)> {
        let inside: Vec<f64> = self.xs.iter().zip(&self.w).filter(|(_, w)| **w <= budget).map(|(x, _)| *x).collect();
        Some((*inside.first()?, *inside.last()?))
    }
}

/// Support function of the box `[lo, hi]`.
pub fn box_support(lo: &[f64], hi: &[f64], theta: &[f64]) -> f64 {
    theta.iter().zip(lo.iter().zip(hi)).map(|(t, (l, h))| (t * l).max(t * h)).sum()
}

/// Support function of `B(center, radius)`.
pub fn ball_support(center: &[f64], radius: f64, theta: &[f64]) -> f64 {
    dot(center, theta) + radius * dot(theta, theta).sqrt()
}

/// Support function of the convex hull of `vertices`.
pub fn polygon_support(vertices: &[[f64; 2]], theta: &[f64]) -> f64 {
    vertices.iter().map(|v| v[0] * theta[0] + v[1] * theta[1]).fold(f64::NEG_INFINITY, f64::max)
}

/// Steiner point of a convex polygon: its vertices weighted by exterior
/// angle over `2 pi`. Vertices must be in counter-clockwise order.
pub fn polygon_steiner(vertices: &[[f64; 2]]) -> [f64; 2] {
    let n = vertices.len();
    let mut s = [0.0; 2];
    for i in 0..n {
        let p = vertices[(i + n - 1) % n];
        let v = vertices[i];
        let q = vertices[(i + 1) % n];
        let a_in = (v[1] - p[1]).atan2(v[0] - p[0]);
        let a_out = (q[1] - v[1]).atan2(q[0] - v[0]);
        let mut turn = a_out - a_in;
        while turn < 0.0 {
            turn += std::f64::consts::TAU;
        }
        while turn >= std::f64::consts::TAU {
            turn -= std::f64::consts::TAU;
        }
        let wgt = turn / std::f64::consts::TAU;
        s[0] += wgt * v[0];
        s[1] += wgt * v[1];
    }
    s
}

/// Euclidean projection onto an intersection of half-spaces by Dykstra's
/// algorithm.
pub fn dykstra_project(x: &[f64], sets: &[HalfSpace], iterations: usize) -> Vector {
    let mut y = x.to_vec();
    let mut corr = vec![vec![0.0; x.len()]; sets.len()];
    for _ in 0..iterations {
        for (k, c) in sets.iter().zip(corr.iter_mut()) {
            let z: Vec<f64> = y.iter().zip(c.iter()).map(|(a, b)| a + b).collect();
            let g = gap(k, &z);
            let p: Vec<f64> = z.iter().zip(k.normal().iter()).map(|(zi, ai)| zi + g * ai).collect();
            for j in 0..y.len() {
                c[j] = z[j] - p[j];
            }
            y = p;
        }
    }
    Vector::new(y)
}
