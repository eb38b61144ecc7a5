//! Seeded instance generators.

use chase_core::geometry::sample_unit_sphere;
use chase_core::Vector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HarnessError, Result};
use crate::instance::Instance;

fn check(d: usize, t: usize) -> Result<()> {
    if d == 0 || t == 0 {
        return Err(HarnessError::Invalid(format!("generators need d >= 1 and T >= 1, got d={d} T={t}")));
    }
    Ok(())
}

/// Random unit normals with offsets set against the greedy trajectory:
/// with probability `violation_prob` the request excludes the previous
/// greedy position by a margin in `[0.1, 1]`, otherwise it contains it
/// with slack in `[0, 1]`.
pub fn gen_random(d: usize, t: usize, seed: u64, violation_prob: f64) -> Result<Instance> {
    check(d, t)?;
    if !(0.0..=1.0).contains(&violation_prob) {
        return Err(HarnessError::Invalid(format!("violation probability must lie in [0, 1], got {violation_prob}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vector::zeros(d);
    let mut requests = Vec::with_capacity(t);
    for _ in 0..t {
        let a = sample_unit_sphere(d, &mut rng);
        let ax = a.dot(&x);
        let b = if rng.random_bool(violation_prob) {
            ax + rng.random_range(0.1..=1.0)
        } else {
            ax - rng.random_range(0.0..=1.0)
        };
        // Greedy projection onto {<a, y> >= b} with unit a.
        if ax < b {
            x = x.add_scaled(b - ax, &a);
        }
        requests.push((a.into_inner(), b));
    }
    Instance::new(d, requests, format!("random d={d} T={t} p={violation_prob}"), Some(seed))
}

/// Half-planes `<(cos phi_t, sin phi_t), x> >= offset` with `phi_t = t * step_angle`.
pub fn gen_rotating(t: usize, step_angle: f64, offset: f64) -> Result<Instance> {
    check(2, t)?;
    let requests = (0..t)
        .map(|s| {
            let phi = step_angle * s as f64;
            (vec![phi.cos(), phi.sin()], offset)
        })
        .collect();
    Instance::new(2, requests, format!("rotating T={t} step={step_angle} offset={offset}"), None)
}

/// Shrinking cuts around a fixed random direction `u`.
///
/// Even steps are main cuts `<u, x> >= c_s` with nondecreasing `c_s`;
/// odd steps tilt the normal by a random angle and pass just outside the
/// final point `p = c_final u`. The sequence ends with a main cut, every
/// request contains `p`, and the cumulative intersections shrink, so the
/// offline optimum is `c_final = |p|`.
pub fn gen_nested(d: usize, t: usize, seed: u64) -> Result<Instance> {
    check(d, t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = sample_unit_sphere(d, &mut rng);
    let mains = t.div_ceil(2);
    let mut offsets = Vec::with_capacity(mains);
    let mut c = rng.random_range(0.5..1.0);
    for _ in 0..mains {
        offsets.push(c);
        c += rng.random_range(0.0..0.2);
    }
    let c_final = *offsets.last().unwrap();
    let p = u.scale(c_final);
    // Last request must be a main cut.
    let first_main = if t % 2 == 1 { 0 } else { 1 };
    let mut requests = Vec::with_capacity(t);
    let mut next_main = 0;
    for s in 0..t {
        if s % 2 == first_main % 2 {
            requests.push((u.as_slice().to_vec(), offsets[next_main]));
            next_main += 1;
        } else {
            let a = tilt(&u, &mut rng);
            let b = a.dot(&p) - rng.random_range(0.0..0.3);
            requests.push((a.into_inner(), b));
        }
    }
    Instance::new(d, requests, format!("nested d={d} T={t}"), Some(seed))
}

/// Unit vector at a random angle below 60 degrees from `u`.
fn tilt(u: &Vector, rng: &mut ChaCha8Rng) -> Vector {
    let d = u.dim();
    if d == 1 {
        return u.clone();
    }
    let g = sample_unit_sphere(d, rng);
    let w = g.add_scaled(-g.dot(u), u);
    let n = w.norm();
    if n < 1e-12 {
        return u.clone();
    }
    let phi = rng.random_range(0.0..std::f64::consts::FRAC_PI_3);
    u.scale(phi.cos()).add_scaled(phi.sin() / n, &w)
}
