//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines are printed in
//! order whether or not output capture is on. Exits nonzero if any
//! criterion fails.

use std::time::{Duration, Instant};

use chase_cli::suite::ratio_scale;
use chase_cli::{gen_random, gen_rotating, run, write_report, Algorithm, Instance, RunConfig, RunReport};
use chase_core::geometry::{reflect, sample_unit_sphere};
use chase_core::trajectory::solve_min_movement;
use chase_core::{
    estimate_steiner, ChaserConfig, FnSupport, HalfSpace, PhaseRule, SteinerQuery, TrajectoryProblem, Vector,
    WorkFunctionOracle,
};
use chase_testkit::{ball_support, box_support, grid_min_movement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Run = (Instance, RunReport);

struct Outcome {
    pass: bool,
    detail: String,
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    out.detail.push_str(&format!("; {:.1}s", took.as_secs_f64()));
    if let Some(limit) = limit {
        if took > limit {
            out.pass = false;
            out.detail.push_str(&format!(" exceeds {}s", limit.as_secs()));
        }
    }
    out
}

fn random_halfspace(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> HalfSpace {
    HalfSpace::new(&sample_unit_sphere(d, rng), rng.random_range(lo..hi)).unwrap()
}

/// Solver against grid search on 50 instances with d <= 2, t <= 3.
fn solver_matches_grid() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let d = 1 + i % 2;
        let t = 1 + (i / 2) % 3;
        let reqs: Vec<HalfSpace> = (0..t).map(|_| random_halfspace(&mut rng, d, -1.0, 1.5)).collect();
        let p = TrajectoryProblem::from_origin(reqs.clone()).unwrap();
        let solved = solve_min_movement(&p, 1e-7).and_then(|r| r.into_optimal(1e-7));
        let Ok(res) = solved else {
            return Outcome { pass: false, detail: format!("instance {i}: {solved:?}") };
        };
        let grid = grid_min_movement(&vec![0.0; d], &reqs, 5.0, 1e-3);
        worst = worst.max((res.value - grid).abs());
    }
    Outcome { pass: worst <= 1e-2, detail: format!("max |solver - grid| = {worst:.2e} over 50 instances") }
}

/// Convexity, 1-Lipschitzness, monotonicity and the reflection property on
/// 200 probes each.
fn work_function_invariants() -> Outcome {
    const EPS: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = [0usize; 4];
    let mut tested = [0usize; 4];
    let point = |rng: &mut ChaCha8Rng, d: usize| Vector::new((0..d).map(|_| rng.random_range(-4.0..4.0)).collect());
    while tested.iter().any(|&n| n < 200) {
        let d = rng.random_range(1..=3);
        let t = rng.random_range(1..=8);
        let reqs: Vec<HalfSpace> = (0..t + 1).map(|_| random_halfspace(&mut rng, d, -1.0, 2.0)).collect();
        let o = WorkFunctionOracle::with_prefix(Vector::zeros(d), reqs[..t].to_vec()).unwrap();
        let w = |o: &WorkFunctionOracle, x: &[f64]| o.eval_wf(x, EPS).unwrap();
        let (x, y) = (point(&mut rng, d), point(&mut rng, d));

        let lam: f64 = rng.random();
        let z = x.lerp(&y, lam);
        tested[0] += 1;
        violations[0] += usize::from(w(&o, &z) > lam * w(&o, &x) + (1.0 - lam) * w(&o, &y) + 3.0 * EPS);

        tested[1] += 1;
        violations[1] += usize::from((w(&o, &x) - w(&o, &y)).abs() > x.dist(&y) + 3.0 * EPS);

        let next = o.extend(reqs[t].clone()).unwrap();
        tested[2] += 1;
        violations[2] += usize::from(w(&next, &x) < w(&o, &x) - 3.0 * EPS);

        let k = &reqs[t - 1];
        if !k.contains(&x) {
            tested[3] += 1;
            violations[3] += usize::from(w(&o, &reflect(&x, k)) > w(&o, &x) + 3.0 * EPS);
        }
    }
    Outcome {
        pass: violations.iter().all(|&v| v == 0),
        detail: format!(
            "violations convex {}/{}, lipschitz {}/{}, monotone {}/{}, reflection {}/{}",
            violations[0], tested[0], violations[1], tested[1], violations[2], tested[2], violations[3], tested[3]
        ),
    }
}

/// Estimator failure rate and mean error on the unit ball and unit box.
fn steiner_contract() -> Outcome {
    let (eps, delta) = (0.1, 0.25);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [2usize, 3] {
        let zeros = vec![0.0; d];
        let ones = vec![1.0; d];
        let ball = FnSupport::new(d, |th: &[f64]| ball_support(&zeros, 1.0, th));
        let cube = FnSupport::new(d, |th: &[f64]| box_support(&zeros, &ones, th));
        let bodies: [(&str, &dyn chase_core::SupportFunction, f64, Vec<f64>); 2] =
            [("ball", &ball, 1.0, zeros.clone()), ("box", &cube, (d as f64).sqrt(), vec![0.5; d])];
        for (name, body, radius, st) in bodies {
            let q = SteinerQuery::new(radius, eps, delta).unwrap();
            let errs: Vec<f64> =
                (0..200).map(|_| estimate_steiner(body, &q, &mut rng).unwrap().point.dist(&st)).collect();
            let fail = errs.iter().filter(|&&e| e > 2.0 * eps).count() as f64 / 200.0;
            let mean = errs.iter().sum::<f64>() / 200.0;
            pass &= fail <= 2.0 * delta && mean <= eps * (1.0 + delta.sqrt()) * 1.5;
            parts.push(format!("{name} d={d}: fail {fail:.3} mean {mean:.4}"));
        }
    }
    Outcome { pass, detail: parts.join(", ") }
}

fn clean(r: &RunReport) -> bool {
    r.aborted.is_none() && r.flagged_steps().is_empty()
}

/// Steiner chaser ratios over 30 random instances per (d, T).
fn competitive_ratio(reports: &mut Vec<Run>) -> Outcome {
    let mut worst_c: f64 = 0.0;
    let mut cell = String::new();
    let mut excluded = 0;
    for d in [1usize, 2, 3, 5] {
        for t in [20usize, 50, 100] {
            for i in 0..30u64 {
                let seed = 1000 * d as u64 + 10 * t as u64 + i;
                let inst = gen_random(d, t, seed, 0.5).unwrap();
                let rep = run(&inst, &RunConfig::new(Algorithm::Steiner, seed)).unwrap();
                if clean(&rep) {
                    let c = rep.ratio().unwrap() / ratio_scale(d, t);
                    if c > worst_c {
                        worst_c = c;
                        cell = format!("d={d} T={t} seed={seed} ratio={:.3}", rep.ratio().unwrap());
                    }
                } else {
                    excluded += 1;
                }
                reports.push((inst, rep));
            }
        }
    }
    Outcome {
        pass: worst_c <= 20.0 && excluded < 360,
        detail: format!("C = {worst_c:.3} (worst: {cell}), {excluded} of 360 runs excluded"),
    }
}

/// Greedy against the Steiner chaser on the rotating adversary.
fn baseline_separation(reports: &mut Vec<Run>) -> Outcome {
    let inst = gen_rotating(200, std::f64::consts::TAU / 25.0, 1.0).unwrap();
    let greedy = run(&inst, &RunConfig::new(Algorithm::Greedy, 0)).unwrap();
    let g = greedy.ratio().unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..3 {
        let rep = run(&inst, &RunConfig::new(Algorithm::Steiner, seed)).unwrap();
        worst = worst.max(if clean(&rep) { rep.ratio().unwrap() } else { f64::INFINITY });
        reports.push((inst.clone(), rep));
    }
    reports.push((inst, greedy));
    Outcome {
        pass: g >= 2.0 * worst,
        detail: format!("greedy ratio {g:.3}, worst Steiner ratio {worst:.3} over 3 seeds, factor {:.3}", g / worst),
    }
}

/// Efficient chaser against the idealized one with matched phases.
fn ideal_gap(reports: &mut Vec<Run>, ideal: &mut Vec<Run>) -> Outcome {
    let literal = ChaserConfig { max_samples: 10_000_000, common_directions: false, centered: false, ..Default::default() };
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, t, chaser) in [("default", 10usize, ChaserConfig::default()), ("uncapped", 5, literal)] {
        let (mut gap, mut bound) = (0.0, 0.0);
        let mut mismatched = 0;
        for seed in 0..50u64 {
            let inst = gen_random(2, t, 5000 + seed, 0.5).unwrap();
            let mut cfg = RunConfig::new(Algorithm::Steiner, seed);
            cfg.chaser = chaser.clone();
            let a = run(&inst, &cfg).unwrap();
            let mut cfg = RunConfig::new(Algorithm::Ideal2d, seed);
            cfg.chaser.phase_rule = PhaseRule::Reset;
            let b = run(&inst, &cfg).unwrap();
            mismatched += usize::from(a.steps.iter().zip(&b.steps).any(|(x, y)| x.phase != y.phase));
            gap += (a.total - b.total).abs() / 50.0;
            bound += 4.0 * a.steps.iter().map(|s| s.r / (s.t * s.t) as f64).sum::<f64>() / 50.0;
            reports.push((inst.clone(), a));
            ideal.push((inst, b));
        }
        pass &= gap <= bound;
        parts.push(format!("{name} T={t}: mean gap {gap:.4} vs bound {bound:.4} ({mismatched} phase mismatches)"));
    }
    Outcome { pass, detail: parts.join(", ") }
}

/// Every emitted point of the projecting algorithms lies in its request.
fn feasibility(runs: &[Run], ideal: &[Run]) -> Outcome {
    let worst = |runs: &[Run], scale_r: bool| {
        let mut worst: f64 = 0.0;
        for (inst, rep) in runs {
            let reqs = inst.halfspaces().unwrap();
            for (s, k) in rep.steps.iter().zip(&reqs) {
                let scale = if scale_r { s.r.max(1e-300) } else { 1.0 };
                worst = worst.max(-k.slack(&s.position) / scale);
            }
        }
        worst
    };
    let hard = worst(runs, false);
    let soft = worst(ideal, true);
    Outcome {
        pass: hard <= 1e-9,
        detail: format!(
            "max violation {hard:.2e} over {} projecting runs; idealized runs (no projection) max violation {soft:.2e} r",
            runs.len()
        ),
    }
}

/// r is nondecreasing and phases stay within the logarithmic bound.
fn phase_structure(runs: &[&Run]) -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for (_, rep) in runs {
        if rep.algorithm == Algorithm::Greedy {
            continue;
        }
        checked += 1;
        let monotone = rep.steps.windows(2).all(|w| w[1].r >= w[0].r);
        let r0 = rep.steps.iter().map(|s| s.r).find(|&r| r > 0.0);
        let within = match (r0, rep.opt) {
            (Some(r0), Some(opt)) => {
                let bound = ((opt.value / r0).ln() / 1.48f64.ln()).max(0.0).ceil() + 1.0;
                rep.steps.last().unwrap().phase as f64 <= bound + 1e-9
            }
            _ => true,
        };
        if !(monotone && within) {
            bad.push(format!("{} {:?} seed {}", rep.algorithm, rep.label, rep.seed));
        }
    }
    Outcome { pass: bad.is_empty(), detail: format!("{} of {checked} runs violate: {:?}", bad.len(), bad) }
}

/// Identical seeds give byte-identical reports.
fn reproducibility() -> Outcome {
    let csv = |inst: &Instance, cfg: &RunConfig| {
        let mut buf = Vec::new();
        write_report(&run(inst, cfg).unwrap(), &mut buf).unwrap();
        buf
    };
    let cases = [
        (gen_random(3, 20, 11, 0.5).unwrap(), RunConfig::new(Algorithm::Steiner, 4)),
        (gen_random(2, 6, 12, 0.5).unwrap(), RunConfig::new(Algorithm::Ideal2d, 5)),
        (gen_rotating(40, 0.3, 1.0).unwrap(), RunConfig::new(Algorithm::Greedy, 6)),
    ];
    let same = cases.iter().filter(|(inst, cfg)| csv(inst, cfg) == csv(inst, cfg)).count();
    Outcome { pass: same == cases.len(), detail: format!("{same} of {} run pairs byte-identical", cases.len()) }
}

fn main() {
    let min = |m: u64| Some(Duration::from_secs(60 * m));
    let mut lines: Vec<(usize, Outcome)> = Vec::new();
    lines.push((1, timed(min(1), solver_matches_grid)));
    lines.push((2, timed(min(5), work_function_invariants)));
    lines.push((3, timed(min(10), steiner_contract)));

    let mut runs = Vec::new();
    let mut ideal = Vec::new();
    let c6 = timed(min(30), || competitive_ratio(&mut runs));
    let c7 = timed(min(5), || baseline_separation(&mut runs));
    let c8 = timed(None, || ideal_gap(&mut runs, &mut ideal));
    lines.push((4, feasibility(&runs, &ideal)));
    let all: Vec<&Run> = runs.iter().chain(&ideal).collect();
    lines.push((5, phase_structure(&all)));
    lines.push((6, c6));
    lines.push((7, c7));
    lines.push((8, c8));
    lines.push((9, timed(None, reproducibility)));

    let mut failed = 0;
    for (n, out) in &lines {
        println!("criterion {n}: {} {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
        failed += usize::from(!out.pass);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
