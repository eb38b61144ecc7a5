//! Chain-structured second-order cone programs.
//!
//! Both programs share one variable layout: free points `x_1, ..., x_m` and
//! leg lengths `lambda_1, ..., lambda_n` with cones `|x_k - x_{k-1}| <= lambda_k`,
//! where `x_0` is the fixed start and, when a terminal point is given,
//! `x_n` is fixed as well. Requests constrain `x_1, ..., x_t`.
//!
//! * minimum movement: `min sum lambda_k`
//! * support: `max <theta, x_{t+1}>` subject to `sum lambda_k <= budget`
//!
//! They are solved by a primal log-barrier path-following method. Grouping
//! `(x_k, lambda_k)` per leg makes every Newton system block tridiagonal, so
//! one Newton step costs `O(t d^3)`; the budget row is a rank-one term
//! handled with Sherman-Morrison. The reported gap is the barrier duality
//! gap `nu / tau`, corrected for inexact centering.

use crate::error::{Error, Result};
use crate::geometry::{check_dim, dist, dot, norm, HalfSpace, Vector};
use crate::linalg::BlockTridiag;

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryProblem {
    start: Vector,
    requests: Vec<HalfSpace>,
    terminal: Option<Vector>,
}

impl TrajectoryProblem {
    pub fn new(start: Vector, requests: Vec<HalfSpace>) -> Result<Self> {
        if requests.is_empty() {
            return Err(Error::invalid("trajectory problem needs at least one request"));
        }
        if !start.is_finite() || start.dim() == 0 {
            return Err(Error::invalid("start point must be finite with dimension >= 1"));
        }
        for k in &requests {
            check_dim(start.dim(), k.dim())?;
        }
        Ok(TrajectoryProblem { start, requests, terminal: None })
    }

    /// Problem starting at the origin of the requests' dimension.
    pub fn from_origin(requests: Vec<HalfSpace>) -> Result<Self> {
        let d = requests.first().map(HalfSpace::dim).unwrap_or(0);
        Self::new(Vector::zeros(d), requests)
    }

    /// Adds the trailing leg `|x_t - x|`, turning the minimum into `w_t(x)`.
    pub fn with_terminal(mut self, x: Vector) -> Result<Self> {
        check_dim(self.dim(), x.dim())?;
        if !x.is_finite() {
            return Err(Error::invalid("terminal point must be finite"));
        }
        self.terminal = Some(x);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.start.dim()
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn start(&self) -> &Vector {
        &self.start
    }

    pub fn requests(&self) -> &[HalfSpace] {
        &self.requests
    }

    pub fn terminal(&self) -> Option<&Vector> {
        self.terminal.as_ref()
    }

    /// Length of the polyline `start -> trajectory[0] -> ...`.
    pub fn path_cost(&self, trajectory: &[Vector]) -> f64 {
        path_cost(&self.start, trajectory)
    }
}

pub fn path_cost(start: &[f64], trajectory: &[Vector]) -> f64 {
    let mut prev = start;
    let mut total = 0.0;
    for p in trajectory {
        total += dist(prev, p);
        prev = p;
    }
    total
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportProblem {
    base: TrajectoryProblem,
    direction: Vector,
    budget: f64,
}

impl SupportProblem {
    /// `direction` must have unit norm (it is renormalized if off by < 1e-9).
    pub fn new(base: TrajectoryProblem, direction: Vector, budget: f64) -> Result<Self> {
        if base.terminal.is_some() {
            return Err(Error::invalid("support problem base must not have a terminal point"));
        }
        check_dim(base.dim(), direction.dim())?;
        let n = direction.norm();
        if !((n - 1.0).abs() <= 1e-9) {
            return Err(Error::invalid(format!("support direction must be a unit vector, norm is {n}")));
        }
        if !(budget > 0.0) || !budget.is_finite() {
            return Err(Error::invalid(format!("budget must be positive and finite, got {budget}")));
        }
        Ok(SupportProblem { base, direction: direction.scale(1.0 / n), budget })
    }

    pub fn base(&self) -> &TrajectoryProblem {
        &self.base
    }

    pub fn direction(&self) -> &Vector {
        &self.direction
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    AccuracyNotReached,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Objective of the returned trajectory: its path cost for minimum
    /// movement, `<theta, x>` for support.
    pub value: f64,
    /// `x_1, ..., x_t`, followed by the terminal or support point when the
    /// problem has one.
    pub trajectory: Vec<Vector>,
    /// Certified bound on `|value - optimum|`.
    pub achieved_gap: f64,
    pub iterations: usize,
}

impl SolveResult {
    fn infeasible() -> Self {
        SolveResult {
            status: SolveStatus::Infeasible,
            value: f64::NAN,
            trajectory: Vec::new(),
            achieved_gap: f64::INFINITY,
            iterations: 0,
        }
    }

    /// Converts a non-optimal status into the matching error.
    pub fn into_optimal(self, eps: f64) -> Result<Self> {
        match self.status {
            SolveStatus::Optimal => Ok(self),
            SolveStatus::Infeasible => Err(Error::Infeasible("no strictly feasible point for the requested budget".into())),
            SolveStatus::AccuracyNotReached => Err(Error::AccuracyNotReached {
                gap: self.achieved_gap,
                eps,
                iterations: self.iterations,
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Cap on Newton steps over the whole path-following run.
    pub max_newton_steps: usize,
    /// Factor by which the barrier weight grows between centerings.
    pub barrier_growth: f64,
    /// Centering stops once half the squared Newton decrement drops below this.
    pub centering_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_newton_steps: 600, barrier_growth: 30.0, centering_tol: 1e-2 }
    }
}

/// Minimizes total movement; with a terminal point this evaluates `w_t(x)`.
pub fn solve_min_movement(p: &TrajectoryProblem, eps: f64) -> Result<SolveResult> {
    solve_min_movement_with(p, eps, &SolverOptions::default())
}

pub fn solve_min_movement_with(p: &TrajectoryProblem, eps: f64, opts: &SolverOptions) -> Result<SolveResult> {
    check_eps(eps)?;
    let chain = Chain {
        d: p.dim(),
        start: &p.start,
        requests: &p.requests,
        free: p.len(),
        terminal: p.terminal.as_deref(),
        budget: None,
        direction: None,
    };
    let z0 = chain.interior_witness();
    Ok(chain.run(z0, None, eps, opts))
}

/// Maximizes `<theta, x>` over `{x : w_t(x) <= budget}`.
///
/// First solves the minimum-movement problem for a strictly feasible start.
pub fn solve_support(p: &SupportProblem, eps: f64) -> Result<SolveResult> {
    check_eps(eps)?;
    let opts = SolverOptions::default();
    let inner_eps = eps.min(1e-3 * p.budget).max(1e-12 * p.budget);
    let base = solve_min_movement_with(&p.base, inner_eps, &opts)?;
    if base.status == SolveStatus::Optimal && base.value - base.achieved_gap > p.budget {
        return Ok(SolveResult::infeasible());
    }
    if base.trajectory.is_empty() {
        return Ok(base);
    }
    solve_support_from(p, &base.trajectory, eps, &opts)
}

/// Like [`solve_support`], starting from a trajectory `x_1..x_t` that serves
/// the base requests with path cost strictly below the budget.
pub fn solve_support_from(
    p: &SupportProblem,
    interior: &[Vector],
    eps: f64,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    check_eps(eps)?;
    let t = p.base.len();
    if interior.len() < t {
        return Err(Error::invalid(format!("interior trajectory has {} points, need {t}", interior.len())));
    }
    let chain = Chain {
        d: p.base.dim(),
        start: &p.base.start,
        requests: &p.base.requests,
        free: t + 1,
        terminal: None,
        budget: Some(p.budget),
        direction: Some(&p.direction),
    };
    match chain.support_witness(&interior[..t]) {
        Some(z0) => Ok(chain.run(z0, None, eps, opts)),
        None => Ok(SolveResult::infeasible()),
    }
}

/// Repeated support queries of one body `{x : w_t(x) <= budget}`.
///
/// The analytic center of the budget-constrained program is computed once;
/// each direction then starts path following from it, already centered.
#[derive(Clone, Debug)]
pub struct SupportSession {
    base: TrajectoryProblem,
    budget: f64,
    center: Vec<f64>,
    opts: SolverOptions,
}

impl SupportSession {
    /// `interior` must serve the requests of `base` with path cost strictly
    /// below `budget`; otherwise `Error::Infeasible`.
    pub fn new(base: &TrajectoryProblem, budget: f64, interior: &[Vector], opts: &SolverOptions) -> Result<Self> {
        if base.terminal.is_some() {
            return Err(Error::invalid("support problem base must not have a terminal point"));
        }
        if !(budget > 0.0) || !budget.is_finite() {
            return Err(Error::invalid(format!("budget must be positive and finite, got {budget}")));
        }
        if interior.len() < base.len() {
            return Err(Error::invalid("interior trajectory is shorter than the request prefix"));
        }
        let mut session = SupportSession { base: base.clone(), budget, center: Vec::new(), opts: opts.clone() };
        let chain = session.chain(None);
        let mut z = chain
            .support_witness(&interior[..base.len()])
            .ok_or_else(|| Error::Infeasible(format!("no trajectory strictly inside budget {budget}")))?;
        let mut ws = Workspace::new(&chain);
        if let Centering::Failed = chain.center(&mut ws, &mut z, 0.0, opts.centering_tol, opts) {
            return Err(Error::AccuracyNotReached { gap: f64::INFINITY, eps: 0.0, iterations: ws.iterations });
        }
        session.center = z;
        Ok(session)
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    fn chain<'a>(&'a self, direction: Option<&'a [f64]>) -> Chain<'a> {
        Chain {
            d: self.base.dim(),
            start: &self.base.start,
            requests: &self.base.requests,
            free: self.base.len() + 1,
            terminal: None,
            budget: Some(self.budget),
            direction,
        }
    }

    /// Maximizes `<theta, x>` over the body; `theta` must be a unit vector.
    pub fn solve(&self, theta: &[f64], eps: f64) -> Result<SolveResult> {
        check_eps(eps)?;
        check_dim(self.dim(), theta.len())?;
        let chain = self.chain(Some(theta));
        Ok(chain.run(self.center.clone(), Some(self.initial_weight(&chain)), eps, &self.opts))
    }

    /// At the analytic center the merit gradient is `tau * c`, so the
    /// decrement at `tau = 1` is `|c|` in the local norm.
    fn initial_weight(&self, chain: &Chain) -> f64 {
        let mut ws = Workspace::new(chain);
        match chain.newton(&mut ws, &self.center, 1.0) {
            Some(dec) if dec > 0.0 => 0.25 / dec.sqrt(),
            _ => chain.nu() / self.budget,
        }
    }

    /// Solves for a sequence of closely spaced directions, starting each
    /// solve from the previous optimum. Falls back to a cold solve whenever
    /// the warm start does not certify.
    pub fn solve_sweep(&self, thetas: &[Vector], eps: f64) -> Result<Vec<SolveResult>> {
        check_eps(eps)?;
        let mut out = Vec::with_capacity(thetas.len());
        // A warm start that needs many steps is worse than a cold one.
        let warm_opts = SolverOptions { max_newton_steps: 12, ..self.opts.clone() };
        let mut state: Option<(Vec<f64>, f64)> = None;
        for theta in thetas {
            check_dim(self.dim(), theta.dim())?;
            let chain = self.chain(Some(theta));
            let warm = state.take().map(|(z, tau)| chain.run_with_state(z, Some(tau), eps, &warm_opts));
            let (res, z, tau) = match warm {
                Some(w) if w.0.status == SolveStatus::Optimal => w,
                _ => chain.run_with_state(self.center.clone(), Some(self.initial_weight(&chain)), eps, &self.opts),
            };
            if res.status == SolveStatus::Optimal {
                state = Some((z, tau));
            }
            out.push(res);
        }
        Ok(out)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!("accuracy must be positive, got {eps}")));
    }
    Ok(())
}

struct Chain<'a> {
    d: usize,
    start: &'a [f64],
    requests: &'a [HalfSpace],
    /// Number of free points `m`.
    free: usize,
    terminal: Option<&'a [f64]>,
    budget: Option<f64>,
    direction: Option<&'a [f64]>,
}

impl<'a> Chain<'a> {
    fn legs(&self) -> usize {
        self.free + usize::from(self.terminal.is_some())
    }

    fn len(&self) -> usize {
        self.free * (self.d + 1) + usize::from(self.terminal.is_some())
    }

    /// Offset of free point `j` (1-based).
    #[inline]
    fn x_at(&self, j: usize) -> usize {
        (j - 1) * (self.d + 1)
    }

    /// Offset of leg length `k` (1-based).
    #[inline]
    fn lambda_at(&self, k: usize) -> usize {
        if k <= self.free {
            (k - 1) * (self.d + 1) + self.d
        } else {
            self.free * (self.d + 1)
        }
    }

    #[inline]
    fn point<'z>(&'z self, z: &'z [f64], j: usize) -> &'z [f64] {
        if j == 0 {
            self.start
        } else if j <= self.free {
            let o = self.x_at(j);
            &z[o..o + self.d]
        } else {
            self.terminal.expect("point index past the free points needs a terminal")
        }
    }

    /// Barrier parameter: 2 per cone, 1 per linear inequality.
    fn nu(&self) -> f64 {
        (2 * self.legs() + self.requests.len() + usize::from(self.budget.is_some())) as f64
    }

    fn objective(&self, z: &[f64]) -> f64 {
        match self.direction {
            Some(theta) => -dot(theta, self.point(z, self.free)),
            None => (1..=self.legs()).map(|k| z[self.lambda_at(k)]).sum(),
        }
    }

    fn lambda_sum(&self, z: &[f64]) -> f64 {
        (1..=self.legs()).map(|k| z[self.lambda_at(k)]).sum()
    }

    /// `x_j = (b_j + delta_j) a_j` with `delta_j = 0.1 max(1, |b_j|)`.
    fn interior_witness(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.len()];
        for (j, k) in self.requests.iter().enumerate() {
            let b = k.offset();
            let s = b + 0.1 * b.abs().max(1.0);
            let o = self.x_at(j + 1);
            for (zi, ai) in z[o..o + self.d].iter_mut().zip(k.normal().iter()) {
                *zi = s * ai;
            }
        }
        let scale = self.requests.iter().map(|k| k.offset().abs()).fold(1.0, f64::max);
        self.fill_lambdas(&mut z, |len| 0.1 * len + 0.01 * scale);
        z
    }

    /// Strict interior point of the support program built from a trajectory
    /// serving the requests with path cost below the budget.
    fn support_witness(&self, interior: &[Vector]) -> Option<Vec<f64>> {
        let budget = self.budget?;
        let t = self.requests.len();
        let cost = path_cost(self.start, interior);
        let slack = budget - cost;
        if !(slack > 0.0) {
            return None;
        }
        let push = slack / (16.0 * t as f64);
        let mut z = vec![0.0; self.len()];
        for (j, (x, k)) in interior.iter().zip(self.requests).enumerate() {
            if k.slack(x) <= -0.5 * push {
                return None;
            }
            let o = self.x_at(j + 1);
            for ((zi, xi), ai) in z[o..o + self.d].iter_mut().zip(x.iter()).zip(k.normal().iter()) {
                *zi = xi + push * ai;
            }
        }
        let (last, o) = (self.x_at(t), self.x_at(t + 1));
        z.copy_within(last..last + self.d, o);
        let eta = slack / (8.0 * (t + 1) as f64);
        self.fill_lambdas(&mut z, |_| eta);
        (self.lambda_sum(&z) < budget).then_some(z)
    }

    fn fill_lambdas(&self, z: &mut [f64], margin: impl Fn(f64) -> f64) {
        for k in 1..=self.legs() {
            let len = dist(self.point(z, k - 1), self.point(z, k));
            z[self.lambda_at(k)] = len + margin(len);
        }
    }

    /// Change of `tau * c^T z + barrier(z)` along `z + alpha dz`, or `+inf`
    /// if the step leaves the domain. Every term is formed from increments so
    /// that small decreases stay visible when `tau * c^T z` is large.
    fn merit_change(&self, z: &[f64], dz: &[f64], alpha: f64, tau: f64) -> f64 {
        let d = self.d;
        let mut f = tau * alpha * self.objective(dz);
        let zero = [0.0; 0];
        let dpoint = |j: usize| -> &[f64] {
            if j >= 1 && j <= self.free {
                let o = self.x_at(j);
                &dz[o..o + d]
            } else {
                &zero
            }
        };
        for k in 1..=self.legs() {
            let li = self.lambda_at(k);
            let (lam, dlam) = (z[li], dz[li]);
            let (p0, p1) = (self.point(z, k - 1), self.point(z, k));
            let (q0, q1) = (dpoint(k - 1), dpoint(k));
            let (mut uu, mut udu, mut dudu) = (0.0, 0.0, 0.0);
            for i in 0..d {
                let ui = p1[i] - p0[i];
                let dui = q1.get(i).copied().unwrap_or(0.0) - q0.get(i).copied().unwrap_or(0.0);
                uu += ui * ui;
                udu += ui * dui;
                dudu += dui * dui;
            }
            let un = uu.sqrt();
            let s0 = (lam - un) * (lam + un);
            let ds = alpha * (2.0 * (lam * dlam - udu) + alpha * (dlam * dlam - dudu));
            let ratio = ds / s0;
            if !(ratio > -1.0) || !(lam + alpha * dlam > 0.0) {
                return f64::INFINITY;
            }
            f -= ratio.ln_1p();
        }
        for (j, k) in self.requests.iter().enumerate() {
            let o = self.x_at(j + 1);
            let ratio = alpha * dot(k.normal(), &dz[o..o + d]) / k.slack(&z[o..o + d]);
            if !(ratio > -1.0) {
                return f64::INFINITY;
            }
            f -= ratio.ln_1p();
        }
        if let Some(b) = self.budget {
            let rate: f64 = (1..=self.legs()).map(|k| dz[self.lambda_at(k)]).sum();
            let ratio = -alpha * rate / (b - self.lambda_sum(z));
            if !(ratio > -1.0) {
                return f64::INFINITY;
            }
            f -= ratio.ln_1p();
        }
        f
    }

    /// Gradient and Hessian of the merit function; returns the rank-one
    /// budget curvature `1 / rho^2` (zero without a budget).
    fn assemble(&self, z: &[f64], tau: f64, h: &mut BlockTridiag, g: &mut [f64], u: &mut [f64]) -> f64 {
        let d = self.d;
        let n = d + 1;
        h.clear();
        g.iter_mut().for_each(|v| *v = 0.0);
        if self.terminal.is_some() {
            let db = h.diag_block_mut(self.free);
            for r in 1..=d {
                db[r * n + r] = 1.0;
            }
        }

        match self.direction {
            Some(theta) => {
                let o = self.x_at(self.free);
                for i in 0..d {
                    g[o + i] -= tau * theta[i];
                }
            }
            None => {
                for k in 1..=self.legs() {
                    g[self.lambda_at(k)] += tau;
                }
            }
        }

        for k in 1..=self.legs() {
            let blk = k - 1;
            let prev = self.point(z, k - 1);
            let cur = self.point(z, k);
            for i in 0..d {
                u[i] = cur[i] - prev[i];
            }
            let un = norm(u);
            let li = self.lambda_at(k);
            let lam = z[li];
            let s = (lam - un) * (lam + un);
            let (a2, b1) = (4.0 / (s * s), 2.0 / s);
            let cur_free = k <= self.free;
            let prev_free = k >= 2;
            // Local offsets of lambda_k inside block k-1.
            let lam_local = if cur_free { d } else { 0 };

            g[li] -= 2.0 * lam / s;
            // Only lower triangles of the diagonal blocks are used.
            let db = h.diag_block_mut(blk);
            db[lam_local * n + lam_local] += a2 * lam * lam - b1;
            if cur_free {
                let o = self.x_at(k);
                for r in 0..d {
                    g[o + r] += 2.0 * u[r] / s;
                    let ar = a2 * u[r];
                    for c in 0..r {
                        db[r * n + c] += ar * u[c];
                    }
                    db[r * n + r] += ar * u[r] + b1;
                    db[d * n + r] -= ar * lam;
                }
            }
            if prev_free {
                let o = self.x_at(k - 1);
                let pb = h.diag_block_mut(blk - 1);
                for r in 0..d {
                    g[o + r] -= 2.0 * u[r] / s;
                    let ar = a2 * u[r];
                    for c in 0..r {
                        pb[r * n + c] += ar * u[c];
                    }
                    pb[r * n + r] += ar * u[r] + b1;
                }
                let sb = h.sub_block_mut(blk);
                for r in 0..d {
                    let ar = a2 * u[r];
                    if cur_free {
                        for c in 0..d {
                            sb[r * n + c] -= ar * u[c];
                        }
                        sb[r * n + r] -= b1;
                    }
                    sb[lam_local * n + r] += ar * lam;
                }
            }
        }

        for (j, k) in self.requests.iter().enumerate() {
            let o = self.x_at(j + 1);
            let sl = k.slack(&z[o..o + d]);
            let a = k.normal();
            let inv = 1.0 / sl;
            let db = h.diag_block_mut(j);
            for r in 0..d {
                g[o + r] -= a[r] * inv;
                let ar = a[r] * inv * inv;
                for c in 0..=r {
                    db[r * n + c] += ar * a[c];
                }
            }
        }

        match self.budget {
            Some(b) => {
                let rho = b - self.lambda_sum(z);
                for k in 1..=self.legs() {
                    g[self.lambda_at(k)] += 1.0 / rho;
                }
                1.0 / (rho * rho)
            }
            None => 0.0,
        }
    }

    /// Largest step keeping every constraint strictly satisfied.
    fn max_step(&self, z: &[f64], dz: &[f64]) -> f64 {
        let d = self.d;
        let mut amax = f64::INFINITY;
        let zero = vec![0.0; d];
        let dpoint = |j: usize| -> &[f64] {
            if j >= 1 && j <= self.free {
                let o = self.x_at(j);
                &dz[o..o + d]
            } else {
                &zero
            }
        };
        for k in 1..=self.legs() {
            let (p0, p1) = (self.point(z, k - 1), self.point(z, k));
            let (q0, q1) = (dpoint(k - 1), dpoint(k));
            let li = self.lambda_at(k);
            let (lam, dlam) = (z[li], dz[li]);
            let (mut uu, mut udu, mut dudu) = (0.0, 0.0, 0.0);
            for i in 0..d {
                let ui = p1[i] - p0[i];
                let dui = q1[i] - q0[i];
                uu += ui * ui;
                udu += ui * dui;
                dudu += dui * dui;
            }
            if dlam < 0.0 {
                amax = amax.min(-lam / dlam);
            }
            // (lam + a dlam)^2 - |u + a du|^2 = qa a^2 + qb a + qc
            let qa = dlam * dlam - dudu;
            let qb = 2.0 * (lam * dlam - udu);
            let qc = lam * lam - uu;
            if let Some(root) = smallest_positive_root(qa, qb, qc) {
                amax = amax.min(root);
            }
        }
        for (j, k) in self.requests.iter().enumerate() {
            let o = self.x_at(j + 1);
            let rate = dot(k.normal(), &dz[o..o + d]);
            if rate < 0.0 {
                amax = amax.min(-k.slack(&z[o..o + d]) / rate);
            }
        }
        if let Some(b) = self.budget {
            let rate: f64 = (1..=self.legs()).map(|k| dz[self.lambda_at(k)]).sum();
            if rate > 0.0 {
                amax = amax.min((b - self.lambda_sum(z)) / rate);
            }
        }
        amax
    }

    /// Duality gap of the primal point `z` against the dual point built from
    /// its barrier multipliers, extrapolated along the Newton step `dz`
    /// (`mu_j = (1 - <a_j, dx_j> / sigma_j) / (tau sigma_j)`, clipped at 0).
    ///
    /// Writing `p_k = sum_{j >= k} mu_j a_j`, weak duality gives, for any
    /// `mu >= 0`:
    ///
    /// * minimum movement: `sum_j mu_j (b_j - <a_j, x_0>) + <q, x - x_0>` is a
    ///   lower bound once `|q| <= 1` and `|p_k + q| <= 1` for all `k`, where
    ///   `q` is the terminal leg's multiplier (zero without a terminal);
    ///   both are scaled down uniformly to get there;
    /// * support: `<theta, x_0> + sum_j mu_j (<a_j, x_0> - b_j)
    ///   + budget * max(1, max_k |theta + p_k|)` is an upper bound.
    ///
    /// The bound does not depend on how well `z` is centered.
    fn certified_gap(&self, z: &[f64], dz: &[f64], tau: f64) -> f64 {
        let d = self.d;
        let t = self.requests.len();
        let x0 = self.start;
        let mu: Vec<f64> = self
            .requests
            .iter()
            .enumerate()
            .map(|(j, k)| {
                let o = self.x_at(j + 1);
                let sl = k.slack(&z[o..o + d]);
                let rate = dot(k.normal(), &dz[o..o + d]) / sl;
                ((1.0 - rate) / (tau * sl)).max(0.0)
            })
            .collect();
        let shift = match self.direction {
            Some(theta) => theta.to_vec(),
            None => match self.terminal {
                Some(_) => {
                    // Gradient of the terminal cone barrier in u, extrapolated
                    // along the step (u = x - x_t, so du = -dx_t).
                    let k = self.legs();
                    let li = self.lambda_at(k);
                    let (lam, dlam) = (z[li], dz[li]);
                    let (p0, p1) = (self.point(z, k - 1), self.point(z, k));
                    let u: Vec<f64> = p0.iter().zip(p1).map(|(a, b)| b - a).collect();
                    let o = self.x_at(k - 1);
                    let du: Vec<f64> = dz[o..o + d].iter().map(|v| -v).collect();
                    let un = norm(&u);
                    let s = (lam - un) * (lam + un);
                    let (a2, b1) = (4.0 / (s * s), 2.0 / s);
                    let udu = dot(&u, &du);
                    (0..d).map(|i| (b1 * u[i] + a2 * u[i] * udu + b1 * du[i] - a2 * lam * u[i] * dlam) / tau).collect()
                }
                None => vec![0.0; d],
            },
        };
        // max_k |shift + p_k|, accumulating p_k from the back.
        let mut acc = shift.clone();
        let mut worst = norm(&acc);
        for j in (0..t).rev() {
            let a = self.requests[j].normal();
            for i in 0..d {
                acc[i] += mu[j] * a[i];
            }
            worst = worst.max(norm(&acc));
        }
        let margin: f64 = self
            .requests
            .iter()
            .zip(&mu)
            .map(|(k, m)| m * (dot(k.normal(), x0) - k.offset()))
            .sum();
        match (self.direction, self.budget) {
            (Some(theta), Some(b)) => {
                let upper = dot(theta, x0) + margin + b * worst.max(1.0);
                let primal = dot(theta, self.point(z, self.free));
                (upper - primal).max(0.0)
            }
            _ => {
                let mut lower = -margin;
                if let Some(x) = self.terminal {
                    lower += shift.iter().zip(x.iter().zip(x0)).map(|(q, (xi, x0i))| q * (xi - x0i)).sum::<f64>();
                }
                let lower = lower / worst.max(1.0);
                let primal: f64 = (1..=self.legs()).map(|k| dist(self.point(z, k - 1), self.point(z, k))).sum();
                (primal - lower).max(0.0)
            }
        }
    }

    /// Newton direction for the merit at weight `tau`; returns the squared
    /// Newton decrement, or `None` if no usable direction is found.
    ///
    /// Close to the boundary the Hessian is too ill-conditioned for a plain
    /// Cholesky solve; a growing diagonal shift is then added until the
    /// solve yields a descent direction.
    fn newton(&self, ws: &mut Workspace, z: &[f64], tau: f64) -> Option<f64> {
        let gamma = self.assemble(z, tau, &mut ws.h, &mut ws.g, &mut ws.u);
        let gnorm = norm(&ws.g);
        if !gnorm.is_finite() {
            return None;
        }
        let mut shift = 0.0;
        while shift <= 1.0 {
            if ws.h.factor_shifted(shift) {
                if let Some(dec) = ws.direction(gamma) {
                    return Some(dec);
                }
            }
            shift = if shift == 0.0 { 1e-12 } else { shift * 100.0 };
        }
        None
    }

    /// Newton iterations toward the minimizer of the merit at weight `tau`.
    /// Returns the final squared decrement.
    fn center(&self, ws: &mut Workspace, z: &mut [f64], tau: f64, tol: f64, opts: &SolverOptions) -> Centering {
        let mut best = f64::INFINITY;
        let mut stalled = 0;
        loop {
            let Some(dec) = self.newton(ws, z, tau) else {
                return Centering::Failed;
            };
            if dec / 2.0 <= tol {
                return Centering::Done;
            }
            // Near the boundary the decrement may stop shrinking at working
            // precision; once it is small, that is as centered as it gets.
            if dec < 0.9 * best {
                best = dec;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= 3 && dec / 2.0 <= opts.centering_tol {
                    return Centering::Done;
                }
            }
            if ws.iterations >= opts.max_newton_steps {
                return Centering::Failed;
            }
            ws.iterations += 1;

            let mut alpha = (0.99 * self.max_step(z, &ws.dz)).min(1.0);
            let slope = dot(&ws.g, &ws.dz);
            let mut accepted = false;
            for _ in 0..60 {
                if self.merit_change(z, &ws.dz, alpha, tau) <= 1e-2 * alpha * slope {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                // No descent at working precision: treat as centered.
                return Centering::Done;
            }
            for (zi, di) in z.iter_mut().zip(&ws.dz) {
                *zi += alpha * di;
            }
        }
    }

    /// Path following from the interior point `z` with initial weight `tau`.
    fn run(&self, z: Vec<f64>, tau0: Option<f64>, eps: f64, opts: &SolverOptions) -> SolveResult {
        self.run_with_state(z, tau0, eps, opts).0
    }

    /// Like [`Chain::run`], also returning the reported iterate and its weight.
    fn run_with_state(&self, mut z: Vec<f64>, tau0: Option<f64>, eps: f64, opts: &SolverOptions) -> (SolveResult, Vec<f64>, f64) {
        let mut ws = Workspace::new(self);
        let nu = self.nu();
        let mut tau = tau0.unwrap_or_else(|| {
            let scale = match self.budget {
                Some(b) => b,
                None => self.objective(&z).max(1e-9),
            };
            nu / scale
        });
        let mut converged = false;
        // Best certified iterate so far; the last stage may have degraded.
        let mut best: Option<(f64, Vec<f64>, f64)> = None;
        loop {
            // Once the barrier term alone is accurate enough, center tightly
            // so the dual estimate is sharp.
            let tol = if nu / tau <= 0.5 * eps { 1e-10 } else { opts.centering_tol };
            let Centering::Done = self.center(&mut ws, &mut z, tau, tol, opts) else {
                break;
            };
            let gap = self.certified_gap(&z, &ws.dz, tau);
            if best.as_ref().map(|(g, _, _)| gap < *g).unwrap_or(true) {
                best = Some((gap, z.clone(), tau));
            }
            if gap <= eps {
                converged = true;
                break;
            }
            if nu / tau <= 1e-3 * eps {
                // Far past the point where the barrier limits accuracy.
                break;
            }
            if ws.iterations >= opts.max_newton_steps {
                break;
            }
            tau *= opts.barrier_growth;
        }

        let (gap, zf, tf) = best.unwrap_or((f64::INFINITY, z, tau));
        let mut trajectory: Vec<Vector> = (1..=self.free).map(|j| Vector::from(self.point(&zf, j))).collect();
        if let Some(x) = self.terminal {
            trajectory.push(Vector::from(x));
        }
        let value = match self.direction {
            Some(theta) => dot(theta, &trajectory[self.free - 1]),
            None => path_cost(self.start, &trajectory),
        };
        let res = SolveResult {
            status: if converged { SolveStatus::Optimal } else { SolveStatus::AccuracyNotReached },
            value,
            trajectory,
            achieved_gap: gap,
            iterations: ws.iterations,
        };
        (res, zf, tf)
    }
}

enum Centering {
    Done,
    Failed,
}

struct Workspace {
    h: BlockTridiag,
    g: Vec<f64>,
    dz: Vec<f64>,
    q: Vec<f64>,
    u: Vec<f64>,
    lam_idx: Vec<usize>,
    iterations: usize,
}

impl Workspace {
    fn new(chain: &Chain<'_>) -> Self {
        // The terminal leg's block holds only its length; it is padded to
        // full size with identity rows so all blocks are alike.
        let h = BlockTridiag::new(chain.d + 1, chain.legs());
        let n = h.dim();
        Workspace {
            h,
            g: vec![0.0; n],
            dz: vec![0.0; n],
            q: vec![0.0; n],
            u: vec![0.0; chain.d],
            lam_idx: (1..=chain.legs()).map(|k| chain.lambda_at(k)).collect(),
            iterations: 0,
        }
    }

    /// Solves the factored Newton system for `dz`. Returns the decrement
    /// `-g^T dz`, or `None` if the result is not a descent direction.
    fn direction(&mut self, gamma: f64) -> Option<f64> {
        self.dz.iter_mut().zip(&self.g).for_each(|(a, b)| *a = -b);
        self.h.solve(&mut self.dz);
        if gamma > 0.0 {
            self.q.iter_mut().for_each(|v| *v = 0.0);
            for &i in &self.lam_idx {
                self.q[i] = 1.0;
            }
            self.h.solve(&mut self.q);
            let eq: f64 = self.lam_idx.iter().map(|&i| self.q[i]).sum();
            let ev: f64 = self.lam_idx.iter().map(|&i| self.dz[i]).sum();
            // Sherman-Morrison for the rank-one budget term.
            let coef = gamma * ev / (1.0 + gamma * eq);
            self.dz.iter_mut().zip(&self.q).for_each(|(a, b)| *a -= coef * b);
        }
        let dec = -dot(&self.g, &self.dz);
        (dec.is_finite() && dec >= 0.0).then_some(dec)
    }
}

/// Smallest strictly positive root of `a x^2 + b x + c` with `c > 0`.
fn smallest_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    if a.abs() <= 1e-300 {
        return (b < 0.0).then(|| -c / b);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Numerically stable pair of roots.
    let qv = -0.5 * (b + b.signum() * sq);
    let r1 = qv / a;
    let r2 = if qv != 0.0 { c / qv } else { f64::INFINITY };
    [r1, r2].into_iter().filter(|r| *r > 0.0 && r.is_finite()).reduce(f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hs(a: &[f64], b: f64) -> HalfSpace {
        HalfSpace::new(a, b).unwrap()
    }

    fn problem(reqs: &[(&[f64], f64)]) -> TrajectoryProblem {
        TrajectoryProblem::from_origin(reqs.iter().map(|(a, b)| hs(a, *b)).collect()).unwrap()
    }

    #[test]
    fn single_halfspace_distance() {
        let p = problem(&[(&[1.0, 0.0], 1.0)]);
        let r = solve_min_movement(&p, 1e-6).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-6);
        assert!(r.achieved_gap <= 1e-6);
        assert!(p.requests()[0].contains(&r.trajectory[0]));
    }

    #[test]
    fn opposite_requests_in_one_dimension() {
        let p = problem(&[(&[1.0], 1.0), (&[-1.0], 0.0)]);
        let r = solve_min_movement(&p, 1e-6).unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn terminal_leg_returns_home() {
        let p = problem(&[(&[1.0], 1.0)]).with_terminal(Vector::from([0.0])).unwrap();
        let r = solve_min_movement(&p, 1e-6).unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-6);
        assert_eq!(r.trajectory.len(), 2);
    }

    #[test]
    fn start_already_feasible() {
        let p = problem(&[(&[1.0, 1.0], -1.0), (&[0.0, 1.0], -3.0)]);
        let r = solve_min_movement(&p, 1e-7).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(r.value <= 1e-7);
    }

    #[test]
    fn support_examples_in_one_dimension() {
        let base = problem(&[(&[1.0], 1.0)]);
        let up = SupportProblem::new(base.clone(), Vector::from([1.0]), 4.0).unwrap();
        let r = solve_support(&up, 1e-6).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(r.value, 4.0, epsilon = 1e-6);
        let down = SupportProblem::new(base, Vector::from([-1.0]), 4.0).unwrap();
        let r = solve_support(&down, 1e-6).unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn support_through_origin() {
        let base = problem(&[(&[1.0, 0.0], 0.0)]);
        let sp = SupportProblem::new(base, Vector::from([1.0, 0.0]), 2.0).unwrap();
        let r = solve_support(&sp, 1e-6).unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-6);
        let x = r.trajectory.last().unwrap();
        assert_abs_diff_eq!(x[0], r.value, epsilon = 1e-12);
    }

    #[test]
    fn support_below_minimum_is_infeasible() {
        let base = problem(&[(&[1.0], 3.0)]);
        let sp = SupportProblem::new(base, Vector::from([1.0]), 2.0).unwrap();
        let r = solve_support(&sp, 1e-6).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(matches!(r.into_optimal(1e-6), Err(Error::Infeasible(_))));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(TrajectoryProblem::from_origin(vec![]).is_err());
        let p = problem(&[(&[1.0], 1.0)]);
        assert!(solve_min_movement(&p, 0.0).is_err());
        assert!(SupportProblem::new(p.clone(), Vector::from([2.0]), 1.0).is_err());
        assert!(SupportProblem::new(p.clone(), Vector::from([1.0]), -1.0).is_err());
        assert!(TrajectoryProblem::new(Vector::zeros(2), vec![hs(&[1.0], 0.0)]).is_err());
    }

    #[test]
    fn iteration_cap_reports_accuracy_not_reached() {
        let p = problem(&[(&[1.0, 0.0], 1.0), (&[0.0, 1.0], 1.0)]);
        let opts = SolverOptions { max_newton_steps: 2, ..SolverOptions::default() };
        let r = solve_min_movement_with(&p, 1e-9, &opts).unwrap();
        assert_eq!(r.status, SolveStatus::AccuracyNotReached);
        assert!(matches!(r.into_optimal(1e-9), Err(Error::AccuracyNotReached { .. })));
    }

    #[test]
    fn quadratic_root_helper() {
        // (x - 1)(x - 3) = x^2 - 4x + 3
        assert_abs_diff_eq!(smallest_positive_root(1.0, -4.0, 3.0).unwrap(), 1.0, epsilon = 1e-14);
        assert!(smallest_positive_root(1.0, 4.0, 3.0).is_none());
        assert_abs_diff_eq!(smallest_positive_root(0.0, -2.0, 4.0).unwrap(), 2.0);
    }
}

