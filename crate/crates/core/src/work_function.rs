//! The work function of a request prefix and its sublevel bodies.
//!
//! `w_t(x)` is the cheapest way to serve requests `1..t` from the start point
//! and end at `x`. The body `Omega = {x : w_t(x) <= budget}` is never built
//! explicitly; it is accessed through support queries and membership tests.

use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::geometry::{check_dim, dot, HalfSpace, Vector};
use crate::trajectory::{
    solve_min_movement_with, solve_support_from, SolveResult, SolverOptions, SupportProblem, SupportSession,
    TrajectoryProblem,
};

/// Default query accuracy for a body of the given budget.
pub fn default_eps(budget: f64) -> f64 {
    1e-6 * budget.abs().max(1.0)
}

/// A support-function oracle `h_K(theta)` answered to accuracy `eps`.
pub trait SupportFunction {
    fn dim(&self) -> usize;

    /// `theta` is a unit vector.
    fn support(&self, theta: &[f64], eps: f64) -> Result<f64>;

    /// Support values along closely spaced directions, such as an angular
    /// grid. Implementations may reuse work from one direction to the next.
    fn support_sweep(&self, thetas: &[Vector], eps: f64) -> Result<Vec<f64>> {
        thetas.iter().map(|t| self.support(t, eps)).collect()
    }
}

/// Exact support function given as a closure.
pub struct FnSupport<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64> FnSupport<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnSupport { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64> SupportFunction for FnSupport<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn support(&self, theta: &[f64], _eps: f64) -> Result<f64> {
        Ok((self.f)(theta))
    }
}

/// Immutable snapshot of a request prefix.
#[derive(Debug)]
pub struct WorkFunctionOracle {
    start: Vector,
    prefix: Vec<HalfSpace>,
    opts: SolverOptions,
    best: Mutex<Option<SolveResult>>,
}

impl Clone for WorkFunctionOracle {
    fn clone(&self) -> Self {
        WorkFunctionOracle {
            start: self.start.clone(),
            prefix: self.prefix.clone(),
            opts: self.opts.clone(),
            best: Mutex::new(self.best.lock().expect("cache lock").clone()),
        }
    }
}

impl WorkFunctionOracle {
    /// Oracle with an empty prefix: `w_0(x) = |x - start|`.
    pub fn new(start: Vector) -> Self {
        WorkFunctionOracle { start, prefix: Vec::new(), opts: SolverOptions::default(), best: Mutex::new(None) }
    }

    pub fn with_prefix(start: Vector, prefix: Vec<HalfSpace>) -> Result<Self> {
        for k in &prefix {
            check_dim(start.dim(), k.dim())?;
        }
        Ok(WorkFunctionOracle { prefix, ..Self::new(start) })
    }

    pub fn with_options(mut self, opts: SolverOptions) -> Self {
        self.opts = opts;
        self
    }

    /// New oracle for the prefix followed by `k`.
    pub fn extend(&self, k: HalfSpace) -> Result<Self> {
        check_dim(self.dim(), k.dim())?;
        let mut prefix = self.prefix.clone();
        prefix.push(k);
        Ok(WorkFunctionOracle {
            start: self.start.clone(),
            prefix,
            opts: self.opts.clone(),
            best: Mutex::new(None),
        })
    }

    pub fn dim(&self) -> usize {
        self.start.dim()
    }

    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }

    pub fn start(&self) -> &Vector {
        &self.start
    }

    pub fn prefix(&self) -> &[HalfSpace] {
        &self.prefix
    }

    fn problem(&self) -> Result<TrajectoryProblem> {
        TrajectoryProblem::new(self.start.clone(), self.prefix.clone())
    }

    /// `w_t(x)` to within `eps`.
    pub fn eval_wf(&self, x: &[f64], eps: f64) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        if self.prefix.is_empty() {
            return Ok(self.start.dist(x));
        }
        let p = self.problem()?.with_terminal(Vector::from(x))?;
        Ok(solve_min_movement_with(&p, eps, &self.opts)?.into_optimal(eps)?.value)
    }

    /// Optimal offline trajectory of the prefix, to within `eps` in cost.
    /// Cached across calls.
    pub fn min_movement(&self, eps: f64) -> Result<SolveResult> {
        if self.prefix.is_empty() {
            return Err(Error::invalid("minimum movement of an empty prefix"));
        }
        let mut cache = self.best.lock().expect("cache lock");
        if let Some(best) = cache.as_ref() {
            if best.achieved_gap <= eps {
                return Ok(best.clone());
            }
        }
        let res = solve_min_movement_with(&self.problem()?, eps, &self.opts)?.into_optimal(eps)?;
        *cache = Some(res.clone());
        Ok(res)
    }

    /// `min_x w_t(x)` to within `eps`; zero for the empty prefix.
    pub fn min_wf(&self, eps: f64) -> Result<f64> {
        if self.prefix.is_empty() {
            return Ok(0.0);
        }
        Ok(self.min_movement(eps)?.value)
    }

    /// A point whose work function is within `eps` of the minimum.
    pub fn minimizer(&self, eps: f64) -> Result<Vector> {
        if self.prefix.is_empty() {
            return Ok(self.start.clone());
        }
        let res = self.min_movement(eps)?;
        Ok(res.trajectory.last().expect("nonempty trajectory").clone())
    }

    /// `h_Omega(theta)` to within `eps` for `Omega = {w_t <= budget}`.
    pub fn supp_omega(&self, theta: &[f64], budget: f64, eps: f64) -> Result<f64> {
        check_dim(self.dim(), theta.len())?;
        if self.prefix.is_empty() {
            return Ok(dot(theta, &self.start) + budget);
        }
        let base = self.min_movement(default_eps(budget).min(eps))?;
        let sp = SupportProblem::new(self.problem()?, Vector::from(theta), budget)?;
        Ok(solve_support_from(&sp, &base.trajectory, eps, &self.opts)?.into_optimal(eps)?.value)
    }

    /// Whether `w_t(x) <= budget + eps`, with `w_t(x)` evaluated to `eps`.
    pub fn omega_contains(&self, x: &[f64], budget: f64, eps: f64) -> Result<bool> {
        Ok(self.eval_wf(x, eps)? <= budget + eps)
    }

    /// Support oracle of `{w_t <= budget}` for repeated queries.
    ///
    /// Fails with `Error::Infeasible` if the body has no interior point.
    pub fn support_oracle(&self, budget: f64) -> Result<OmegaSupport> {
        if !(budget > 0.0) || !budget.is_finite() {
            return Err(Error::invalid(format!("budget must be positive and finite, got {budget}")));
        }
        if self.prefix.is_empty() {
            return Ok(OmegaSupport::Ball { center: self.start.clone(), radius: budget });
        }
        let base = self.min_movement(default_eps(budget))?;
        let session = SupportSession::new(&self.problem()?, budget, &base.trajectory, &self.opts)?;
        Ok(OmegaSupport::Session(session))
    }
}

/// Support oracle of one sublevel body.
#[derive(Clone, Debug)]
pub enum OmegaSupport {
    /// Empty prefix: the body is a ball around the start.
    Ball { center: Vector, radius: f64 },
    Session(SupportSession),
}

impl SupportFunction for OmegaSupport {
    fn dim(&self) -> usize {
        match self {
            OmegaSupport::Ball { center, .. } => center.dim(),
            OmegaSupport::Session(s) => s.dim(),
        }
    }

    fn support(&self, theta: &[f64], eps: f64) -> Result<f64> {
        match self {
            OmegaSupport::Ball { center, radius } => Ok(dot(theta, center) + radius),
            OmegaSupport::Session(s) => Ok(s.solve(theta, eps)?.into_optimal(eps)?.value),
        }
    }

    fn support_sweep(&self, thetas: &[Vector], eps: f64) -> Result<Vec<f64>> {
        match self {
            OmegaSupport::Ball { .. } => thetas.iter().map(|t| self.support(t, eps)).collect(),
            OmegaSupport::Session(s) => {
                s.solve_sweep(thetas, eps)?.into_iter().map(|r| Ok(r.into_optimal(eps)?.value)).collect()
            }
        }
    }
}
