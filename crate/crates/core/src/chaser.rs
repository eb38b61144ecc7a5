//! Online chasing of half-space requests.
//!
//! [`ChaserState`] serves one request at a time with one of three rules:
//!
//! * [`ChaserState::step`]: the efficient Steiner chaser. It keeps a guess
//!   `r` of the offline optimum, estimates the Steiner point of
//!   `Omega_t = {w_t <= 2r}` by sampling and projects it onto the request.
//! * [`ChaserState::ideal_step_2d`]: plays the Steiner point of `Omega_t`
//!   itself, computed by planar quadrature.
//! * [`ChaserState::greedy_step`]: projects the current position.
//!
//! A run should use one rule throughout.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{sample_unit_sphere, HalfSpace, Vector};
use crate::steiner::{
    accuracy_for_samples, estimate_steiner_with, quadrature_steiner_2d, SteinerQuery, MIN_QUADRATURE_RESOLUTION,
};
use crate::trajectory::SolverOptions;
use crate::work_function::{default_eps, WorkFunctionOracle};

/// How the idealized chaser updates `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseRule {
    /// Double `r` while `Omega_t` is empty.
    Doubling,
    /// Reset `r` to the work-function minimum, as the efficient chaser does.
    Reset,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChaserConfig {
    /// Cap on the number of sampled directions per step. When the nominal
    /// accuracy `r / t^2` would need more, the step runs at the accuracy
    /// this many samples give.
    pub max_samples: usize,
    /// Multiplier on the per-step accuracy `r / t^2`.
    pub eps_scale: f64,
    /// Reuse one sequence of random directions for every step of the run
    /// instead of drawing fresh ones per step.
    pub common_directions: bool,
    /// Draw directions in antipodal pairs and center the estimate at the
    /// work-function minimizer.
    pub centered: bool,
    /// Angular grid size of the idealized chaser.
    pub quadrature_resolution: usize,
    /// Support accuracy of the idealized chaser, relative to `r`.
    pub ideal_support_eps: f64,
    pub phase_rule: PhaseRule,
    pub solver: SolverOptions,
}

impl Default for ChaserConfig {
    fn default() -> Self {
        ChaserConfig {
            max_samples: 64,
            eps_scale: 1.0,
            common_directions: true,
            centered: true,
            quadrature_resolution: MIN_QUADRATURE_RESOLUTION,
            ideal_support_eps: 1e-4,
            phase_rule: PhaseRule::Doubling,
            solver: SolverOptions::default(),
        }
    }
}

/// What one step did.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub position: Vector,
    /// Distance moved in this step.
    pub cost: f64,
    /// Current guess of the optimum; zero before the first violated request.
    pub r: f64,
    pub phase: usize,
    /// The step fell back to projecting the previous position.
    pub flagged: bool,
    /// Directions sampled by the Steiner estimate.
    pub samples: usize,
}

#[derive(Clone, Debug)]
pub struct ChaserState {
    config: ChaserConfig,
    seed: u64,
    rng: ChaCha8Rng,
    directions: Vec<Vector>,
    oracle: WorkFunctionOracle,
    position: Vector,
    r: Option<f64>,
    t: usize,
    phase: usize,
    cumulative_cost: f64,
}

impl ChaserState {
    /// Chaser at the origin of `R^d`.
    pub fn new(d: usize, seed: u64) -> Result<Self> {
        Self::with_config(d, seed, ChaserConfig::default())
    }

    pub fn with_config(d: usize, seed: u64, config: ChaserConfig) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if config.max_samples == 0 || !(config.eps_scale > 0.0) || !(config.ideal_support_eps > 0.0) {
            return Err(Error::invalid("chaser configuration must be positive"));
        }
        let oracle = WorkFunctionOracle::new(Vector::zeros(d)).with_options(config.solver.clone());
        Ok(ChaserState {
            config,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            directions: Vec::new(),
            oracle,
            position: Vector::zeros(d),
            r: None,
            t: 0,
            phase: 0,
            cumulative_cost: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.position.dim()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &ChaserConfig {
        &self.config
    }

    pub fn position(&self) -> &Vector {
        &self.position
    }

    /// `None` until a request excludes the start.
    pub fn r(&self) -> Option<f64> {
        self.r
    }

    /// Number of requests served.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn phase_index(&self) -> usize {
        self.phase
    }

    pub fn cumulative_cost(&self) -> f64 {
        self.cumulative_cost
    }

    pub fn history(&self) -> &[HalfSpace] {
        self.oracle.prefix()
    }

    pub fn oracle(&self) -> &WorkFunctionOracle {
        &self.oracle
    }

    /// Efficient Steiner chaser step.
    pub fn step(&mut self, k: HalfSpace) -> Result<StepOutcome> {
        let Some(r) = self.admit(&k)? else {
            return Ok(self.stay());
        };
        let d = self.dim();
        let eps_min = default_eps(2.0 * r).min(r / 100.0);
        let m = self.oracle.min_wf(eps_min)?;
        let r = if m > 1.5 * r - r / 100.0 {
            self.phase += 1;
            self.r = Some(m);
            m
        } else {
            r
        };

        let t = self.t as f64;
        let nominal = self.config.eps_scale * r / (t * t);
        let eps = nominal.max(accuracy_for_samples(d, 2.0 * r, self.config.max_samples, 1.0));
        let estimate = self.oracle.support_oracle(2.0 * r).and_then(|omega| {
            let mut q = SteinerQuery::new(2.0 * r, eps, 1.0)?.with_max_samples(self.config.max_samples);
            if self.config.centered {
                q = q.with_center(self.oracle.minimizer(eps_min)?);
            }
            if !self.config.common_directions {
                self.directions.clear();
            }
            let n = q.samples(d).min(q.max_samples as f64) as usize;
            while self.directions.len() < n {
                let th = sample_unit_sphere(d, &mut self.rng);
                if self.config.centered {
                    self.directions.push(th.scale(-1.0));
                }
                self.directions.push(th);
            }
            estimate_steiner_with(&omega, &q, &self.directions)
        });
        match estimate {
            Ok(est) => {
                let x = k.project(&est.point);
                Ok(self.moved_to(x, false, est.samples))
            }
            Err(e) if e.is_solver_failure() => {
                let x = k.project(&self.position);
                Ok(self.moved_to(x, true, 0))
            }
            Err(e) => Err(e),
        }
    }

    /// Projection of the current position onto the request.
    pub fn greedy_step(&mut self, k: HalfSpace) -> Result<StepOutcome> {
        self.record(&k)?;
        let x = k.project(&self.position);
        Ok(self.moved_to(x, false, 0))
    }

    /// Idealized chaser in the plane: plays the Steiner point of `Omega_t`.
    ///
    /// The point lies in the request up to the quadrature error; if it misses
    /// by more than `1e-3 r` the step projects the previous position instead
    /// and is flagged.
    pub fn ideal_step_2d(&mut self, k: HalfSpace) -> Result<StepOutcome> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.dim() });
        }
        let Some(mut r) = self.admit(&k)? else {
            return Ok(self.stay());
        };
        match self.config.phase_rule {
            PhaseRule::Doubling => loop {
                // A body whose minimum sits within 1e-3 r of the budget is
                // treated as empty: its support cannot be resolved.
                let m = self.oracle.min_wf(default_eps(2.0 * r).min(r / 100.0))?;
                if m < 2.0 * r - 1e-3 * r {
                    break;
                }
                r *= 2.0;
                self.phase += 1;
            },
            PhaseRule::Reset => {
                let m = self.oracle.min_wf(default_eps(2.0 * r).min(r / 100.0))?;
                if m > 1.5 * r - r / 100.0 {
                    r = m;
                    self.phase += 1;
                }
            }
        }
        self.r = Some(r);

        let eps = self.config.ideal_support_eps * r;
        let st = self
            .oracle
            .support_oracle(2.0 * r)
            .and_then(|omega| quadrature_steiner_2d(&omega, self.config.quadrature_resolution, eps));
        match st {
            Ok(x) if k.contains_with_tol(&x, 1e-3 * r) => Ok(self.moved_to(x, false, 0)),
            Ok(_) => {
                let x = k.project(&self.position);
                Ok(self.moved_to(x, true, 0))
            }
            Err(e) if e.is_solver_failure() => {
                let x = k.project(&self.position);
                Ok(self.moved_to(x, true, 0))
            }
            Err(e) => Err(e),
        }
    }

    fn record(&mut self, k: &HalfSpace) -> Result<()> {
        self.oracle = self.oracle.extend(k.clone())?;
        self.t += 1;
        Ok(())
    }

    /// Records the request and returns the current `r`, initializing it at
    /// the first request that excludes the start. `None` means the chaser is
    /// still waiting at the start.
    fn admit(&mut self, k: &HalfSpace) -> Result<Option<f64>> {
        self.record(k)?;
        if self.r.is_none() {
            let gap = k.distance(self.oracle.start());
            if gap > 0.0 {
                self.r = Some(gap);
            }
        }
        Ok(self.r)
    }

    fn stay(&self) -> StepOutcome {
        StepOutcome {
            position: self.position.clone(),
            cost: 0.0,
            r: self.r.unwrap_or(0.0),
            phase: self.phase,
            flagged: false,
            samples: 0,
        }
    }

    fn moved_to(&mut self, x: Vector, flagged: bool, samples: usize) -> StepOutcome {
        let cost = self.position.dist(&x);
        self.cumulative_cost += cost;
        self.position = x;
        StepOutcome { cost, flagged, samples, ..self.stay() }
    }
}
