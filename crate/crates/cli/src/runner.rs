//! Plays an algorithm against an instance and records the run.

use std::fmt;
use std::str::FromStr;

use chase_core::{ChaserConfig, ChaserState, HalfSpace, Vector};

use crate::error::{HarnessError, Result};
use crate::instance::Instance;
use crate::opt::{compute_opt_robust, OptValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Steiner,
    Greedy,
    Ideal2d,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Steiner => "steiner",
            Algorithm::Greedy => "greedy",
            Algorithm::Ideal2d => "ideal2d",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "steiner" => Ok(Algorithm::Steiner),
            "greedy" => Ok(Algorithm::Greedy),
            "ideal2d" => Ok(Algorithm::Ideal2d),
            other => Err(HarnessError::Invalid(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Hands out requests one at a time. Asking for the next request before
/// answering the current one is an error, so an algorithm driven through
/// the feed cannot look ahead.
pub struct OnlineFeed<'a> {
    requests: &'a [HalfSpace],
    released: usize,
    answered: usize,
}

impl<'a> OnlineFeed<'a> {
    pub fn new(requests: &'a [HalfSpace]) -> Self {
        OnlineFeed { requests, released: 0, answered: 0 }
    }

    /// The next request, or `None` once all have been served.
    pub fn next_request(&mut self) -> Result<Option<&'a HalfSpace>> {
        if self.released > self.answered {
            return Err(HarnessError::Invalid(format!(
                "request {} read before position {} was emitted",
                self.released + 1,
                self.released
            )));
        }
        let k = self.requests.get(self.released);
        if k.is_some() {
            self.released += 1;
        }
        Ok(k)
    }

    /// Records the position emitted for the current request.
    pub fn answer(&mut self, _position: &Vector) -> Result<()> {
        if self.answered >= self.released {
            return Err(HarnessError::Invalid("answer without an outstanding request".into()));
        }
        self.answered += 1;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    /// 1-based step index.
    pub t: usize,
    pub position: Vector,
    pub move_cost: f64,
    pub cum_cost: f64,
    pub r: f64,
    pub phase: usize,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub algorithm: Algorithm,
    pub label: String,
    pub d: usize,
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    pub total: f64,
    /// `None` when the run aborted before the optimum was computed.
    pub opt: Option<OptValue>,
    /// The solver error that ended the run early, if any.
    pub aborted: Option<chase_core::Error>,
}

impl RunReport {
    /// ALG / OPT. One when both are zero, infinite when only OPT is.
    pub fn ratio(&self) -> Option<f64> {
        let opt = self.opt?;
        Some(if opt.value > opt.eps {
            self.total / opt.value
        } else if self.total <= opt.eps {
            1.0
        } else {
            f64::INFINITY
        })
    }

    /// Steps at which a new phase began.
    pub fn phase_boundaries(&self) -> Vec<usize> {
        self.steps.windows(2).filter(|w| w[1].phase > w[0].phase).map(|w| w[1].t).collect()
    }

    pub fn flagged_steps(&self) -> Vec<usize> {
        self.steps.iter().filter(|s| s.flagged).map(|s| s.t).collect()
    }

    pub fn final_r(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.r)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub chaser: ChaserConfig,
    /// Skip the offline optimum.
    pub skip_opt: bool,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        RunConfig { algorithm, seed, chaser: ChaserConfig::default(), skip_opt: false }
    }

    pub fn with_eps_scale(mut self, eps_scale: f64) -> Self {
        self.chaser.eps_scale = eps_scale;
        self
    }
}

/// Streams the instance through the algorithm, then computes the optimum to
/// `1e-6 * max(1, r_final)`. A solver error the chaser cannot absorb ends
/// the run and is recorded in `aborted`, keeping the steps served so far.
pub fn run(inst: &Instance, cfg: &RunConfig) -> Result<RunReport> {
    if cfg.algorithm == Algorithm::Ideal2d && inst.d != 2 {
        return Err(HarnessError::Invalid(format!("ideal2d needs d = 2, instance has d = {}", inst.d)));
    }
    let requests = inst.halfspaces()?;
    let mut chaser = ChaserState::with_config(inst.d, cfg.seed, cfg.chaser.clone())?;
    let mut feed = OnlineFeed::new(&requests);
    let mut steps = Vec::with_capacity(requests.len());
    let mut aborted = None;
    while let Some(k) = feed.next_request()? {
        let served = match cfg.algorithm {
            Algorithm::Steiner => chaser.step(k.clone()),
            Algorithm::Greedy => chaser.greedy_step(k.clone()),
            Algorithm::Ideal2d => chaser.ideal_step_2d(k.clone()),
        };
        let out = match served {
            Ok(out) => out,
            Err(e) if e.is_solver_failure() => {
                aborted = Some(e);
                break;
            }
            Err(e) => return Err(e.into()),
        };
        feed.answer(&out.position)?;
        steps.push(StepRecord {
            t: chaser.t(),
            move_cost: out.cost,
            cum_cost: chaser.cumulative_cost(),
            position: out.position,
            r: out.r,
            phase: out.phase,
            flagged: out.flagged,
        });
    }
    let mut report = RunReport {
        algorithm: cfg.algorithm,
        label: inst.label.clone(),
        d: inst.d,
        seed: cfg.seed,
        total: chaser.cumulative_cost(),
        steps,
        opt: None,
        aborted,
    };
    if !cfg.skip_opt && report.aborted.is_none() {
        let eps = 1e-6 * report.final_r().max(1.0);
        report.opt = Some(compute_opt_robust(inst, eps)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feed_blocks_lookahead() {
        let reqs = vec![HalfSpace::new(&[1.0], 1.0).unwrap(), HalfSpace::new(&[1.0], 2.0).unwrap()];
        let mut feed = OnlineFeed::new(&reqs);
        assert!(feed.next_request().unwrap().is_some());
        assert!(feed.next_request().is_err());
        feed.answer(&Vector::from([1.0])).unwrap();
        assert!(feed.answer(&Vector::from([1.0])).is_err());
        assert!(feed.next_request().unwrap().is_some());
        feed.answer(&Vector::from([2.0])).unwrap();
        assert!(feed.next_request().unwrap().is_none());
    }

    #[test]
    fn algorithm_names() {
        for a in [Algorithm::Steiner, Algorithm::Greedy, Algorithm::Ideal2d] {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("best".parse::<Algorithm>().is_err());
    }
}
