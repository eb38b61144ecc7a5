//! Batches of runs described by a TOML file.
//!
//! ```toml
//! [[group]]
//! kind = "random"          # random | rotating | nested
//! d = [1, 2, 3]
//! T = [20, 50]
//! instances = 30
//! seed = 0                 # instance i uses seed + i, for generation and the chaser
//! algorithms = ["steiner", "greedy"]
//! violation_prob = 0.5     # random only
//! step_angle = 0.2513      # rotating only
//! offset = 1.0             # rotating only
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{HarnessError, Result};
use crate::generate::{gen_nested, gen_random, gen_rotating};
use crate::instance::Instance;
use crate::runner::{run, Algorithm, RunConfig, RunReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Random,
    Rotating,
    Nested,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Group {
    pub kind: Kind,
    pub d: Vec<usize>,
    #[serde(rename = "T")]
    pub t: Vec<usize>,
    #[serde(default = "one")]
    pub instances: usize,
    #[serde(default)]
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "half")]
    pub violation_prob: f64,
    #[serde(default = "default_step")]
    pub step_angle: f64,
    #[serde(default = "unit")]
    pub offset: f64,
    pub max_samples: Option<usize>,
    pub eps_scale: Option<f64>,
}

fn one() -> usize {
    1
}

fn half() -> f64 {
    0.5
}

fn unit() -> f64 {
    1.0
}

fn default_step() -> f64 {
    std::f64::consts::TAU / 25.0
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub group: Vec<Group>,
}

impl SuiteConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

impl Group {
    pub fn instance(&self, d: usize, t: usize, i: usize) -> Result<Instance> {
        let seed = self.seed + i as u64;
        match self.kind {
            Kind::Random => gen_random(d, t, seed, self.violation_prob),
            Kind::Nested => gen_nested(d, t, seed),
            Kind::Rotating if d == 2 => gen_rotating(t, self.step_angle, self.offset),
            Kind::Rotating => Err(HarnessError::Invalid(format!("rotating instances are planar, got d = {d}"))),
        }
    }

    pub fn run_config(&self, algorithm: Algorithm, i: usize) -> RunConfig {
        let mut cfg = RunConfig::new(algorithm, self.seed + i as u64);
        if let Some(n) = self.max_samples {
            cfg.chaser.max_samples = n;
        }
        if let Some(s) = self.eps_scale {
            cfg.chaser.eps_scale = s;
        }
        cfg
    }
}

/// `min(d, sqrt(d ln T))`, the shape of the competitive bound.
pub fn ratio_scale(d: usize, t: usize) -> f64 {
    let d = d as f64;
    d.min((d * (t as f64).ln()).sqrt())
}

/// Aggregate over the runs of one (kind, d, T, algorithm) cell. Runs with
/// flagged or aborted steps are counted but left out of the ratios.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteRow {
    pub kind: Kind,
    pub d: usize,
    pub t: usize,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub excluded: usize,
    pub mean_ratio: f64,
    pub max_ratio: f64,
    /// `max_ratio / ratio_scale(d, T)`.
    pub constant: f64,
}

pub fn summarize(kind: Kind, d: usize, t: usize, algorithm: Algorithm, reports: &[RunReport]) -> SuiteRow {
    let ratios: Vec<f64> = reports
        .iter()
        .filter(|r| r.aborted.is_none() && r.flagged_steps().is_empty())
        .filter_map(RunReport::ratio)
        .collect();
    let max_ratio = ratios.iter().cloned().fold(f64::NAN, f64::max);
    SuiteRow {
        kind,
        d,
        t,
        algorithm,
        runs: reports.len(),
        excluded: reports.len() - ratios.len(),
        mean_ratio: ratios.iter().sum::<f64>() / ratios.len() as f64,
        max_ratio,
        constant: max_ratio / ratio_scale(d, t),
    }
}

/// Runs every cell of the suite. `progress` sees each finished run.
pub fn run_suite(cfg: &SuiteConfig, mut progress: impl FnMut(&RunReport)) -> Result<Vec<SuiteRow>> {
    let mut rows = Vec::new();
    for g in &cfg.group {
        for &d in &g.d {
            for &t in &g.t {
                let instances = (0..g.instances).map(|i| g.instance(d, t, i)).collect::<Result<Vec<_>>>()?;
                for &alg in &g.algorithms {
                    let mut reports = Vec::with_capacity(instances.len());
                    for (i, inst) in instances.iter().enumerate() {
                        let rep = run(inst, &g.run_config(alg, i))?;
                        progress(&rep);
                        reports.push(rep);
                    }
                    rows.push(summarize(g.kind, d, t, alg, &reports));
                }
            }
        }
    }
    Ok(rows)
}

pub fn format_table(rows: &[SuiteRow]) -> String {
    let mut s = format!(
        "{:<9} {:>3} {:>5} {:<8} {:>5} {:>5} {:>10} {:>10} {:>8}\n",
        "kind", "d", "T", "algo", "runs", "excl", "mean", "max", "C"
    );
    for r in rows {
        writeln!(
            s,
            "{:<9} {:>3} {:>5} {:<8} {:>5} {:>5} {:>10.4} {:>10.4} {:>8.4}",
            format!("{:?}", r.kind).to_lowercase(),
            r.d,
            r.t,
            r.algorithm,
            r.runs,
            r.excluded,
            r.mean_ratio,
            r.max_ratio,
            r.constant
        )
        .unwrap();
    }
    s
}
