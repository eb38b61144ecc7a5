//! Experiment harness for the chase library: instance files and
//! generators, offline optima, runs with CSV reports, and suites of runs.

mod error;
pub mod generate;
pub mod instance;
pub mod opt;
pub mod report;
pub mod runner;
pub mod suite;

pub use error::{HarnessError, Result};
pub use generate::{gen_nested, gen_random, gen_rotating};
pub use instance::Instance;
pub use opt::{compute_opt, compute_opt_robust, OptValue};
pub use report::{emit_report, write_report};
pub use runner::{run, Algorithm, OnlineFeed, RunConfig, RunReport, StepRecord};
pub use suite::{run_suite, SuiteConfig};
