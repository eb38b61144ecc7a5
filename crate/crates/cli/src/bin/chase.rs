use std::path::PathBuf;
use std::process::ExitCode;

use chase_cli::report::summary;
use chase_cli::suite::format_table;
use chase_cli::{
    compute_opt_robust, emit_report, gen_nested, gen_random, gen_rotating, run, run_suite, Algorithm, Instance,
    Result, RunConfig, SuiteConfig,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "chase", version, about = "Online chasing of half-space requests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Random,
    Rotating,
    Nested,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Steiner,
    Greedy,
    Ideal2d,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Steiner => Algorithm::Steiner,
            AlgoArg::Greedy => Algorithm::Greedy,
            AlgoArg::Ideal2d => Algorithm::Ideal2d,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "T")]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Random instances: chance that a request excludes the greedy position.
        #[arg(long, default_value_t = 0.5)]
        violation_prob: f64,
        /// Rotating instances: angle between consecutive normals.
        #[arg(long, default_value_t = std::f64::consts::TAU / 25.0)]
        step_angle: f64,
        /// Rotating instances: offset of every half-plane.
        #[arg(long, default_value_t = 1.0)]
        offset: f64,
    },
    /// Run an algorithm on an instance and write the per-step report.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "steiner")]
        algo: AlgoArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: PathBuf,
        /// Multiplier on the per-step Steiner accuracy.
        #[arg(long, default_value_t = 1.0)]
        eps_scale: f64,
        /// Cap on sampled directions per step.
        #[arg(long)]
        max_samples: Option<usize>,
    },
    /// Print the offline optimum of an instance.
    Opt {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
    },
    /// Run a batch described by a TOML file and print the ratio table.
    Suite {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Gen { kind, d, t, seed, out, violation_prob, step_angle, offset } => {
            let inst = match kind {
                GenKind::Random => gen_random(d, t, seed, violation_prob)?,
                GenKind::Rotating => gen_rotating(t, step_angle, offset)?,
                GenKind::Nested => gen_nested(d, t, seed)?,
            };
            inst.save(&out)?;
            println!("wrote {} requests to {}", inst.len(), out.display());
        }
        Command::Run { instance, algo, seed, report, eps_scale, max_samples } => {
            let inst = Instance::load(&instance)?;
            let mut cfg = RunConfig::new(algo.into(), seed).with_eps_scale(eps_scale);
            if let Some(n) = max_samples {
                cfg.chaser.max_samples = n;
            }
            let rep = run(&inst, &cfg)?;
            emit_report(&rep, &report)?;
            println!("{}", summary(&rep));
            if let Some(e) = rep.aborted {
                return Err(e.into());
            }
        }
        Command::Opt { instance, eps } => {
            let inst = Instance::load(&instance)?;
            let opt = compute_opt_robust(&inst, eps)?;
            println!("{} (eps {:e})", opt.value, opt.eps);
        }
        Command::Suite { config } => {
            let cfg = SuiteConfig::load(&config)?;
            let rows = run_suite(&cfg, |rep| {
                eprintln!("  {} {:?} seed {}: ratio {:?}", rep.algorithm, rep.label, rep.seed, rep.ratio());
            })?;
            print!("{}", format_table(&rows));
        }
    }
    Ok(())
}
