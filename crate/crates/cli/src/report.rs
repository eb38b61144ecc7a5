//! CSV output of a run.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::runner::RunReport;

/// Column names: `t, x_1..x_d, move_cost, cum_cost, r, phase, flagged`.
pub fn header(d: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=d).map(|j| format!("x_{j}")));
    h.extend(["move_cost", "cum_cost", "r", "phase", "flagged"].map(String::from));
    h
}

/// One row per step after the header. Floats use the shortest form that
/// parses back to the same value.
pub fn write_report<W: Write>(report: &RunReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(report.d))?;
    for s in &report.steps {
        let mut row = vec![s.t.to_string()];
        row.extend(s.position.iter().map(|c| c.to_string()));
        row.extend([
            s.move_cost.to_string(),
            s.cum_cost.to_string(),
            s.r.to_string(),
            s.phase.to_string(),
            u8::from(s.flagged).to_string(),
        ]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_report(report: &RunReport, path: &Path) -> Result<()> {
    write_report(report, std::fs::File::create(path)?)
}

/// Human-readable summary printed by the CLI.
pub fn summary(report: &RunReport) -> String {
    let mut s = format!(
        "{} on {:?}: ALG = {:.6}, steps = {}, phases = {}, flagged = {}",
        report.algorithm,
        report.label,
        report.total,
        report.steps.len(),
        report.steps.last().map_or(0, |s| s.phase),
        report.flagged_steps().len()
    );
    if let (Some(opt), Some(ratio)) = (report.opt, report.ratio()) {
        s.push_str(&format!(", OPT = {:.6} (eps {:.1e}), ratio = {:.4}", opt.value, opt.eps, ratio));
    }
    if let Some(e) = &report.aborted {
        s.push_str(&format!(", aborted: {e}"));
    }
    s
}
