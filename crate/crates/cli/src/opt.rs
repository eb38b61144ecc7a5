//! Offline optimum of an instance.

use chase_core::{Error, Vector, WorkFunctionOracle};

use crate::error::Result;
use crate::instance::Instance;

/// Offline optimum and the accuracy it was computed to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptValue {
    pub value: f64,
    pub eps: f64,
}

/// `min_x w_T(x)` to within `eps`.
pub fn compute_opt(inst: &Instance, eps: f64) -> Result<f64> {
    let oracle = WorkFunctionOracle::with_prefix(Vector::zeros(inst.d), inst.halfspaces()?)?;
    Ok(oracle.min_wf(eps)?)
}

/// Like [`compute_opt`], loosening the accuracy tenfold (up to three times)
/// when the solver cannot certify the requested one.
pub fn compute_opt_robust(inst: &Instance, eps: f64) -> Result<OptValue> {
    let mut eps = eps;
    for attempt in 0..4 {
        match compute_opt(inst, eps) {
            Ok(value) => return Ok(OptValue { value, eps }),
            Err(crate::HarnessError::Solver(Error::AccuracyNotReached { .. })) if attempt < 3 => eps *= 10.0,
            Err(e) => return Err(e),
        }
    }
    unreachable!("the last attempt returns")
}
