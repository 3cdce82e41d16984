use serde::Serialize;

use crate::expr::Expr;

use super::eval::{eval, EvalContext};
use super::func::ConcreteFunc;
use super::oracle::{chain_diff_numeric, nth_diff_numeric};
use super::scheme::{ConvergenceReport, SequenceScheme};
use super::value::Value;
use super::NumericError;

/// Comparison of a symbolic differential against a numeric estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub order: usize,
    /// Numeric reference from nested central differences of the target.
    pub expected: Value,
    /// Evaluated symbolic differential.
    pub actual: Value,
    pub residual: f64,
    /// Effective bound `tol · (1 + |expected|)`.
    pub tolerance: f64,
    pub passed: bool,
    /// Multi-scheme convergence of the first-order difference quotient.
    pub converged: Option<bool>,
    pub schemes: Option<ConvergenceReport>,
}

/// Checks `symbolic` against `target` differentiated at point `point` along
/// the directions `dirs` (indices into `ctx.directions`).
///
/// At order 1 the chain-differential limit is also estimated along the
/// default schemes and must converge for the report to pass.
pub fn verify(
    symbolic: &Expr,
    target: &ConcreteFunc,
    ctx: &EvalContext,
    point: &str,
    dirs: &[u32],
    tol: f64,
) -> Result<VerificationReport, NumericError> {
    let x = ctx
        .points
        .get(point)
        .ok_or_else(|| NumericError::UnboundPoint(point.to_string()))?;
    let etas = dirs
        .iter()
        .map(|i| ctx.directions.get(i).cloned().ok_or(NumericError::UnboundDirection(*i)))
        .collect::<Result<Vec<_>, _>>()?;
    let order = etas.len();
    let expected = nth_diff_numeric(target, x, &etas, order)?;
    let actual = eval(symbolic, ctx)?;
    let residual = actual.distance(&expected)?;
    let tolerance = tol * (1.0 + expected.norm());
    let schemes = if order == 1 {
        Some(chain_diff_numeric(target, x, &etas[0], &SequenceScheme::defaults())?.with_tolerance(tol))
    } else {
        None
    };
    let converged = schemes.as_ref().map(|r| r.converged);
    Ok(VerificationReport {
        order,
        passed: residual <= tolerance && converged.unwrap_or(true),
        expected,
        actual,
        residual,
        tolerance,
        converged,
        schemes,
    })
}
