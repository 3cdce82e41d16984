//! Concrete spaces, executable functions, and numeric verification.

pub mod eval;
pub mod fixtures;
pub mod func;
pub mod oracle;
pub mod scheme;
pub mod value;
pub mod verify;

use thiserror::Error;

use crate::expr::ExprError;

pub use eval::{compile, compile_value, eval, eval_function, EvalContext};
pub use func::ConcreteFunc;
pub use oracle::{
    chain_diff_numeric, gateaux_numeric, nth_diff_numeric, nth_partial_diff_numeric,
    partial_diff_numeric, total_diff_numeric, DEFAULT_REL_TOL,
};
pub use scheme::{
    ConvergenceReport, EtaPerturbation, Extrapolation, SchemeEstimate, SequenceScheme,
    ThetaSequence,
};
pub use value::{Space, Value};
pub use verify::{verify, VerificationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("no concrete function bound to `{0}`")]
    UnboundSymbol(String),
    #[error("no value bound to point `{0}`")]
    UnboundPoint(String),
    #[error("no value bound to direction e{0}")]
    UnboundDirection(u32),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("`{0}` has no exact differential and numeric fallback is disabled")]
    MissingDifferential(String),
    #[error("numeric differentials of order {0} are not supported (max 4)")]
    UnsupportedOrder(usize),
    #[error("slot {slot} out of range for `{name}` of arity {arity}")]
    SlotOutOfRange { name: String, slot: usize, arity: usize },
    #[error("insufficient schemes: {0}")]
    InsufficientSchemes(String),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("cannot evaluate: {0}")]
    NotEvaluable(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}
