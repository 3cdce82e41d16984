//! Symbolic n-th order chain differentials of functionals, with a
//! sequence-based numeric oracle for checking them on concrete spaces.

pub mod bindings;
pub mod canon;
pub mod cli;
pub mod combinatorics;
pub mod diff;
pub mod dsl;
pub mod expr;
pub mod numeric;
pub mod serialize;

pub use canon::{canonicalize, sort_of, structural_equal, Sort};
pub use diff::{
    chain_diff, faa_di_bruno, leibniz, nth_chain_diff, total_diff, DiffError, Rule, RuleTrace,
};
pub use expr::{DiffTerm, Expr, ExprError, Scalar, SlotDirection};
