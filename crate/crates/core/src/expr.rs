//! Immutable expression IR for functionals and their chain differentials.
//!
//! An [`Expr`] is either *function-sorted* (an abstract symbol `f`, a linear
//! functional, `pow[k]`, `exp`, a composition, or a pointwise sum/product of
//! those) or *value-sorted* (a point variable, a direction, an application,
//! a differential term, or a sum/product of values). Scalars are neutral and
//! may appear on either side. [`crate::canon::sort_of`] enforces the split.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Structural errors raised while validating or normalizing an expression.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("sort mismatch in {context}: cannot mix function-valued and point-valued operands")]
    SortMismatch { context: &'static str },
    #[error("arity mismatch for `{name}`: expected {expected} argument(s), found {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("function symbol `{0}` must have arity >= 1")]
    ZeroArity(String),
    #[error("power exponent must be a positive integer")]
    InvalidPower,
    #[error("direction index must be positive")]
    ZeroDirectionIndex,
    #[error("differential target must be an abstract function symbol, found {0}")]
    InvalidDiffTarget(String),
    #[error("slot {slot} out of range for `{name}` of arity {arity}")]
    SlotOutOfRange {
        name: String,
        slot: usize,
        arity: usize,
    },
    #[error("direction e{0} appears more than once in one differential")]
    RepeatedDirection(u32),
    #[error("expected a {expected}, found {found}")]
    UnexpectedSort {
        expected: &'static str,
        found: &'static str,
    },
}

/// A scalar constant: exact rational when built from integers, float otherwise.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

impl Scalar {
    pub fn int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn float(v: f64) -> Self {
        // -0.0 and 0.0 are the same constant
        Scalar::Float(if v == 0.0 { 0.0 } else { v })
    }

    pub fn zero() -> Self {
        Scalar::int(0)
    }

    pub fn one() -> Self {
        Scalar::int(1)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(f) => *f == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_one(),
            Scalar::Float(f) => *f == 1.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_negative(),
            Scalar::Float(f) => *f < 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(f) => *f,
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            _ => Scalar::float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            _ => Scalar::float(self.to_f64() * other.to_f64()),
        }
    }

    pub fn pow(&self, k: u32) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(num_traits::pow(r.clone(), k as usize)),
            Scalar::Float(f) => Scalar::float(f.powi(k as i32)),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Scalar::Exact(_) => 0,
            Scalar::Float(_) => 1,
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            (Scalar::Float(a), Scalar::Float(b)) => a.total_cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Scalar::Exact(r) => {
                0u8.hash(state);
                r.hash(state);
            }
            Scalar::Float(f) => {
                1u8.hash(state);
                f.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Scalar::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            // Debug formatting keeps a '.' or exponent so the literal re-parses as a float
            Scalar::Float(v) => write!(f, "{v:?}"),
        }
    }
}

/// One direction of a differential term together with the argument slot it
/// perturbs (1-based). Univariate targets always use slot 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotDirection {
    pub slot: usize,
    pub direction: Expr,
}

impl SlotDirection {
    pub fn new(slot: usize, direction: Expr) -> Self {
        SlotDirection { slot, direction }
    }
}

/// `δ^k f(base; d_1, …, d_k)`, possibly with per-direction argument slots for
/// multivariate targets (mixed partial chain differentials).
///
/// The order is the number of directions, so `order == directions.len()` holds
/// by construction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiffTerm {
    pub target: Box<Expr>,
    pub base: Vec<Expr>,
    pub directions: Vec<SlotDirection>,
}

impl DiffTerm {
    pub fn order(&self) -> usize {
        self.directions.len()
    }

    /// Arity of the differentiated function, i.e. the length of the base tuple.
    pub fn arity(&self) -> usize {
        self.base.len()
    }
}

/// Expression tree for functionals.
///
/// Variant order matters: the derived `Ord` is the total structural order used
/// by canonicalization, and scalars sort first so coefficients lead products.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Scalar(Scalar),
    Point(String),
    Direction(u32),
    Func { name: String, arity: usize },
    Linear(String),
    Power(u32),
    Exp,
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Compose(Box<Expr>, Box<Expr>),
    Apply(Box<Expr>, Vec<Expr>),
    Diff(DiffTerm),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Scalar(Scalar::int(n))
    }

    pub fn float(v: f64) -> Expr {
        Expr::Scalar(Scalar::float(v))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn point(name: impl Into<String>) -> Expr {
        Expr::Point(name.into())
    }

    pub fn dir(index: u32) -> Expr {
        Expr::Direction(index)
    }

    /// Abstract univariate function symbol.
    pub fn func(name: impl Into<String>) -> Expr {
        Expr::Func {
            name: name.into(),
            arity: 1,
        }
    }

    pub fn func_n(name: impl Into<String>, arity: usize) -> Expr {
        Expr::Func {
            name: name.into(),
            arity,
        }
    }

    pub fn linear(name: impl Into<String>) -> Expr {
        Expr::Linear(name.into())
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        Expr::Sum(terms)
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        Expr::Product(factors)
    }

    pub fn compose(outer: Expr, inner: Expr) -> Expr {
        Expr::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn apply(func: Expr, args: Vec<Expr>) -> Expr {
        Expr::Apply(Box::new(func), args)
    }

    /// `func(arg)` for a single argument.
    pub fn call(func: Expr, arg: Expr) -> Expr {
        Expr::Apply(Box::new(func), vec![arg])
    }

    /// Univariate differential `δ^k target(base; dirs…)`.
    pub fn diff(target: Expr, base: Expr, directions: Vec<Expr>) -> Expr {
        Expr::Diff(DiffTerm {
            target: Box::new(target),
            base: vec![base],
            directions: directions
                .into_iter()
                .map(|d| SlotDirection::new(1, d))
                .collect(),
        })
    }

    /// Mixed partial differential of a multivariate target.
    pub fn partial_diff(target: Expr, base: Vec<Expr>, directions: Vec<SlotDirection>) -> Expr {
        Expr::Diff(DiffTerm {
            target: Box::new(target),
            base,
            directions,
        })
    }

    pub fn as_scalar(&self) -> Option<&Scalar> {
        match self {
            Expr::Scalar(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Scalar(s) if s.is_zero())
    }

    /// Names of all function symbols, linear functionals, and point variables.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| match e {
            Expr::Point(n) | Expr::Linear(n) => {
                out.insert(n.clone());
            }
            Expr::Func { name, .. } => {
                out.insert(name.clone());
            }
            _ => {}
        });
        out
    }

    /// All direction indices mentioned anywhere in the tree.
    pub fn direction_indices(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Direction(i) = e {
                out.insert(*i);
            }
        });
        out
    }

    pub fn contains_direction(&self, index: u32) -> bool {
        self.direction_indices().contains(&index)
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().for_each(|x| x.visit(f)),
            Expr::Compose(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Apply(func, args) => {
                func.visit(f);
                args.iter().for_each(|x| x.visit(f));
            }
            Expr::Diff(dt) => {
                dt.target.visit(f);
                dt.base.iter().for_each(|x| x.visit(f));
                dt.directions.iter().for_each(|d| d.direction.visit(f));
            }
            _ => {}
        }
    }

    /// Short name of the node kind, used in diagnostics and the JSON tree.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Expr::Scalar(_) => "scalar",
            Expr::Point(_) => "point",
            Expr::Direction(_) => "direction",
            Expr::Func { .. } => "func",
            Expr::Linear(_) => "linear",
            Expr::Power(_) => "power",
            Expr::Exp => "exp",
            Expr::Sum(_) => "sum",
            Expr::Product(_) => "product",
            Expr::Compose(..) => "compose",
            Expr::Apply(..) => "apply",
            Expr::Diff(_) => "diff",
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Sum(xs) if xs.len() > 1 => 1,
            Expr::Product(xs) if xs.len() > 1 => 2,
            Expr::Compose(..) => 3,
            Expr::Scalar(s) if s.is_negative() => 2,
            _ => 4,
        }
    }
}

fn write_joined(f: &mut fmt::Formatter<'_>, items: &[Expr], sep: &str) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Renders in the DSL accepted by [`crate::dsl::parse_expr`].
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Scalar(s) => write!(f, "{s}"),
            Expr::Point(n) => f.write_str(n),
            Expr::Direction(i) => write!(f, "e{i}"),
            Expr::Func { name, .. } => f.write_str(name),
            Expr::Linear(n) => write!(f, "lin[{n}]"),
            Expr::Power(k) => write!(f, "pow[{k}]"),
            Expr::Exp => f.write_str("exp"),
            Expr::Sum(xs) if xs.is_empty() => f.write_str("0"),
            Expr::Product(xs) if xs.is_empty() => f.write_str("1"),
            Expr::Sum(xs) | Expr::Product(xs) if xs.len() == 1 => write!(f, "{}", xs[0]),
            Expr::Sum(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write_wrapped(f, x, x.precedence() <= 1)?;
                }
                Ok(())
            }
            Expr::Product(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" * ")?;
                    }
                    let wrap = match x {
                        Expr::Scalar(s) if s.is_negative() => i > 0,
                        _ => x.precedence() <= 2,
                    };
                    write_wrapped(f, x, wrap)?;
                }
                Ok(())
            }
            Expr::Compose(outer, inner) => {
                write_wrapped(f, outer, outer.precedence() <= 3)?;
                f.write_str(" o ")?;
                write_wrapped(f, inner, inner.precedence() < 3)
            }
            Expr::Apply(func, args) => {
                match func.as_ref() {
                    Expr::Func { .. } | Expr::Linear(_) | Expr::Power(_) | Expr::Exp => {
                        write!(f, "{func}")?
                    }
                    other => write!(f, "({other})")?,
                }
                f.write_str("(")?;
                write_joined(f, args, ", ")?;
                f.write_str(")")
            }
            Expr::Diff(dt) => {
                let name = match dt.target.as_ref() {
                    Expr::Func { name, .. } => name.clone(),
                    other => format!("({other})"),
                };
                match dt.order() {
                    1 => write!(f, "D{name}(")?,
                    k => write!(f, "D^{k}{name}(")?,
                }
                write_joined(f, &dt.base, ", ")?;
                f.write_str(";")?;
                let multi = dt.arity() > 1;
                for (i, d) in dt.directions.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    if multi {
                        write!(f, "{}:", d.slot)?;
                    }
                    write!(f, "{}", d.direction)?;
                }
                f.write_str(")")
            }
        }
    }
}
