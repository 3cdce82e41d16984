//! Symbolic chain differentials.
//!
//! [`chain_diff`] applies the first-order rules node by node; [`nth_chain_diff`]
//! folds it over a list of directions, which is the recursive definition of the
//! n-th order differential. [`faa_di_bruno`] and [`leibniz`] build the same
//! results directly as sums over set partitions and subsets of the direction
//! indices, so the two routes can be checked against each other.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::canon::{canonicalize, sort_of, Sort};
use crate::combinatorics::{self, CombinatoricsError};
use crate::expr::{DiffTerm, Expr, ExprError, Scalar, SlotDirection};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error(transparent)]
    Structure(#[from] ExprError),
    #[error(transparent)]
    Combinatorics(#[from] CombinatoricsError),
    #[error("direction index must be positive")]
    ZeroDirection,
    #[error("direction e{0} is requested more than once")]
    RepeatedDirection(u32),
    #[error("direction e{0} is already used in the expression")]
    DirectionInUse(u32),
    #[error("expected a univariate function or a value expression, found a function of arity {0}")]
    NotUnivariate(usize),
    #[error("expected a function expression, found a {0}")]
    NotAFunction(&'static str),
    #[error("`{name}` has arity {arity} but {found} point(s)/direction(s) were given")]
    ArityMismatch {
        name: String,
        arity: usize,
        found: usize,
    },
    #[error("the direction list must not be empty")]
    NoDirections,
    #[error("cannot differentiate a {0} node")]
    Unsupported(&'static str),
}

/// Which calculus rule produced a rewrite step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rule {
    #[serde(rename = "R-CHAIN")]
    Chain,
    #[serde(rename = "R-TOTAL")]
    Total,
    #[serde(rename = "R-FAA")]
    FaaDiBruno,
    #[serde(rename = "R-LEIBNIZ")]
    Leibniz,
    #[serde(rename = "R-LIN")]
    Linear,
    #[serde(rename = "R-POW")]
    Power,
    #[serde(rename = "R-EXP")]
    Exp,
    #[serde(rename = "R-CONST")]
    Const,
    #[serde(rename = "R-SUM-LINEARITY")]
    SumLinearity,
    #[serde(rename = "R-ATOM")]
    Atom,
}

/// One rewrite step: the input node and its canonical differential.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleTrace {
    pub applied_rule: Rule,
    pub input: Expr,
    pub output: Expr,
}

struct Differentiator<'t> {
    point: String,
    direction: Expr,
    trace: Option<&'t mut Vec<RuleTrace>>,
}

impl Differentiator<'_> {
    fn record(&mut self, rule: Rule, input: &Expr, output: &Expr) -> Result<(), DiffError> {
        if let Some(trace) = self.trace.as_deref_mut() {
            trace.push(RuleTrace {
                applied_rule: rule,
                input: input.clone(),
                output: canonicalize(output)?,
            });
        }
        Ok(())
    }

    /// First-order differential of a canonical value expression.
    fn d(&mut self, e: &Expr) -> Result<Expr, DiffError> {
        let (rule, out) = match e {
            Expr::Scalar(_) | Expr::Direction(_) => (Rule::Const, Expr::zero()),
            Expr::Point(p) if *p == self.point => (Rule::Atom, self.direction.clone()),
            Expr::Point(_) => (Rule::Const, Expr::zero()),
            Expr::Sum(ts) => {
                let terms = ts.iter().map(|t| self.d(t)).collect::<Result<_, _>>()?;
                (Rule::SumLinearity, Expr::Sum(terms))
            }
            Expr::Product(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for (j, fj) in fs.iter().enumerate() {
                    let dj = self.d(fj)?;
                    let mut factors = fs.clone();
                    factors[j] = dj;
                    terms.push(Expr::Product(factors));
                }
                (Rule::Leibniz, Expr::Sum(terms))
            }
            Expr::Apply(func, args) => self.d_apply(func, args)?,
            Expr::Diff(dt) => self.d_diff(dt)?,
            other => return Err(DiffError::Unsupported(other.kind_name())),
        };
        self.record(rule, e, &out)?;
        Ok(out)
    }

    fn d_apply(&mut self, func: &Expr, args: &[Expr]) -> Result<(Rule, Expr), DiffError> {
        Ok(match func {
            Expr::Linear(_) => {
                let du = self.d(&args[0])?;
                (Rule::Linear, Expr::apply(func.clone(), vec![du]))
            }
            Expr::Power(k) => {
                let u = &args[0];
                let du = self.d(u)?;
                let mut factors = vec![Expr::int(*k as i64)];
                factors.extend(power_of(u, k - 1));
                factors.push(du);
                (Rule::Power, Expr::Product(factors))
            }
            Expr::Exp => {
                let du = self.d(&args[0])?;
                (
                    Rule::Exp,
                    Expr::Product(vec![Expr::apply(Expr::Exp, args.to_vec()), du]),
                )
            }
            Expr::Func { arity: 1, .. } => {
                let u = &args[0];
                let du = self.d(u)?;
                let rule = if *u == Expr::Point(self.point.clone()) {
                    Rule::Atom
                } else {
                    Rule::Chain
                };
                (rule, Expr::diff(func.clone(), u.clone(), vec![du]))
            }
            Expr::Func { .. } => {
                // total differential: one partial per argument slot
                let mut terms = Vec::with_capacity(args.len());
                for (i, a) in args.iter().enumerate() {
                    let da = self.d(a)?;
                    terms.push(Expr::partial_diff(
                        func.clone(),
                        args.to_vec(),
                        vec![SlotDirection::new(i + 1, da)],
                    ));
                }
                (Rule::Total, Expr::Sum(terms))
            }
            other => return Err(DiffError::Unsupported(other.kind_name())),
        })
    }

    /// δ(δ^k f(u_1..u_m; d_1..d_k)) = Σ_i δ^{k+1} f(u; d.., (i, δu_i)) + Σ_j δ^k f(u; .., δd_j, ..)
    fn d_diff(&mut self, dt: &DiffTerm) -> Result<(Rule, Expr), DiffError> {
        let mut terms = Vec::new();
        for (i, u) in dt.base.iter().enumerate() {
            let du = self.d(u)?;
            let mut dirs = dt.directions.clone();
            dirs.push(SlotDirection::new(i + 1, du));
            terms.push(Expr::Diff(DiffTerm {
                target: dt.target.clone(),
                base: dt.base.clone(),
                directions: dirs,
            }));
        }
        let mut constant_directions = true;
        for j in 0..dt.directions.len() {
            let dd = self.d(&dt.directions[j].direction)?;
            if dd.is_zero() {
                continue;
            }
            constant_directions = false;
            let mut dirs = dt.directions.clone();
            dirs[j].direction = dd;
            terms.push(Expr::Diff(DiffTerm {
                target: dt.target.clone(),
                base: dt.base.clone(),
                directions: dirs,
            }));
        }
        let at_point = dt
            .base
            .iter()
            .all(|u| matches!(u, Expr::Point(_)));
        let rule = if at_point && constant_directions {
            Rule::Atom
        } else {
            Rule::FaaDiBruno
        };
        Ok((rule, Expr::Sum(terms)))
    }
}

/// `u^k` as a list of factors (empty for k = 0).
fn power_of(u: &Expr, k: u32) -> Vec<Expr> {
    match k {
        0 => vec![],
        1 => vec![u.clone()],
        k => vec![Expr::call(Expr::Power(k), u.clone())],
    }
}

fn check_directions(e: &Expr, directions: &[u32]) -> Result<(), DiffError> {
    let used = e.direction_indices();
    let mut seen = BTreeSet::new();
    for &d in directions {
        if d == 0 {
            return Err(DiffError::ZeroDirection);
        }
        if !seen.insert(d) {
            return Err(DiffError::RepeatedDirection(d));
        }
        if used.contains(&d) {
            return Err(DiffError::DirectionInUse(d));
        }
    }
    Ok(())
}

/// Canonical value form of `e` at `point`: univariate functions are applied to
/// the point, value expressions are returned as is.
pub fn value_at(e: &Expr, point: &str) -> Result<Expr, DiffError> {
    let c = canonicalize(e)?;
    match sort_of(&c)? {
        Sort::Function(1) => Ok(canonicalize(&Expr::call(c, Expr::point(point)))?),
        Sort::Function(n) => Err(DiffError::NotUnivariate(n)),
        Sort::Value | Sort::Neutral => Ok(c),
    }
}

fn chain_diff_inner(
    e: &Expr,
    point: &str,
    direction: u32,
    trace: Option<&mut Vec<RuleTrace>>,
) -> Result<Expr, DiffError> {
    check_directions(e, &[direction])?;
    let value = value_at(e, point)?;
    let mut d = Differentiator {
        point: point.to_string(),
        direction: Expr::dir(direction),
        trace,
    };
    let out = d.d(&value)?;
    Ok(canonicalize(&out)?)
}

/// First-order chain differential of `e` at `point` in direction `e<direction>`.
///
/// `e` may be a univariate function expression (`exp o g`), which is applied
/// to the point first, or a value expression in the point (`f(x) * g(x)`).
pub fn chain_diff(e: &Expr, point: &str, direction: u32) -> Result<Expr, DiffError> {
    chain_diff_inner(e, point, direction, None)
}

/// [`chain_diff`] that also records every rewrite step.
pub fn chain_diff_traced(
    e: &Expr,
    point: &str,
    direction: u32,
    trace: &mut Vec<RuleTrace>,
) -> Result<Expr, DiffError> {
    chain_diff_inner(e, point, direction, Some(trace))
}

/// n-th order chain differential by repeated first-order differentiation.
/// An empty direction list returns `canonicalize(e)`.
pub fn nth_chain_diff(e: &Expr, point: &str, directions: &[u32]) -> Result<Expr, DiffError> {
    nth_inner(e, point, directions, None)
}

pub fn nth_chain_diff_traced(
    e: &Expr,
    point: &str,
    directions: &[u32],
    trace: &mut Vec<RuleTrace>,
) -> Result<Expr, DiffError> {
    nth_inner(e, point, directions, Some(trace))
}

fn nth_inner(
    e: &Expr,
    point: &str,
    directions: &[u32],
    mut trace: Option<&mut Vec<RuleTrace>>,
) -> Result<Expr, DiffError> {
    check_directions(e, directions)?;
    let mut current = canonicalize(e)?;
    for &d in directions {
        current = chain_diff_inner(&current, point, d, trace.as_deref_mut())?;
    }
    Ok(current)
}

fn univariate_function(e: &Expr) -> Result<Expr, DiffError> {
    let c = canonicalize(e)?;
    match sort_of(&c)? {
        Sort::Function(1) | Sort::Neutral => Ok(c),
        Sort::Function(n) => Err(DiffError::NotUnivariate(n)),
        Sort::Value => Err(DiffError::NotAFunction("value expression")),
    }
}

fn falling_factorial(k: u32, m: u32) -> i64 {
    (0..m).map(|i| (k - i) as i64).product()
}

/// `δ^m f(base; dirs)` for a canonical univariate function `f`, using the
/// closed forms for `exp`, `pow[k]`, linear functionals, and constants.
fn outer_differential(f: &Expr, base: &Expr, dirs: Vec<Expr>) -> Result<Expr, DiffError> {
    let m = dirs.len() as u32;
    Ok(match f {
        Expr::Func { .. } => Expr::diff(f.clone(), base.clone(), dirs),
        Expr::Exp => {
            let mut factors = vec![Expr::call(Expr::Exp, base.clone())];
            factors.extend(dirs);
            Expr::Product(factors)
        }
        Expr::Power(k) if m > *k => Expr::zero(),
        Expr::Power(k) => {
            let mut factors = vec![Expr::int(falling_factorial(*k, m))];
            factors.extend(power_of(base, k - m));
            factors.extend(dirs);
            Expr::Product(factors)
        }
        Expr::Linear(_) => match m {
            0 => Expr::call(f.clone(), base.clone()),
            1 => Expr::call(f.clone(), dirs.into_iter().next().unwrap()),
            _ => Expr::zero(),
        },
        Expr::Scalar(_) if m == 0 => f.clone(),
        Expr::Scalar(_) => Expr::zero(),
        composite => {
            // differentiate at a fresh point in fresh directions, then substitute
            let fresh_point = fresh_name(&[composite, base], "u");
            let mut max_dir = composite.direction_indices().into_iter().max().unwrap_or(0);
            max_dir = max_dir.max(base.direction_indices().into_iter().max().unwrap_or(0));
            for d in &dirs {
                max_dir = max_dir.max(d.direction_indices().into_iter().max().unwrap_or(0));
            }
            let fresh: Vec<u32> = (1..=m).map(|i| max_dir + i).collect();
            let applied = Expr::call(composite.clone(), Expr::point(&fresh_point));
            let generic = nth_chain_diff(&applied, &fresh_point, &fresh)?;
            let points = BTreeMap::from([(fresh_point, base.clone())]);
            let directions = fresh.into_iter().zip(dirs).collect();
            substitute(&generic, &points, &directions)
        }
    })
}

fn fresh_name(exprs: &[&Expr], stem: &str) -> String {
    let taken: BTreeSet<String> = exprs.iter().flat_map(|e| e.free_symbols()).collect();
    (0..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !taken.contains(n))
        .unwrap()
}

/// Replaces point variables and directions throughout `e`.
pub fn substitute(e: &Expr, points: &BTreeMap<String, Expr>, directions: &BTreeMap<u32, Expr>) -> Expr {
    let sub = |x: &Expr| substitute(x, points, directions);
    match e {
        Expr::Point(p) => points.get(p).cloned().unwrap_or_else(|| e.clone()),
        Expr::Direction(i) => directions.get(i).cloned().unwrap_or_else(|| e.clone()),
        Expr::Sum(xs) => Expr::Sum(xs.iter().map(sub).collect()),
        Expr::Product(xs) => Expr::Product(xs.iter().map(sub).collect()),
        Expr::Compose(a, b) => Expr::compose(sub(a), sub(b)),
        Expr::Apply(f, args) => Expr::apply(sub(f), args.iter().map(sub).collect()),
        Expr::Diff(dt) => Expr::Diff(DiffTerm {
            target: Box::new(sub(&dt.target)),
            base: dt.base.iter().map(sub).collect(),
            directions: dt
                .directions
                .iter()
                .map(|d| SlotDirection::new(d.slot, sub(&d.direction)))
                .collect(),
        }),
        _ => e.clone(),
    }
}

/// The summands of the higher-order chain rule for `f ∘ g`, one per partition
/// of the direction positions, before any simplification.
pub fn faa_di_bruno_terms(
    f: &Expr,
    g: &Expr,
    point: &str,
    directions: &[u32],
) -> Result<Vec<Expr>, DiffError> {
    if directions.is_empty() {
        return Err(DiffError::NoDirections);
    }
    let f = univariate_function(f)?;
    let g = univariate_function(g)?;
    check_directions(&f, directions)?;
    check_directions(&g, directions)?;
    let inner = value_at(&g, point)?;
    let mut terms = Vec::new();
    for partition in combinatorics::partitions(directions.len())? {
        let block_dirs = partition
            .blocks()
            .iter()
            .map(|block| {
                let idx: Vec<u32> = block.elements().iter().map(|&i| directions[i - 1]).collect();
                nth_chain_diff(&inner, point, &idx)
            })
            .collect::<Result<Vec<_>, _>>()?;
        terms.push(outer_differential(&f, &inner, block_dirs)?);
    }
    Ok(terms)
}

/// Higher-order chain rule as a direct sum over set partitions, canonicalized.
pub fn faa_di_bruno(f: &Expr, g: &Expr, point: &str, directions: &[u32]) -> Result<Expr, DiffError> {
    let terms = faa_di_bruno_terms(f, g, point, directions)?;
    Ok(canonicalize(&Expr::Sum(terms))?)
}

/// The summands of the higher-order product rule for `f · g`, one per subset
/// of the direction positions, before any simplification.
pub fn leibniz_terms(
    f: &Expr,
    g: &Expr,
    point: &str,
    directions: &[u32],
) -> Result<Vec<Expr>, DiffError> {
    check_directions(f, directions)?;
    check_directions(g, directions)?;
    let fv = value_at(f, point)?;
    let gv = value_at(g, point)?;
    let n = directions.len();
    let mut terms = Vec::with_capacity(1 << n);
    for subset in combinatorics::subsets(n) {
        let rest = combinatorics::complement(&subset);
        let pick = |s: &combinatorics::IndexSubset| -> Vec<u32> {
            s.elements().iter().map(|&i| directions[i - 1]).collect()
        };
        let df = nth_chain_diff(&fv, point, &pick(&subset))?;
        let dg = nth_chain_diff(&gv, point, &pick(&rest))?;
        terms.push(Expr::Product(vec![df, dg]));
    }
    Ok(terms)
}

/// Higher-order product rule as a direct sum over subsets, canonicalized.
pub fn leibniz(f: &Expr, g: &Expr, point: &str, directions: &[u32]) -> Result<Expr, DiffError> {
    let terms = leibniz_terms(f, g, point, directions)?;
    Ok(canonicalize(&Expr::Sum(terms))?)
}

/// Total chain differential of a multivariate symbol as the sum of its partial
/// differentials, `Σ_i δ_i f(points; e_{d_i})`. A direction index of 0 stands
/// for the zero direction in that slot.
pub fn total_diff(f: &Expr, points: &[Expr], directions: &[u32]) -> Result<Expr, DiffError> {
    let (name, arity) = match f {
        Expr::Func { name, arity } => (name, *arity),
        other => return Err(DiffError::NotAFunction(other.kind_name())),
    };
    if points.len() != arity || directions.len() != arity {
        return Err(DiffError::ArityMismatch {
            name: name.clone(),
            arity,
            found: if points.len() != arity { points.len() } else { directions.len() },
        });
    }
    let nonzero: Vec<u32> = directions.iter().copied().filter(|&d| d != 0).collect();
    let mut seen = BTreeSet::new();
    for &d in &nonzero {
        if !seen.insert(d) {
            return Err(DiffError::RepeatedDirection(d));
        }
    }
    let terms = directions
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let dir = if d == 0 {
                Expr::Scalar(Scalar::zero())
            } else {
                Expr::dir(d)
            };
            Expr::partial_diff(f.clone(), points.to_vec(), vec![SlotDirection::new(i + 1, dir)])
        })
        .collect();
    Ok(canonicalize(&Expr::Sum(terms))?)
}
