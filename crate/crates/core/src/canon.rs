//! Normal forms for [`Expr`].
//!
//! Canonical value expressions are sums of monomials over opaque atoms:
//! products are distributed over sums, like monomials are merged with their
//! scalar coefficients folded, and both sums and products are sorted by the
//! structural order of [`Expr`]. Differential terms are expanded
//! multilinearly in their directions (zero directions annihilate the term,
//! scalar factors are pulled out) and their direction lists are sorted. A
//! differential of order zero reduces to a plain application.

use std::collections::BTreeMap;

use crate::expr::{DiffTerm, Expr, ExprError, Scalar, SlotDirection};

/// Sort of an expression: what kind of object it denotes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sort {
    /// A bare scalar, usable as a value or as a constant function.
    Neutral,
    /// Point-valued (an element of some space).
    Value,
    /// A function of the given arity.
    Function(usize),
}

impl Sort {
    fn name(self) -> &'static str {
        match self {
            Sort::Neutral => "scalar",
            Sort::Value => "value expression",
            Sort::Function(_) => "function expression",
        }
    }
}

fn join_sorts(a: Sort, b: Sort, context: &'static str) -> Result<Sort, ExprError> {
    match (a, b) {
        (Sort::Neutral, s) | (s, Sort::Neutral) => Ok(s),
        (Sort::Value, Sort::Value) => Ok(Sort::Value),
        (Sort::Function(m), Sort::Function(n)) if m == n => Ok(Sort::Function(m)),
        _ => Err(ExprError::SortMismatch { context }),
    }
}

fn expect_value(e: &Expr) -> Result<(), ExprError> {
    match sort_of(e)? {
        Sort::Value | Sort::Neutral => Ok(()),
        s => Err(ExprError::UnexpectedSort {
            expected: "value expression",
            found: s.name(),
        }),
    }
}

/// Checks well-formedness and returns the sort of `e`.
pub fn sort_of(e: &Expr) -> Result<Sort, ExprError> {
    match e {
        Expr::Scalar(_) => Ok(Sort::Neutral),
        Expr::Point(_) => Ok(Sort::Value),
        Expr::Direction(0) => Err(ExprError::ZeroDirectionIndex),
        Expr::Direction(_) => Ok(Sort::Value),
        Expr::Func { name, arity: 0 } => Err(ExprError::ZeroArity(name.clone())),
        Expr::Func { arity, .. } => Ok(Sort::Function(*arity)),
        Expr::Power(0) => Err(ExprError::InvalidPower),
        Expr::Linear(_) | Expr::Power(_) | Expr::Exp => Ok(Sort::Function(1)),
        Expr::Sum(xs) | Expr::Product(xs) => {
            let context = if matches!(e, Expr::Sum(_)) { "sum" } else { "product" };
            xs.iter()
                .try_fold(Sort::Neutral, |acc, x| join_sorts(acc, sort_of(x)?, context))
        }
        Expr::Compose(outer, inner) => {
            match sort_of(outer)? {
                Sort::Function(1) | Sort::Neutral => {}
                Sort::Function(n) => {
                    return Err(ExprError::ArityMismatch {
                        name: outer.to_string(),
                        expected: n,
                        found: 1,
                    })
                }
                Sort::Value => {
                    return Err(ExprError::UnexpectedSort {
                        expected: "function expression",
                        found: "value expression",
                    })
                }
            }
            match sort_of(inner)? {
                Sort::Function(n) => Ok(Sort::Function(n)),
                s => Err(ExprError::UnexpectedSort {
                    expected: "function expression",
                    found: s.name(),
                }),
            }
        }
        Expr::Apply(func, args) => {
            match sort_of(func)? {
                Sort::Function(n) if n != args.len() => {
                    return Err(ExprError::ArityMismatch {
                        name: func.to_string(),
                        expected: n,
                        found: args.len(),
                    })
                }
                Sort::Value => {
                    return Err(ExprError::UnexpectedSort {
                        expected: "function expression",
                        found: "value expression",
                    })
                }
                _ => {}
            }
            args.iter().try_for_each(expect_value)?;
            Ok(Sort::Value)
        }
        Expr::Diff(dt) => {
            let (name, arity) = match dt.target.as_ref() {
                Expr::Func { name, arity } => (name, *arity),
                other => return Err(ExprError::InvalidDiffTarget(other.kind_name().into())),
            };
            if dt.base.len() != arity {
                return Err(ExprError::ArityMismatch {
                    name: name.clone(),
                    expected: arity,
                    found: dt.base.len(),
                });
            }
            dt.base.iter().try_for_each(expect_value)?;
            let mut seen = std::collections::BTreeSet::new();
            for d in &dt.directions {
                if d.slot == 0 || d.slot > arity {
                    return Err(ExprError::SlotOutOfRange {
                        name: name.clone(),
                        slot: d.slot,
                        arity,
                    });
                }
                expect_value(&d.direction)?;
                if let Expr::Direction(i) = d.direction {
                    if !seen.insert(i) {
                        return Err(ExprError::RepeatedDirection(i));
                    }
                }
            }
            Ok(Sort::Value)
        }
    }
}

/// Returns the canonical normal form of `e`.
pub fn canonicalize(e: &Expr) -> Result<Expr, ExprError> {
    sort_of(e)?;
    Ok(normalize(e))
}

/// `true` iff both expressions canonicalize to the same tree. Malformed inputs
/// compare unequal.
pub fn structural_equal(a: &Expr, b: &Expr) -> bool {
    match (canonicalize(a), canonicalize(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

/// Polynomial over canonical atoms: sorted factor list -> coefficient.
#[derive(Clone, Debug, Default)]
struct Poly(BTreeMap<Vec<Expr>, Scalar>);

impl Poly {
    fn constant(c: Scalar) -> Poly {
        let mut p = Poly::default();
        if !c.is_zero() {
            p.0.insert(Vec::new(), c);
        }
        p
    }

    fn atom(e: Expr) -> Poly {
        let mut p = Poly::default();
        p.0.insert(vec![e], Scalar::one());
        p
    }

    fn add_term(&mut self, monomial: Vec<Expr>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let merged = match self.0.get(&monomial) {
            Some(existing) => existing.add(&c),
            None => c,
        };
        if merged.is_zero() {
            self.0.remove(&monomial);
        } else {
            self.0.insert(monomial, merged);
        }
    }

    fn add(mut self, other: Poly) -> Poly {
        for (m, c) in other.0 {
            self.add_term(m, c);
        }
        self
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &other.0 {
                let mut m = ma.clone();
                m.extend(mb.iter().cloned());
                m.sort();
                out.add_term(m, ca.mul(cb));
            }
        }
        out
    }

    fn into_expr(self) -> Expr {
        let mut terms: Vec<Expr> = self
            .0
            .into_iter()
            .map(|(m, c)| monomial_expr(m, c))
            .collect();
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.pop().unwrap(),
            _ => {
                terms.sort();
                Expr::Sum(terms)
            }
        }
    }
}

fn monomial_expr(mut factors: Vec<Expr>, c: Scalar) -> Expr {
    if factors.is_empty() {
        return Expr::Scalar(c);
    }
    if c.is_one() {
        if factors.len() == 1 {
            return factors.pop().unwrap();
        }
        return Expr::Product(factors);
    }
    let mut all = Vec::with_capacity(factors.len() + 1);
    all.push(Expr::Scalar(c));
    all.extend(factors);
    Expr::Product(all)
}

fn normalize(e: &Expr) -> Expr {
    to_poly(e).into_expr()
}

fn to_poly(e: &Expr) -> Poly {
    match e {
        Expr::Scalar(s) => Poly::constant(match s {
            Scalar::Float(v) => Scalar::float(*v),
            exact => exact.clone(),
        }),
        Expr::Point(_)
        | Expr::Direction(_)
        | Expr::Func { .. }
        | Expr::Linear(_)
        | Expr::Power(_)
        | Expr::Exp => Poly::atom(e.clone()),
        Expr::Sum(xs) => xs.iter().fold(Poly::default(), |acc, x| acc.add(to_poly(x))),
        Expr::Product(xs) => xs
            .iter()
            .fold(Poly::constant(Scalar::one()), |acc, x| acc.mul(&to_poly(x))),
        Expr::Compose(outer, inner) => {
            let c = normalize_compose(normalize(outer), normalize(inner));
            match c {
                Expr::Compose(..) => Poly::atom(c),
                other => to_poly(&other),
            }
        }
        Expr::Apply(func, args) => {
            let args: Vec<Expr> = args.iter().map(normalize).collect();
            apply_poly(normalize(func), args)
        }
        Expr::Diff(dt) => diff_poly(dt),
    }
}

fn normalize_compose(outer: Expr, inner: Expr) -> Expr {
    match (outer, inner) {
        // composition is associative; keep chains right-nested
        (Expr::Compose(a, b), inner) => {
            let rest = normalize_compose(*b, inner);
            normalize_compose(*a, rest)
        }
        (Expr::Power(1), inner) => inner,
        (outer, Expr::Power(1)) => outer,
        (c @ Expr::Scalar(_), _) => c,
        (outer, inner) => Expr::Compose(Box::new(outer), Box::new(inner)),
    }
}

/// Normalizes `func(args)` with `func` and `args` already canonical.
fn apply_poly(func: Expr, args: Vec<Expr>) -> Poly {
    match func {
        Expr::Compose(outer, inner) => {
            let inner_value = to_poly(&Expr::Apply(inner, args)).into_expr();
            apply_poly(*outer, vec![inner_value])
        }
        Expr::Scalar(c) => Poly::constant(c),
        Expr::Sum(fs) => fs.into_iter().fold(Poly::default(), |acc, f| {
            acc.add(apply_poly(f, args.clone()))
        }),
        Expr::Product(fs) => fs
            .into_iter()
            .fold(Poly::constant(Scalar::one()), |acc, f| {
                acc.mul(&apply_poly(f, args.clone()))
            }),
        Expr::Power(1) => to_poly(&args[0]),
        Expr::Power(k) => match &args[0] {
            Expr::Scalar(s) => Poly::constant(s.pow(k)),
            _ => Poly::atom(Expr::Apply(Box::new(Expr::Power(k)), args)),
        },
        Expr::Exp => match &args[0] {
            Expr::Scalar(Scalar::Exact(r)) if num_traits::Zero::is_zero(r) => {
                Poly::constant(Scalar::one())
            }
            _ => Poly::atom(Expr::Apply(Box::new(Expr::Exp), args)),
        },
        Expr::Linear(name) => {
            // ℓ(Σ c_i m_i) = Σ c_i ℓ(m_i)
            let mut out = Poly::default();
            for (m, c) in to_poly(&args[0]).0 {
                let inner = monomial_expr(m, Scalar::one());
                let atom = Expr::Apply(Box::new(Expr::Linear(name.clone())), vec![inner]);
                out.add_term(vec![atom], c);
            }
            out
        }
        func => Poly::atom(Expr::Apply(Box::new(func), args)),
    }
}

fn diff_poly(dt: &DiffTerm) -> Poly {
    let target = normalize(&dt.target);
    let base: Vec<Expr> = dt.base.iter().map(normalize).collect();
    if dt.directions.is_empty() {
        return apply_poly(target, base);
    }
    // expand multilinearly: each direction slot becomes a list of (monomial, coefficient)
    let mut partial: Vec<(Vec<SlotDirection>, Scalar)> = vec![(Vec::new(), Scalar::one())];
    for d in &dt.directions {
        let expansion = to_poly(&d.direction);
        if expansion.0.is_empty() {
            return Poly::default();
        }
        let mut next = Vec::with_capacity(partial.len() * expansion.0.len());
        for (dirs, c) in &partial {
            for (m, cm) in &expansion.0 {
                let mut dirs = dirs.clone();
                dirs.push(SlotDirection::new(d.slot, monomial_expr(m.clone(), Scalar::one())));
                next.push((dirs, c.mul(cm)));
            }
        }
        partial = next;
    }
    let mut out = Poly::default();
    for (mut dirs, c) in partial {
        dirs.sort();
        let term = Expr::Diff(DiffTerm {
            target: Box::new(target.clone()),
            base: base.clone(),
            directions: dirs,
        });
        out.add_term(vec![term], c);
    }
    out
}
