use std::collections::BTreeMap;

use crate::canon::sort_of;
use crate::expr::{DiffTerm, Expr};

use super::func::ConcreteFunc;
use super::oracle::nth_partial_diff_numeric;
use super::value::{Space, Value};
use super::NumericError;

/// Concrete bindings for the symbols, points, and directions of an expression.
///
/// Function symbols (`Func`) and linear functionals (`Linear`) share one
/// namespace.
#[derive(Clone, Debug, Default)]
pub struct EvalContext {
    pub bindings: BTreeMap<String, ConcreteFunc>,
    pub points: BTreeMap<String, Value>,
    pub directions: BTreeMap<u32, Value>,
    /// Estimate differentials numerically when no exact differential exists.
    pub numeric_fallback: bool,
}

impl EvalContext {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `f` under its own name.
    pub fn bind(self, f: ConcreteFunc) -> Self {
        let name = f.name().to_string();
        self.bind_as(name, f)
    }

    pub fn bind_as(mut self, name: impl Into<String>, f: ConcreteFunc) -> Self {
        self.bindings.insert(name.into(), f);
        self
    }

    pub fn point(mut self, name: impl Into<String>, v: impl Into<Value>) -> Self {
        self.points.insert(name.into(), v.into());
        self
    }

    pub fn direction(mut self, index: u32, v: impl Into<Value>) -> Self {
        self.directions.insert(index, v.into());
        self
    }

    pub fn with_numeric_fallback(mut self, on: bool) -> Self {
        self.numeric_fallback = on;
        self
    }

    fn lookup(&self, name: &str) -> Result<&ConcreteFunc, NumericError> {
        self.bindings
            .get(name)
            .ok_or_else(|| NumericError::UnboundSymbol(name.to_string()))
    }

    /// Fails on the first unbound function symbol, point, or direction.
    pub fn check_bound(&self, e: &Expr) -> Result<(), NumericError> {
        let mut missing = None;
        e.visit(&mut |node| {
            if missing.is_some() {
                return;
            }
            missing = match node {
                Expr::Func { name, .. } | Expr::Linear(name) if !self.bindings.contains_key(name) => {
                    Some(NumericError::UnboundSymbol(name.clone()))
                }
                Expr::Point(name) if !self.points.contains_key(name) => {
                    Some(NumericError::UnboundPoint(name.clone()))
                }
                Expr::Direction(i) if !self.directions.contains_key(i) => {
                    Some(NumericError::UnboundDirection(*i))
                }
                _ => None,
            };
        });
        missing.map_or(Ok(()), Err)
    }
}

/// Numeric value of a value-sorted expression.
pub fn eval(e: &Expr, ctx: &EvalContext) -> Result<Value, NumericError> {
    sort_of(e)?;
    ctx.check_bound(e)?;
    eval_value(e, ctx)
}

/// Applies a function-sorted expression to concrete arguments.
pub fn eval_function(f: &Expr, args: &[Value], ctx: &EvalContext) -> Result<Value, NumericError> {
    sort_of(f)?;
    ctx.check_bound(f)?;
    apply(f, args, ctx)
}

fn eval_value(e: &Expr, ctx: &EvalContext) -> Result<Value, NumericError> {
    match e {
        Expr::Scalar(s) => Ok(Value::Scalar(s.to_f64())),
        Expr::Point(name) => ctx
            .points
            .get(name)
            .cloned()
            .ok_or_else(|| NumericError::UnboundPoint(name.clone())),
        Expr::Direction(i) => ctx
            .directions
            .get(i)
            .cloned()
            .ok_or(NumericError::UnboundDirection(*i)),
        Expr::Sum(terms) => {
            let mut iter = terms.iter();
            let Some(first) = iter.next() else {
                return Ok(Value::Scalar(0.0));
            };
            iter.try_fold(eval_value(first, ctx)?, |acc, t| acc.add(&eval_value(t, ctx)?))
        }
        Expr::Product(factors) => factors
            .iter()
            .try_fold(Value::Scalar(1.0), |acc, t| acc.mul(&eval_value(t, ctx)?)),
        Expr::Apply(f, args) => {
            let vals = args
                .iter()
                .map(|a| eval_value(a, ctx))
                .collect::<Result<Vec<_>, _>>()?;
            apply(f, &vals, ctx)
        }
        Expr::Diff(term) => eval_diff(term, ctx),
        other => Err(NumericError::NotEvaluable(format!(
            "{} is a function, not a value",
            other.kind_name()
        ))),
    }
}

fn apply(f: &Expr, args: &[Value], ctx: &EvalContext) -> Result<Value, NumericError> {
    let single = || -> Result<f64, NumericError> {
        match args {
            [v] => v.scalar(),
            _ => Err(NumericError::SpaceMismatch(format!(
                "{} takes one scalar argument",
                f.kind_name()
            ))),
        }
    };
    match f {
        Expr::Func { name, .. } | Expr::Linear(name) => ctx.lookup(name)?.call(args),
        Expr::Exp => Ok(Value::Scalar(single()?.exp())),
        Expr::Power(k) => Ok(Value::Scalar(single()?.powi(*k as i32))),
        Expr::Compose(outer, inner) => {
            let mid = apply(inner, args, ctx)?;
            apply(outer, std::slice::from_ref(&mid), ctx)
        }
        other => Err(NumericError::NotEvaluable(format!(
            "{} cannot be applied",
            other.kind_name()
        ))),
    }
}

fn eval_diff(term: &DiffTerm, ctx: &EvalContext) -> Result<Value, NumericError> {
    let Expr::Func { name, .. } = term.target.as_ref() else {
        return Err(NumericError::NotEvaluable(format!(
            "differential of {}",
            term.target.kind_name()
        )));
    };
    let f = ctx.lookup(name)?;
    let args = term
        .base
        .iter()
        .map(|b| eval_value(b, ctx))
        .collect::<Result<Vec<_>, _>>()?;
    let dirs = term
        .directions
        .iter()
        .map(|sd| Ok((sd.slot, eval_value(&sd.direction, ctx)?)))
        .collect::<Result<Vec<_>, NumericError>>()?;
    if let Some(v) = f.exact_differential(&args, &dirs) {
        return Ok(v);
    }
    if ctx.numeric_fallback {
        nth_partial_diff_numeric(f, &args, &dirs)
    } else {
        Err(NumericError::MissingDifferential(name.clone()))
    }
}

fn space_of(v: &Value) -> Space {
    match v {
        Value::Scalar(_) => Space::Real,
        Value::Vector(xs) => Space::Euclidean(xs.len()),
    }
}

/// Packages a function-sorted expression as a [`ConcreteFunc`] on `domain`.
///
/// The codomain is inferred by evaluating at the origin.
pub fn compile(f: &Expr, ctx: &EvalContext, domain: Vec<Space>) -> Result<ConcreteFunc, NumericError> {
    let zeros: Vec<Value> = domain.iter().map(Space::zero).collect();
    let codomain = space_of(&eval_function(f, &zeros, ctx)?);
    let (expr, ctx) = (f.clone(), ctx.clone());
    Ok(ConcreteFunc::new(f.to_string(), domain, codomain, move |args| {
        apply(&expr, args, &ctx)
    }))
}

/// Packages a value expression as a function of the point `point`.
pub fn compile_value(
    e: &Expr,
    ctx: &EvalContext,
    point: &str,
    domain: Space,
) -> Result<ConcreteFunc, NumericError> {
    let probe = ctx.clone().point(point, domain.zero());
    sort_of(e)?;
    probe.check_bound(e)?;
    let codomain = space_of(&eval_value(e, &probe)?);
    let (expr, ctx, point) = (e.clone(), ctx.clone(), point.to_string());
    Ok(ConcreteFunc::new(e.to_string(), vec![domain], codomain, move |args| {
        let mut local = ctx.clone();
        local.points.insert(point.clone(), args[0].clone());
        eval_value(&expr, &local)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::fixtures;

    fn ctx() -> EvalContext {
        EvalContext::new()
            .bind(fixtures::linear("g", Space::Euclidean(2), &[1.0, 1.0]))
            .point("x", vec![0.0, 0.0])
            .direction(1, vec![1.0, 0.0])
    }

    #[test]
    fn exp_at_zero() {
        let e = Expr::call(Expr::Exp, Expr::zero());
        assert_eq!(eval(&e, &EvalContext::new()).unwrap(), Value::Scalar(1.0));
    }

    #[test]
    fn differential_of_linear_binding() {
        let d = Expr::diff(Expr::func("g"), Expr::point("x"), vec![Expr::dir(1)]);
        assert_eq!(eval(&d, &ctx()).unwrap(), Value::Scalar(1.0));
        let chain = Expr::product(vec![
            Expr::call(Expr::Exp, Expr::call(Expr::func("g"), Expr::point("x"))),
            d,
        ]);
        let v = eval(&chain, &ctx()).unwrap().scalar().unwrap();
        // independent central difference of exp(g(x + hη)) at h = 1e-5
        let h: f64 = 1e-5;
        let fd = (h.exp() - (-h).exp()) / (2.0 * h);
        assert!((v - fd).abs() <= 1e-8);
    }

    #[test]
    fn errors() {
        let e = Expr::call(Expr::func("q"), Expr::point("x"));
        assert_eq!(eval(&e, &ctx()), Err(NumericError::UnboundSymbol("q".into())));
        let abs = EvalContext::new()
            .bind(fixtures::abs_value("f"))
            .point("x", 1.0)
            .direction(1, 1.0);
        let d = Expr::diff(Expr::func("f"), Expr::point("x"), vec![Expr::dir(1)]);
        assert_eq!(eval(&d, &abs), Err(NumericError::MissingDifferential("f".into())));
        let v = eval(&d, &abs.with_numeric_fallback(true)).unwrap();
        assert!((v.scalar().unwrap() - 1.0).abs() < 1e-9);
        let bad = Expr::call(Expr::func("g"), Expr::float(1.0));
        assert!(matches!(eval(&bad, &ctx()), Err(NumericError::SpaceMismatch(_))));
    }

    #[test]
    fn compiled_composition() {
        let f = Expr::compose(Expr::Exp, Expr::func("g"));
        let c = compile(&f, &ctx(), vec![Space::Euclidean(2)]).unwrap();
        assert_eq!(c.codomain(), Space::Real);
        let v = c.call1(&vec![1.0, -1.0].into()).unwrap();
        assert_eq!(v, Value::Scalar(1.0));
    }
}
