//! JSON tree encoding of expressions and rule traces.
//!
//! Every node is an object with a `kind` field. Exact scalars are encoded as
//! strings (`"3/4"`) and floats as JSON numbers, so the two never collide.

use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::sort_of;
use crate::diff::{Rule, RuleTrace};
use crate::expr::{DiffTerm, Expr, ExprError, Scalar, SlotDirection};

#[derive(Debug, Error)]
pub enum SerializeError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid exact scalar `{0}`")]
    Scalar(String),
    #[error("differential of order {order} lists {found} directions")]
    OrderMismatch { order: usize, found: usize },
    #[error(transparent)]
    Structure(#[from] ExprError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Exact(String),
    Float(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DirNode {
    slot: usize,
    expr: Node,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum Node {
    Scalar { value: ScalarRepr },
    Point { name: String },
    Direction { index: u32 },
    Func { name: String, arity: usize },
    Linear { name: String },
    Power { exponent: u32 },
    Exp,
    Sum { children: Vec<Node> },
    Product { children: Vec<Node> },
    Compose { outer: Box<Node>, inner: Box<Node> },
    Apply { function: Box<Node>, args: Vec<Node> },
    Diff {
        order: usize,
        target: Box<Node>,
        base: Vec<Node>,
        directions: Vec<DirNode>,
    },
}

fn to_node(e: &Expr) -> Node {
    let all = |xs: &[Expr]| xs.iter().map(to_node).collect();
    match e {
        Expr::Scalar(Scalar::Exact(r)) => Node::Scalar {
            value: ScalarRepr::Exact(r.to_string()),
        },
        Expr::Scalar(Scalar::Float(v)) => Node::Scalar {
            value: ScalarRepr::Float(*v),
        },
        Expr::Point(name) => Node::Point { name: name.clone() },
        Expr::Direction(index) => Node::Direction { index: *index },
        Expr::Func { name, arity } => Node::Func {
            name: name.clone(),
            arity: *arity,
        },
        Expr::Linear(name) => Node::Linear { name: name.clone() },
        Expr::Power(k) => Node::Power { exponent: *k },
        Expr::Exp => Node::Exp,
        Expr::Sum(xs) => Node::Sum { children: all(xs) },
        Expr::Product(xs) => Node::Product { children: all(xs) },
        Expr::Compose(f, g) => Node::Compose {
            outer: Box::new(to_node(f)),
            inner: Box::new(to_node(g)),
        },
        Expr::Apply(f, args) => Node::Apply {
            function: Box::new(to_node(f)),
            args: all(args),
        },
        Expr::Diff(dt) => Node::Diff {
            order: dt.order(),
            target: Box::new(to_node(&dt.target)),
            base: all(&dt.base),
            directions: dt
                .directions
                .iter()
                .map(|d| DirNode {
                    slot: d.slot,
                    expr: to_node(&d.direction),
                })
                .collect(),
        },
    }
}

fn from_node(n: &Node) -> Result<Expr, SerializeError> {
    let all = |xs: &[Node]| xs.iter().map(from_node).collect::<Result<Vec<_>, _>>();
    Ok(match n {
        Node::Scalar {
            value: ScalarRepr::Exact(s),
        } => Expr::Scalar(Scalar::Exact(
            BigRational::from_str(s).map_err(|_| SerializeError::Scalar(s.clone()))?,
        )),
        Node::Scalar {
            value: ScalarRepr::Float(v),
        } => Expr::Scalar(Scalar::float(*v)),
        Node::Point { name } => Expr::point(name.clone()),
        Node::Direction { index } => Expr::Direction(*index),
        Node::Func { name, arity } => Expr::Func {
            name: name.clone(),
            arity: *arity,
        },
        Node::Linear { name } => Expr::linear(name.clone()),
        Node::Power { exponent } => Expr::Power(*exponent),
        Node::Exp => Expr::Exp,
        Node::Sum { children } => Expr::Sum(all(children)?),
        Node::Product { children } => Expr::Product(all(children)?),
        Node::Compose { outer, inner } => Expr::compose(from_node(outer)?, from_node(inner)?),
        Node::Apply { function, args } => Expr::Apply(Box::new(from_node(function)?), all(args)?),
        Node::Diff {
            order,
            target,
            base,
            directions,
        } => {
            if *order != directions.len() {
                return Err(SerializeError::OrderMismatch {
                    order: *order,
                    found: directions.len(),
                });
            }
            Expr::Diff(DiffTerm {
                target: Box::new(from_node(target)?),
                base: all(base)?,
                directions: directions
                    .iter()
                    .map(|d| Ok(SlotDirection::new(d.slot, from_node(&d.expr)?)))
                    .collect::<Result<_, SerializeError>>()?,
            })
        }
    })
}

pub fn to_json_value(e: &Expr) -> serde_json::Value {
    serde_json::to_value(to_node(e)).expect("expression nodes always serialize")
}

/// Compact single-line JSON.
pub fn to_json(e: &Expr) -> String {
    serde_json::to_string(&to_node(e)).expect("expression nodes always serialize")
}

/// Decodes and sort-checks an expression.
pub fn from_json(text: &str) -> Result<Expr, SerializeError> {
    let node: Node = serde_json::from_str(text)?;
    let e = from_node(&node)?;
    sort_of(&e)?;
    Ok(e)
}

#[derive(Serialize)]
struct TraceRecord {
    rule: Rule,
    input: Node,
    output: Node,
}

/// One rule application as `{"rule": ..., "input": ..., "output": ...}`.
pub fn trace_to_json(t: &RuleTrace) -> String {
    serde_json::to_string(&TraceRecord {
        rule: t.applied_rule,
        input: to_node(&t.input),
        output: to_node(&t.output),
    })
    .expect("trace records always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::chain_diff_traced;

    #[test]
    fn round_trip_preserves_scalar_kinds() {
        let e = Expr::sum(vec![
            Expr::Scalar(Scalar::ratio(-3, 4)),
            Expr::product(vec![Expr::float(0.5), Expr::call(Expr::func("g"), Expr::point("x"))]),
            Expr::partial_diff(
                Expr::func_n("F", 2),
                vec![Expr::point("x"), Expr::point("y")],
                vec![SlotDirection::new(2, Expr::dir(1))],
            ),
        ]);
        let text = to_json(&e);
        assert!(text.contains(r#""value":"-3/4""#));
        assert!(text.contains(r#""value":0.5"#));
        assert_eq!(from_json(&text).unwrap(), e);
        let one = Expr::one();
        assert_eq!(to_json(&one), r#"{"kind":"scalar","value":"1"}"#);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(from_json("{"), Err(SerializeError::Json(_))));
        assert!(matches!(
            from_json(r#"{"kind":"scalar","value":"1/0"}"#),
            Err(SerializeError::Scalar(_))
        ));
        assert!(matches!(
            from_json(r#"{"kind":"direction","index":0}"#),
            Err(SerializeError::Structure(_))
        ));
    }

    #[test]
    fn traces_have_rule_names() {
        let e = Expr::call(Expr::compose(Expr::Exp, Expr::func("g")), Expr::point("x"));
        let mut traces = Vec::new();
        chain_diff_traced(&e, "x", 1, &mut traces).unwrap();
        let last = trace_to_json(traces.last().unwrap());
        assert!(last.starts_with(r#"{"rule":"R-EXP","input":"#), "{last}");
    }
}
