use std::fmt;

use serde::{Deserialize, Serialize};

use super::NumericError;

/// The vector space hosting points and directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    /// The real line; values are [`Value::Scalar`].
    Real,
    /// `R^d`, `d >= 1`.
    Euclidean(usize),
    /// Real functions sampled on `n >= 2` equispaced nodes of `[0, 1]`, with
    /// pointwise vector-space operations.
    Grid(usize),
}

impl Space {
    pub fn dim(&self) -> usize {
        match self {
            Space::Real => 1,
            Space::Euclidean(d) | Space::Grid(d) => *d,
        }
    }

    pub fn zero(&self) -> Value {
        match self {
            Space::Real => Value::Scalar(0.0),
            Space::Euclidean(d) | Space::Grid(d) => Value::Vector(vec![0.0; *d]),
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (Space::Real, Value::Scalar(_)) => true,
            (Space::Euclidean(d) | Space::Grid(d), Value::Vector(xs)) => xs.len() == *d,
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<(), NumericError> {
        match self {
            Space::Euclidean(0) => Err(NumericError::InvalidSpace("R^0".into())),
            Space::Grid(n) if *n < 2 => Err(NumericError::InvalidSpace(format!(
                "grid spaces need at least 2 nodes, got {n}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Real => f.write_str("R"),
            Space::Euclidean(d) => write!(f, "R{d}"),
            Space::Grid(n) => write!(f, "G{n}"),
        }
    }
}

/// Nodes `t_i = i / (n - 1)` of an `n`-point grid on `[0, 1]`.
pub fn grid_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Trapezoid weights for an `n`-point grid on `[0, 1]`.
pub fn trapezoid_weights(n: usize) -> Vec<f64> {
    let h = 1.0 / (n - 1) as f64;
    (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
        .collect()
}

/// A point, direction, or function value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Value {
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Value::Scalar(v) => Some(*v),
            Value::Vector(_) => None,
        }
    }

    pub fn scalar(&self) -> Result<f64, NumericError> {
        self.as_scalar()
            .ok_or_else(|| NumericError::SpaceMismatch("expected a scalar, found a vector".into()))
    }

    pub fn components(&self) -> &[f64] {
        match self {
            Value::Scalar(v) => std::slice::from_ref(v),
            Value::Vector(xs) => xs,
        }
    }

    pub fn zeros_like(&self) -> Value {
        self.map(|_| 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Value {
        match self {
            Value::Scalar(v) => Value::Scalar(f(*v)),
            Value::Vector(xs) => Value::Vector(xs.iter().map(|&x| f(x)).collect()),
        }
    }

    pub fn scale(&self, a: f64) -> Value {
        self.map(|x| a * x)
    }

    fn zip(&self, other: &Value, f: impl Fn(f64, f64) -> f64) -> Result<Value, NumericError> {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => Ok(Value::Scalar(f(*a, *b))),
            (Value::Vector(a), Value::Vector(b)) if a.len() == b.len() => Ok(Value::Vector(
                a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect(),
            )),
            _ => Err(NumericError::SpaceMismatch(format!(
                "cannot combine values of shapes {} and {}",
                self.shape(),
                other.shape()
            ))),
        }
    }

    pub fn add(&self, other: &Value) -> Result<Value, NumericError> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Value) -> Result<Value, NumericError> {
        self.zip(other, |a, b| a - b)
    }

    /// `self + t * dir`.
    pub fn axpy(&self, t: f64, dir: &Value) -> Result<Value, NumericError> {
        self.zip(dir, |a, b| a + t * b)
    }

    /// Product where at least one factor is a scalar.
    pub fn mul(&self, other: &Value) -> Result<Value, NumericError> {
        match (self, other) {
            (Value::Scalar(a), v) | (v, Value::Scalar(a)) => Ok(v.scale(*a)),
            _ => Err(NumericError::SpaceMismatch(
                "product of two vectors is undefined".into(),
            )),
        }
    }

    /// Max-norm.
    pub fn norm(&self) -> f64 {
        self.components().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn distance(&self, other: &Value) -> Result<f64, NumericError> {
        Ok(self.sub(other)?.norm())
    }

    pub fn dot(&self, other: &Value) -> Result<f64, NumericError> {
        let (a, b) = (self.components(), other.components());
        if a.len() != b.len() || matches!((self, other), (Value::Scalar(_), Value::Vector(_)) | (Value::Vector(_), Value::Scalar(_))) {
            return Err(NumericError::SpaceMismatch("dot product of mismatched shapes".into()));
        }
        Ok(a.iter().zip(b).map(|(x, y)| x * y).sum())
    }

    fn shape(&self) -> String {
        match self {
            Value::Scalar(_) => "scalar".into(),
            Value::Vector(xs) => format!("vector[{}]", xs.len()),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Scalar(v)
    }
}

impl From<Vec<f64>> for Value {
    fn from(v: Vec<f64>) -> Self {
        Value::Vector(v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Scalar(v) => write!(f, "{v}"),
            Value::Vector(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_space_operations() {
        let a = Value::from(vec![1.0, 2.0]);
        let b = Value::from(vec![0.5, -1.0]);
        assert_eq!(a.add(&b).unwrap(), Value::from(vec![1.5, 1.0]));
        assert_eq!(a.axpy(2.0, &b).unwrap(), Value::from(vec![2.0, 0.0]));
        assert_eq!(Value::from(3.0).mul(&a).unwrap(), Value::from(vec![3.0, 6.0]));
        assert!(a.mul(&b).is_err());
        assert!(a.add(&Value::from(1.0)).is_err());
        assert_eq!(a.norm(), 2.0);
    }

    #[test]
    fn grid_weights_integrate_constants() {
        let w = trapezoid_weights(16);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(grid_nodes(5), [0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(Space::Grid(1).validate().is_err());
        assert!(Space::Grid(16).contains(&Space::Grid(16).zero()));
    }
}
