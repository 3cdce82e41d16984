//! Built-in concrete functions with exact differentials of every order.

use super::func::ConcreteFunc;
use super::value::{trapezoid_weights, Space, Value};
use super::NumericError;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn scalar_arg(args: &[Value]) -> Result<f64, NumericError> {
    args[0].scalar()
}

/// Space whose values have `len` components: `R` for one, `R^len` otherwise.
fn space_for(len: usize) -> Space {
    if len == 1 {
        Space::Real
    } else {
        Space::Euclidean(len)
    }
}

fn direction_product(dirs: &[(usize, Value)], weight: impl Fn(usize, &Value) -> f64) -> f64 {
    dirs.iter().map(|(slot, d)| weight(*slot, d)).product()
}

/// `x ↦ ⟨a, x⟩` on `space`.
pub fn linear(name: &str, space: Space, a: &[f64]) -> ConcreteFunc {
    assert_eq!(space.dim(), a.len(), "coefficient count must match the space");
    let (a1, a2) = (a.to_vec(), a.to_vec());
    ConcreteFunc::unary(name, space, Space::Real, move |x| {
        Value::Scalar(dot(&a1, x.components()))
    })
    .with_exact_differential(move |_, dirs| {
        Some(Value::Scalar(match dirs {
            [(_, eta)] => dot(&a2, eta.components()),
            _ => 0.0,
        }))
    })
}

/// `μ ↦ Σ w_i μ(t_i)` with trapezoid weights on an `n`-point grid.
pub fn grid_integral(name: &str, n: usize) -> ConcreteFunc {
    linear(name, Space::Grid(n), &trapezoid_weights(n))
}

/// `x ↦ xᵀAx + ⟨b, x⟩ + c` on `R^d` (or `R` when `d = 1`).
pub fn quadratic(name: &str, a: Vec<Vec<f64>>, b: Vec<f64>, c: f64) -> ConcreteFunc {
    let d = b.len();
    assert!(a.len() == d && a.iter().all(|r| r.len() == d), "A must be d×d");
    let form = move |a: &[Vec<f64>], u: &[f64], v: &[f64]| -> f64 {
        a.iter().zip(u).map(|(row, ui)| ui * dot(row, v)).sum()
    };
    let (a1, b1) = (a.clone(), b.clone());
    ConcreteFunc::unary(name, space_for(d), Space::Real, move |x| {
        let x = x.components();
        Value::Scalar(form(&a1, x, x) + dot(&b1, x) + c)
    })
    .with_exact_differential(move |args, dirs| {
        let x = args[0].components();
        Some(Value::Scalar(match dirs {
            [(_, e)] => {
                let e = e.components();
                form(&a, x, e) + form(&a, e, x) + dot(&b, e)
            }
            [(_, e1), (_, e2)] => {
                let (e1, e2) = (e1.components(), e2.components());
                form(&a, e1, e2) + form(&a, e2, e1)
            }
            _ => 0.0,
        }))
    })
}

/// `μ ↦ Σ w_i μ(t_i)²` on an `n`-point grid.
pub fn grid_square_integral(name: &str, n: usize) -> ConcreteFunc {
    let w = trapezoid_weights(n);
    let w1 = w.clone();
    let weighted = move |w: &[f64], u: &[f64], v: &[f64]| -> f64 {
        w.iter().zip(u).zip(v).map(|((wi, ui), vi)| wi * ui * vi).sum()
    };
    ConcreteFunc::unary(name, Space::Grid(n), Space::Real, move |m| {
        let m = m.components();
        Value::Scalar(weighted(&w1, m, m))
    })
    .with_exact_differential(move |args, dirs| {
        let m = args[0].components();
        Some(Value::Scalar(match dirs {
            [(_, e)] => 2.0 * weighted(&w, m, e.components()),
            [(_, e1), (_, e2)] => 2.0 * weighted(&w, e1.components(), e2.components()),
            _ => 0.0,
        }))
    })
}

/// `x ↦ exp(⟨a, x⟩)`.
pub fn exp_linear(name: &str, a: &[f64]) -> ConcreteFunc {
    let (a1, a2) = (a.to_vec(), a.to_vec());
    ConcreteFunc::unary(name, space_for(a.len()), Space::Real, move |x| {
        Value::Scalar(dot(&a1, x.components()).exp())
    })
    .with_exact_differential(move |args, dirs| {
        let base = dot(&a2, args[0].components()).exp();
        Some(Value::Scalar(
            base * direction_product(dirs, |_, d| dot(&a2, d.components())),
        ))
    })
}

fn poly_derivative(coeffs: &[f64], order: usize, x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(order)
        .map(|(k, c)| {
            let falling: f64 = (0..order).map(|j| (k - j) as f64).product();
            c * falling * x.powi((k - order) as i32)
        })
        .sum()
}

/// `x ↦ Σ c_k x^k` on `R`.
pub fn scalar_poly(name: &str, coeffs: &[f64]) -> ConcreteFunc {
    let (c1, c2) = (coeffs.to_vec(), coeffs.to_vec());
    ConcreteFunc::new(name, vec![Space::Real], Space::Real, move |args| {
        Ok(Value::Scalar(poly_derivative(&c1, 0, scalar_arg(args)?)))
    })
    .with_exact_differential(move |args, dirs| {
        let x = args[0].as_scalar()?;
        let scale = direction_product(dirs, |_, d| d.as_scalar().unwrap_or(f64::NAN));
        Some(Value::Scalar(poly_derivative(&c2, dirs.len(), x) * scale))
    })
}

fn scalar_smooth(name: &str, f: fn(f64) -> f64, nth: fn(usize, f64) -> f64) -> ConcreteFunc {
    ConcreteFunc::new(name, vec![Space::Real], Space::Real, move |args| {
        Ok(Value::Scalar(f(scalar_arg(args)?)))
    })
    .with_exact_differential(move |args, dirs| {
        let x = args[0].as_scalar()?;
        let scale = direction_product(dirs, |_, d| d.as_scalar().unwrap_or(f64::NAN));
        Some(Value::Scalar(nth(dirs.len(), x) * scale))
    })
}

/// `exp` on `R`.
pub fn exp_scalar(name: &str) -> ConcreteFunc {
    scalar_smooth(name, f64::exp, |_, x| x.exp())
}

/// `sin` on `R`.
pub fn sin_scalar(name: &str) -> ConcreteFunc {
    scalar_smooth(name, f64::sin, |n, x| match n % 4 {
        0 => x.sin(),
        1 => x.cos(),
        2 => -x.sin(),
        _ => -x.cos(),
    })
}

/// `x ↦ Mx` from `R^d` to `R^m` for an `m×d` matrix.
pub fn matrix_map(name: &str, m: Vec<Vec<f64>>) -> ConcreteFunc {
    let d = m.first().map_or(0, Vec::len);
    assert!(d > 0 && m.iter().all(|r| r.len() == d), "matrix rows must have equal nonzero length");
    let rows = m.len();
    let apply = move |m: &[Vec<f64>], v: &[f64]| -> Value {
        Value::Vector(m.iter().map(|r| dot(r, v)).collect())
    };
    let m1 = m.clone();
    ConcreteFunc::unary(name, Space::Euclidean(d), Space::Euclidean(rows), move |x| {
        apply(&m1, x.components())
    })
    .with_exact_differential(move |_, dirs| {
        Some(match dirs {
            [(_, e)] => apply(&m, e.components()),
            _ => Value::Vector(vec![0.0; rows]),
        })
    })
}

/// `μ ↦ μ²` pointwise on an `n`-point grid.
pub fn pointwise_square(name: &str, n: usize) -> ConcreteFunc {
    ConcreteFunc::unary(name, Space::Grid(n), Space::Grid(n), |m| m.map(|v| v * v))
        .with_exact_differential(move |args, dirs| {
            let m = args[0].components();
            Some(Value::Vector(match dirs {
                [(_, e)] => m.iter().zip(e.components()).map(|(a, b)| 2.0 * a * b).collect(),
                [(_, e1), (_, e2)] => e1
                    .components()
                    .iter()
                    .zip(e2.components())
                    .map(|(a, b)| 2.0 * a * b)
                    .collect(),
                _ => vec![0.0; n],
            }))
        })
}

/// `|x|` on `R`, without an exact differential.
pub fn abs_value(name: &str) -> ConcreteFunc {
    ConcreteFunc::unary(name, Space::Real, Space::Real, |x| x.map(f64::abs))
}

fn falling(k: u32, n: usize) -> f64 {
    (0..n as u32).map(|j| k as f64 - j as f64).product()
}

/// `(x, y) ↦ Σ c x^i y^j` on `R × R` for terms `(c, i, j)`.
pub fn bivariate_poly(name: &str, terms: &[(f64, u32, u32)]) -> ConcreteFunc {
    let (t1, t2) = (terms.to_vec(), terms.to_vec());
    ConcreteFunc::new(name, vec![Space::Real, Space::Real], Space::Real, move |args| {
        let (x, y) = (args[0].scalar()?, args[1].scalar()?);
        Ok(Value::Scalar(
            t1.iter().map(|&(c, i, j)| c * x.powi(i as i32) * y.powi(j as i32)).sum(),
        ))
    })
    .with_exact_differential(move |args, dirs| {
        let (x, y) = (args[0].as_scalar()?, args[1].as_scalar()?);
        let n1 = dirs.iter().filter(|(s, _)| *s == 1).count();
        let n2 = dirs.len() - n1;
        let scale = direction_product(dirs, |_, d| d.as_scalar().unwrap_or(f64::NAN));
        let sum: f64 = t2
            .iter()
            .filter(|&&(_, i, j)| n1 <= i as usize && n2 <= j as usize)
            .map(|&(c, i, j)| {
                c * falling(i, n1)
                    * falling(j, n2)
                    * x.powi(i as i32 - n1 as i32)
                    * y.powi(j as i32 - n2 as i32)
            })
            .sum();
        Some(Value::Scalar(sum * scale))
    })
}

/// `(x, y) ↦ exp(a x + b y)` on `R × R`.
pub fn bivariate_exp(name: &str, a: f64, b: f64) -> ConcreteFunc {
    ConcreteFunc::new(name, vec![Space::Real, Space::Real], Space::Real, move |args| {
        Ok(Value::Scalar((a * args[0].scalar()? + b * args[1].scalar()?).exp()))
    })
    .with_exact_differential(move |args, dirs| {
        let base = (a * args[0].as_scalar()? + b * args[1].as_scalar()?).exp();
        let scale = direction_product(dirs, |slot, d| {
            let coeff = if slot == 1 { a } else { b };
            coeff * d.as_scalar().unwrap_or(f64::NAN)
        });
        Some(Value::Scalar(base * scale))
    })
}

/// `(x, y) ↦ ⟨x, y⟩` on `R^d × R^d`.
pub fn inner_product(name: &str, d: usize) -> ConcreteFunc {
    let space = space_for(d);
    ConcreteFunc::new(name, vec![space, space], Space::Real, |args| {
        Ok(Value::Scalar(dot(args[0].components(), args[1].components())))
    })
    .with_exact_differential(|args, dirs| {
        let (x, y) = (args[0].components(), args[1].components());
        Some(Value::Scalar(match dirs {
            [(1, e)] => dot(e.components(), y),
            [(_, e)] => dot(x, e.components()),
            [(s1, e1), (s2, e2)] if s1 != s2 => dot(e1.components(), e2.components()),
            _ => 0.0,
        }))
    })
}

/// Smooth univariate fixtures used by property tests, paired with a sample
/// point and direction.
pub fn smooth_catalog() -> Vec<(ConcreteFunc, Value, Value)> {
    vec![
        (linear("lin2", Space::Euclidean(2), &[1.0, -2.0]), vec![0.3, 0.7].into(), vec![1.0, 0.5].into()),
        (grid_integral("int8", 8), Value::Vector(vec![0.5; 8]), Value::Vector((0..8).map(|i| i as f64 / 7.0).collect())),
        (
            quadratic("quad", vec![vec![2.0, 0.5], vec![0.5, 1.0]], vec![1.0, -1.0], 0.5),
            vec![0.2, -0.4].into(),
            vec![1.0, 2.0].into(),
        ),
        (grid_square_integral("sqint8", 8), Value::Vector((0..8).map(|i| (i as f64 / 7.0).sin()).collect()), Value::Vector(vec![1.0; 8])),
        (exp_linear("el", &[0.5, -0.25]), vec![0.4, 1.0].into(), vec![-1.0, 2.0].into()),
        (scalar_poly("cubic", &[1.0, -2.0, 0.5, 1.0]), 0.7.into(), 1.5.into()),
        (exp_scalar("exp"), 0.3.into(), (-0.8).into()),
        (sin_scalar("sin"), 1.1.into(), 2.0.into()),
        (matrix_map("mat", vec![vec![1.0, 2.0], vec![0.0, -1.0], vec![3.0, 0.5]]), vec![0.1, 0.2].into(), vec![1.0, -1.0].into()),
        (pointwise_square("psq4", 4), vec![0.1, 0.5, -0.3, 1.0].into(), vec![1.0, 0.0, 2.0, -1.0].into()),
    ]
}
