#![allow(dead_code)]

use chaindiff::expr::{Expr, Scalar, SlotDirection};
use chaindiff::numeric::{fixtures, EvalContext, Value};
use rand::seq::SliceRandom;
use rand::Rng;

/// `|actual - reference| <= tol * (1 + |reference|)`
pub fn rel_close(actual: f64, reference: f64, tol: f64) -> bool {
    (actual - reference).abs() <= tol * (1.0 + reference.abs())
}

pub fn value_close(actual: &Value, reference: &Value, tol: f64) -> bool {
    match actual.distance(reference) {
        Ok(d) => d <= tol * (1.0 + reference.norm()),
        Err(_) => false,
    }
}

pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

pub fn random_vector(rng: &mut impl Rng, len: usize, scale: f64) -> Value {
    if len == 1 {
        Value::Scalar(uniform(rng, -scale, scale))
    } else {
        Value::Vector((0..len).map(|_| uniform(rng, -scale, scale)).collect())
    }
}

fn random_scalar(rng: &mut dyn rand::RngCore) -> Expr {
    match rng.gen_range(0..4) {
        0 => Expr::int(rng.gen_range(-3..=3)),
        1 => Expr::Scalar(Scalar::ratio(rng.gen_range(-5..=5), rng.gen_range(1..=4))),
        2 => Expr::float(*[0.5, -1.25, 2.0, 0.1].choose(rng).unwrap()),
        _ => Expr::int(rng.gen_range(1..=2)),
    }
}

fn random_function(rng: &mut dyn rand::RngCore, depth: u32) -> Expr {
    let atom = |rng: &mut dyn rand::RngCore| match rng.gen_range(0..5) {
        0 => Expr::func("g"),
        1 => Expr::func("h"),
        2 => Expr::Exp,
        3 => Expr::Power(rng.gen_range(1..=3)),
        _ => Expr::linear("a"),
    };
    if depth == 0 || rng.gen_bool(0.6) {
        atom(rng)
    } else {
        Expr::compose(atom(rng), random_function(rng, depth - 1))
    }
}

/// Random well-sorted value expression over `x`, `y`, `e1..e3`, univariate
/// symbols `g`, `h`, `lin[a]`, `exp`, `pow[k]`, and the bivariate `F`.
pub fn random_expr(rng: &mut dyn rand::RngCore, depth: u32) -> Expr {
    if depth == 0 {
        return match rng.gen_range(0..4) {
            0 => random_scalar(rng),
            1 => Expr::point("y"),
            2 => Expr::dir(rng.gen_range(1..=3)),
            _ => Expr::point("x"),
        };
    }
    let sub = |rng: &mut dyn rand::RngCore| random_expr(rng, depth - 1);
    match rng.gen_range(0..9) {
        0 => random_expr(rng, 0),
        1 | 2 => Expr::call(random_function(rng, 1), sub(rng)),
        3 => Expr::apply(Expr::func_n("F", 2), vec![sub(rng), sub(rng)]),
        4 => Expr::sum((0..rng.gen_range(2..=3)).map(|_| sub(rng)).collect()),
        5 => Expr::product((0..rng.gen_range(2..=3)).map(|_| sub(rng)).collect()),
        6 => {
            let mut dirs = [1u32, 2, 3];
            dirs.shuffle(rng);
            let order = rng.gen_range(1..=2);
            let target = if rng.gen_bool(0.5) { "g" } else { "h" };
            Expr::diff(
                Expr::func(target),
                sub(rng),
                dirs[..order].iter().map(|&d| Expr::dir(d)).collect(),
            )
        }
        7 => Expr::diff(Expr::func("g"), sub(rng), vec![sub(rng)]),
        _ => Expr::partial_diff(
            Expr::func_n("F", 2),
            vec![sub(rng), sub(rng)],
            vec![SlotDirection::new(rng.gen_range(1..=2), Expr::dir(rng.gen_range(1..=3)))],
        ),
    }
}

/// Scalar bindings for every symbol produced by [`random_expr`].
pub fn scalar_context(x: f64, y: f64, dirs: [f64; 3]) -> EvalContext {
    let mut ctx = EvalContext::new()
        .bind(fixtures::sin_scalar("g"))
        .bind(fixtures::scalar_poly("h", &[0.3, -0.5, 0.25]))
        .bind(fixtures::bivariate_poly("F", &[(1.0, 1, 1), (-0.5, 2, 0), (0.25, 0, 3)]))
        .bind(fixtures::linear("a", chaindiff::numeric::Space::Real, &[1.5]))
        .point("x", x)
        .point("y", y);
    for (i, d) in dirs.iter().enumerate() {
        ctx = ctx.direction(i as u32 + 1, *d);
    }
    ctx
}
