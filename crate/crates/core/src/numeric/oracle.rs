//! Numeric differentials of concrete functions.

use super::func::ConcreteFunc;
use super::scheme::{estimate_limit, ConvergenceReport, SequenceScheme};
use super::value::Value;
use super::NumericError;

/// Relative tolerance used to judge agreement across schemes.
pub const DEFAULT_REL_TOL: f64 = 1e-6;

/// Base step sizes for nested central differences of order 1 to 4.
pub const NESTED_STEPS: [f64; 4] = [1e-3, 2e-3, 5e-3, 1e-2];

/// Highest order supported by [`nth_diff_numeric`].
pub const MAX_NUMERIC_ORDER: usize = NESTED_STEPS.len();

fn require_univariate(f: &ConcreteFunc) -> Result<(), NumericError> {
    if f.arity() != 1 {
        return Err(NumericError::SpaceMismatch(format!(
            "`{}` has arity {}, expected a univariate function",
            f.name(),
            f.arity()
        )));
    }
    Ok(())
}

fn check_slot(f: &ConcreteFunc, slot: usize) -> Result<(), NumericError> {
    if slot == 0 || slot > f.arity() {
        return Err(NumericError::SlotOutOfRange {
            name: f.name().to_string(),
            slot,
            arity: f.arity(),
        });
    }
    Ok(())
}

fn check_direction(f: &ConcreteFunc, slot: usize, eta: &Value) -> Result<(), NumericError> {
    check_slot(f, slot)?;
    let space = f.domain()[slot - 1];
    if !space.contains(eta) {
        return Err(NumericError::SpaceMismatch(format!(
            "direction for slot {slot} of `{}` is not in {space}",
            f.name()
        )));
    }
    Ok(())
}

/// The chain-differential oracle needs a scheme that perturbs the direction
/// and one with sign-alternating `θ`, otherwise it only probes Gâteaux limits.
fn require_schemes(schemes: &[SequenceScheme]) -> Result<(), NumericError> {
    if schemes.len() < 2 {
        return Err(NumericError::InsufficientSchemes(format!(
            "need at least 2 schemes, got {}",
            schemes.len()
        )));
    }
    if !schemes.iter().any(|s| s.eta_perturbation.is_active()) {
        return Err(NumericError::InsufficientSchemes(
            "no scheme perturbs the direction".into(),
        ));
    }
    if !schemes.iter().any(|s| s.theta.alternates()) {
        return Err(NumericError::InsufficientSchemes(
            "no scheme alternates the sign of θ".into(),
        ));
    }
    Ok(())
}

/// Limit of `(f(x + θ Σ η_i in slot i) - f(x)) / θ` along each scheme.
fn directional_limit(
    f: &ConcreteFunc,
    args: &[Value],
    dirs: &[(usize, Value)],
    schemes: &[SequenceScheme],
) -> Result<ConvergenceReport, NumericError> {
    for (slot, eta) in dirs {
        check_direction(f, *slot, eta)?;
    }
    let base = f.call(args)?;
    let components: Vec<Value> = dirs.iter().map(|(_, eta)| eta.clone()).collect();
    estimate_limit(schemes, &components, DEFAULT_REL_TOL, |theta, etas| {
        let mut moved = args.to_vec();
        for ((slot, _), eta) in dirs.iter().zip(etas) {
            moved[slot - 1] = moved[slot - 1].axpy(theta, eta)?;
        }
        Ok(f.call(&moved)?.sub(&base)?.scale(1.0 / theta))
    })
}

/// Gâteaux differential along a single scheme with the direction held fixed.
pub fn gateaux_numeric(
    f: &ConcreteFunc,
    x: &Value,
    eta: &Value,
    scheme: &SequenceScheme,
) -> Result<ConvergenceReport, NumericError> {
    require_univariate(f)?;
    directional_limit(
        f,
        std::slice::from_ref(x),
        &[(1, eta.clone())],
        &[scheme.without_perturbation()],
    )
}

/// Chain differential estimated along several schemes.
pub fn chain_diff_numeric(
    f: &ConcreteFunc,
    x: &Value,
    eta: &Value,
    schemes: &[SequenceScheme],
) -> Result<ConvergenceReport, NumericError> {
    require_univariate(f)?;
    require_schemes(schemes)?;
    directional_limit(f, std::slice::from_ref(x), &[(1, eta.clone())], schemes)
}

/// Partial chain differential in `slot` (1-based) with the other arguments fixed.
pub fn partial_diff_numeric(
    f: &ConcreteFunc,
    xs: &[Value],
    slot: usize,
    eta: &Value,
    schemes: &[SequenceScheme],
) -> Result<ConvergenceReport, NumericError> {
    require_schemes(schemes)?;
    directional_limit(f, xs, &[(slot, eta.clone())], schemes)
}

/// Total chain differential, all arguments moved simultaneously.
pub fn total_diff_numeric(
    f: &ConcreteFunc,
    xs: &[Value],
    etas: &[Value],
    schemes: &[SequenceScheme],
) -> Result<ConvergenceReport, NumericError> {
    require_schemes(schemes)?;
    if etas.len() != f.arity() {
        return Err(NumericError::SpaceMismatch(format!(
            "`{}` has arity {}, got {} directions",
            f.name(),
            f.arity(),
            etas.len()
        )));
    }
    let dirs: Vec<(usize, Value)> = etas.iter().cloned().enumerate().map(|(i, e)| (i + 1, e)).collect();
    directional_limit(f, xs, &dirs, schemes)
}

/// `n`-th differential of a univariate function via nested central differences.
pub fn nth_diff_numeric(
    f: &ConcreteFunc,
    x: &Value,
    dirs: &[Value],
    order: usize,
) -> Result<Value, NumericError> {
    require_univariate(f)?;
    if dirs.len() != order {
        return Err(NumericError::SpaceMismatch(format!(
            "order {order} needs {order} directions, got {}",
            dirs.len()
        )));
    }
    let pairs: Vec<(usize, Value)> = dirs.iter().cloned().map(|d| (1, d)).collect();
    nth_partial_diff_numeric(f, std::slice::from_ref(x), &pairs)
}

/// Mixed partial differential with directions given as `(slot, direction)` pairs.
pub fn nth_partial_diff_numeric(
    f: &ConcreteFunc,
    args: &[Value],
    dirs: &[(usize, Value)],
) -> Result<Value, NumericError> {
    let order = dirs.len();
    if order > MAX_NUMERIC_ORDER {
        return Err(NumericError::UnsupportedOrder(order));
    }
    for (slot, eta) in dirs {
        check_direction(f, *slot, eta)?;
    }
    if order == 0 {
        return f.call(args);
    }
    nested_central(f, args, dirs, NESTED_STEPS[order - 1])
}

fn nested_central(
    f: &ConcreteFunc,
    args: &[Value],
    dirs: &[(usize, Value)],
    h: f64,
) -> Result<Value, NumericError> {
    let Some(((slot, eta), rest)) = dirs.split_last() else {
        return f.call(args);
    };
    let step = h / eta.norm().max(1.0);
    let central = |s: f64| -> Result<Value, NumericError> {
        let mut plus = args.to_vec();
        let mut minus = args.to_vec();
        plus[slot - 1] = args[slot - 1].axpy(s, eta)?;
        minus[slot - 1] = args[slot - 1].axpy(-s, eta)?;
        let hi = nested_central(f, &plus, rest, h)?;
        let lo = nested_central(f, &minus, rest, h)?;
        Ok(hi.sub(&lo)?.scale(0.5 / s))
    };
    let coarse = central(step)?;
    let fine = central(0.5 * step)?;
    fine.scale(4.0 / 3.0).sub(&coarse.scale(1.0 / 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::value::Space;

    fn sq_norm() -> ConcreteFunc {
        ConcreteFunc::unary("sq", Space::Euclidean(2), Space::Real, |x| {
            Value::Scalar(x.components().iter().map(|v| v * v).sum())
        })
    }

    fn close(a: &Value, b: f64, tol: f64) -> bool {
        (a.as_scalar().unwrap() - b).abs() <= tol
    }

    #[test]
    fn gateaux_of_squared_norm() {
        let f = sq_norm();
        let r = gateaux_numeric(&f, &vec![1.0, 0.0].into(), &vec![0.0, 1.0].into(), &SequenceScheme::geometric()).unwrap();
        assert!(r.converged);
        assert!(close(&r.estimate, 0.0, 1e-8));
        let r = gateaux_numeric(&f, &vec![1.0, 2.0].into(), &vec![3.0, -1.0].into(), &SequenceScheme::geometric()).unwrap();
        assert!(close(&r.estimate, 2.0, 1e-7));
    }

    #[test]
    fn gateaux_is_homogeneous() {
        let f = sq_norm();
        let x: Value = vec![0.3, -1.2].into();
        let eta: Value = vec![1.0, 0.5].into();
        let one = gateaux_numeric(&f, &x, &eta, &SequenceScheme::geometric()).unwrap().estimate;
        let three = gateaux_numeric(&f, &x, &eta.scale(3.0), &SequenceScheme::geometric()).unwrap().estimate;
        assert!(close(&three, 3.0 * one.as_scalar().unwrap(), 1e-7));
    }

    #[test]
    fn chain_diff_of_exp_linear() {
        let f = ConcreteFunc::unary("el", Space::Euclidean(2), Space::Real, |x| {
            Value::Scalar((2.0 * x.components()[0] - x.components()[1]).exp())
        });
        let r = chain_diff_numeric(&f, &vec![0.0, 0.0].into(), &vec![1.0, 1.0].into(), &SequenceScheme::defaults()).unwrap();
        assert!(r.converged);
        assert!(close(&r.estimate, 1.0, 1e-7));
    }

    #[test]
    fn abs_fails_to_converge_at_kink() {
        let f = ConcreteFunc::unary("abs", Space::Real, Space::Real, |x| x.map(f64::abs));
        let r = chain_diff_numeric(&f, &0.0.into(), &1.0.into(), &SequenceScheme::defaults()).unwrap();
        assert!(!r.converged);
        assert!(r.max_scheme_disagreement > r.tolerance_used);
    }

    #[test]
    fn scheme_requirements() {
        let f = sq_norm();
        let (x, e): (Value, Value) = (vec![1.0, 0.0].into(), vec![0.0, 1.0].into());
        assert!(chain_diff_numeric(&f, &x, &e, &[SequenceScheme::geometric()]).is_err());
        assert!(chain_diff_numeric(&f, &x, &e, &[SequenceScheme::geometric(), SequenceScheme::alternating()]).is_err());
        assert!(chain_diff_numeric(&f, &x, &vec![1.0].into(), &SequenceScheme::defaults()).is_err());
    }

    #[test]
    fn second_order_and_symmetry() {
        let f = sq_norm();
        let x: Value = vec![0.0, 0.0].into();
        let e1: Value = vec![1.0, 0.0].into();
        let e2: Value = vec![0.5, 2.0].into();
        let d = nth_diff_numeric(&f, &x, &[e1.clone(), e1.clone()], 2).unwrap();
        assert!(close(&d, 2.0, 1e-6));
        let ab = nth_diff_numeric(&f, &x, &[e1.clone(), e2.clone()], 2).unwrap();
        let ba = nth_diff_numeric(&f, &x, &[e2, e1], 2).unwrap();
        assert!(close(&ab, 1.0, 1e-6) && close(&ba, 1.0, 1e-6));
        let cube = ConcreteFunc::unary("c", Space::Real, Space::Real, |x| x.map(|v| v.powi(3)));
        let d3 = nth_diff_numeric(&cube, &1.0.into(), &[1.0.into(), 1.0.into(), 1.0.into()], 3).unwrap();
        assert!(close(&d3, 6.0, 1e-5));
        assert!(matches!(
            nth_diff_numeric(&cube, &1.0.into(), &vec![Value::from(1.0); 5], 5),
            Err(NumericError::UnsupportedOrder(5))
        ));
    }

    #[test]
    fn partial_and_total_of_product() {
        let f = ConcreteFunc::new("xy", vec![Space::Real, Space::Real], Space::Real, |a| {
            Ok(Value::Scalar(a[0].scalar()? * a[1].scalar()?))
        });
        let xs = [Value::from(2.0), Value::from(3.0)];
        let s = SequenceScheme::defaults();
        let p1 = partial_diff_numeric(&f, &xs, 1, &1.0.into(), &s).unwrap();
        let p2 = partial_diff_numeric(&f, &xs, 2, &1.0.into(), &s).unwrap();
        let t = total_diff_numeric(&f, &xs, &[1.0.into(), 1.0.into()], &s).unwrap();
        assert!(close(&p1.estimate, 3.0, 1e-7));
        assert!(close(&p2.estimate, 2.0, 1e-7));
        assert!(close(&t.estimate, 5.0, 1e-7));
        assert!(matches!(
            partial_diff_numeric(&f, &xs, 3, &1.0.into(), &s),
            Err(NumericError::SlotOutOfRange { .. })
        ));
    }
}
