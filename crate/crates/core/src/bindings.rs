//! Text format binding symbol names to built-in concrete functions.
//!
//! One binding per line, `#` starts a comment:
//!
//! ```text
//! name: kind [space [-> space]] [= data]
//! ```
//!
//! Spaces are `R`, `R<d>` (e.g. `R2`), and `G<n>` (functions on an `n`-point
//! grid of `[0, 1]`). Numbers in `data` are separated by commas, rows or
//! terms by `;`, and the parts of a quadratic by `|`.

use thiserror::Error;

use crate::numeric::fixtures;
use crate::numeric::{ConcreteFunc, Space};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bindings line {line}: {message}")]
pub struct BindingError {
    pub line: usize,
    pub message: String,
}

/// Supported kinds with their expected syntax, for help texts.
pub const KINDS: &[(&str, &str)] = &[
    ("linear", "linear SPACE = a1, ..., ad"),
    ("quadratic", "quadratic SPACE = A rows separated by ; | b | c"),
    ("poly", "poly [R] = c0, c1, ..."),
    ("exp", "exp [R]"),
    ("sin", "sin [R]"),
    ("abs", "abs [R]"),
    ("explinear", "explinear SPACE = a1, ..., ad"),
    ("matrix", "matrix R<d> -> R<m> = m rows separated by ;"),
    ("grid_integral", "grid_integral G<n>"),
    ("grid_square_integral", "grid_square_integral G<n>"),
    ("grid_square", "grid_square G<n>"),
    ("bipoly", "bipoly = c, i, j; c, i, j; ..."),
    ("biexp", "biexp = a, b"),
    ("inner", "inner SPACE"),
];

pub fn parse_space(text: &str) -> Result<Space, String> {
    let text = text.trim();
    let size = |rest: &str| -> Result<usize, String> {
        rest.parse::<usize>().map_err(|_| format!("invalid space `{text}`"))
    };
    let space = match text {
        "R" => Space::Real,
        _ if text.starts_with('R') => Space::Euclidean(size(&text[1..])?),
        _ if text.starts_with('G') => Space::Grid(size(&text[1..])?),
        _ => return Err(format!("invalid space `{text}`; expected R, R<d>, or G<n>")),
    };
    space.validate().map_err(|e| e.to_string())?;
    Ok(space)
}

fn numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>().map_err(|_| format!("invalid number `{s}`"))
        })
        .collect()
}

fn rows(text: &str) -> Result<Vec<Vec<f64>>, String> {
    text.split(';').map(numbers).collect()
}

/// The space of a coefficient vector of length `len`.
pub fn space_for_len(len: usize) -> Space {
    if len == 1 {
        Space::Real
    } else {
        Space::Euclidean(len)
    }
}

/// `name: linear` over the space matching the coefficient count.
pub fn linear_binding(name: &str, coeffs: &[f64]) -> ConcreteFunc {
    fixtures::linear(name, space_for_len(coeffs.len()), coeffs)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses one non-empty binding line (without comments).
pub fn parse_binding(line: &str) -> Result<ConcreteFunc, String> {
    let (name, rest) = line
        .split_once(':')
        .ok_or("expected `name: kind ...`")?;
    let name = name.trim();
    if !is_identifier(name) {
        return Err(format!("invalid name `{name}`"));
    }
    let (head, data) = match rest.split_once('=') {
        Some((h, d)) => (h.trim(), Some(d.trim())),
        None => (rest.trim(), None),
    };
    let (kind, spaces) = match head.split_once(char::is_whitespace) {
        Some((k, s)) => (k, s.trim()),
        None => (head, ""),
    };
    let (domain, codomain) = match spaces.split_once("->") {
        Some((d, c)) => (Some(parse_space(d)?), Some(parse_space(c)?)),
        None if spaces.is_empty() => (None, None),
        None => (Some(parse_space(spaces)?), None),
    };
    let need_data = || data.ok_or_else(|| format!("`{kind}` needs `= ...` data"));
    let no_data = || match data {
        Some(_) => Err(format!("`{kind}` takes no data")),
        None => Ok(()),
    };
    let need_domain = || domain.ok_or_else(|| format!("`{kind}` needs a space"));
    let scalar_only = || match domain {
        None | Some(Space::Real) => Ok(()),
        Some(s) => Err(format!("`{kind}` is defined on R, not {s}")),
    };
    let grid = || match domain {
        Some(Space::Grid(n)) => Ok(n),
        _ => Err(format!("`{kind}` needs a grid space G<n>")),
    };
    if codomain.is_some() && kind != "matrix" {
        return Err(format!("`{kind}` does not take a codomain"));
    }
    let check_len = |space: Space, len: usize| {
        if space.dim() == len {
            Ok(())
        } else {
            Err(format!("{space} needs {} coefficient(s), got {len}", space.dim()))
        }
    };
    let f = match kind {
        "linear" | "explinear" => {
            let a = numbers(need_data()?)?;
            let space = domain.unwrap_or_else(|| space_for_len(a.len()));
            check_len(space, a.len())?;
            if kind == "linear" {
                fixtures::linear(name, space, &a)
            } else if matches!(space, Space::Grid(_)) {
                return Err("`explinear` is defined on R or R<d>".into());
            } else {
                fixtures::exp_linear(name, &a)
            }
        }
        "quadratic" => {
            let parts: Vec<&str> = need_data()?.split('|').collect();
            let [a, b, c] = parts.as_slice() else {
                return Err("quadratic data is `A | b | c`".into());
            };
            let (a, b, c) = (rows(a)?, numbers(b)?, c.trim().parse::<f64>().map_err(|_| format!("invalid number `{}`", c.trim()))?);
            let space = domain.unwrap_or_else(|| space_for_len(b.len()));
            check_len(space, b.len())?;
            if matches!(space, Space::Grid(_)) {
                return Err("`quadratic` is defined on R or R<d>".into());
            }
            if a.len() != b.len() || a.iter().any(|r| r.len() != b.len()) {
                return Err(format!("A must be {0}×{0}", b.len()));
            }
            fixtures::quadratic(name, a, b, c)
        }
        "poly" => {
            scalar_only()?;
            fixtures::scalar_poly(name, &numbers(need_data()?)?)
        }
        "exp" | "sin" | "abs" => {
            scalar_only()?;
            no_data()?;
            match kind {
                "exp" => fixtures::exp_scalar(name),
                "sin" => fixtures::sin_scalar(name),
                _ => fixtures::abs_value(name),
            }
        }
        "matrix" => {
            let m = rows(need_data()?)?;
            let d = m[0].len();
            if m.iter().any(|r| r.len() != d) {
                return Err("matrix rows must have equal length".into());
            }
            if let Some(dom) = domain {
                if dom != Space::Euclidean(d) {
                    return Err(format!("matrix rows have {d} entries but the domain is {dom}"));
                }
            }
            if let Some(cod) = codomain {
                if cod != Space::Euclidean(m.len()) {
                    return Err(format!("matrix has {} rows but the codomain is {cod}", m.len()));
                }
            }
            if d < 2 || m.len() < 2 {
                return Err("matrix maps need at least a 2×2 matrix; use linear for functionals".into());
            }
            fixtures::matrix_map(name, m)
        }
        "grid_integral" => {
            no_data()?;
            fixtures::grid_integral(name, grid()?)
        }
        "grid_square_integral" => {
            no_data()?;
            fixtures::grid_square_integral(name, grid()?)
        }
        "grid_square" => {
            no_data()?;
            fixtures::pointwise_square(name, grid()?)
        }
        "bipoly" => {
            let terms = rows(need_data()?)?
                .into_iter()
                .map(|t| match t.as_slice() {
                    [c, i, j] if *i >= 0.0 && *j >= 0.0 && i.fract() == 0.0 && j.fract() == 0.0 => {
                        Ok((*c, *i as u32, *j as u32))
                    }
                    _ => Err("bipoly terms are `c, i, j` with non-negative integer powers".to_string()),
                })
                .collect::<Result<Vec<_>, _>>()?;
            scalar_only()?;
            fixtures::bivariate_poly(name, &terms)
        }
        "biexp" => {
            scalar_only()?;
            match numbers(need_data()?)?.as_slice() {
                [a, b] => fixtures::bivariate_exp(name, *a, *b),
                _ => return Err("biexp data is `a, b`".into()),
            }
        }
        "inner" => {
            no_data()?;
            match need_domain()? {
                Space::Grid(_) => return Err("`inner` is defined on R or R<d>".into()),
                s => fixtures::inner_product(name, s.dim()),
            }
        }
        other => {
            let known: Vec<&str> = KINDS.iter().map(|(k, _)| *k).collect();
            return Err(format!("unknown kind `{other}`; expected one of {}", known.join(", ")));
        }
    };
    Ok(f)
}

/// Parses a whole bindings file.
pub fn parse_bindings(text: &str) -> Result<Vec<ConcreteFunc>, BindingError> {
    let mut out: Vec<ConcreteFunc> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| BindingError { line: i + 1, message };
        let f = parse_binding(line).map_err(err)?;
        if out.iter().any(|g| g.name() == f.name()) {
            return Err(err(format!("`{}` is bound twice", f.name())));
        }
        out.push(f);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Value;

    #[test]
    fn parses_every_kind() {
        let text = "\
# fixtures
a: linear R2 = 1, 1
m: linear G4 = 0.25, 0.25, 0.25, 0.25
q: quadratic R2 = 2, 0.5; 0.5, 1 | 1, -1 | 0.5
p: poly = 0.1, -1, 0.5, 0.3
e: exp
s: sin R
k: abs
el: explinear R2 = 0.5, -0.25
M: matrix R2 -> R3 = 1, 2; 0, -1; 3, 0.5
gi: grid_integral G16
gs: grid_square_integral G16
sq: grid_square G16   # pointwise
F: bipoly = 1, 1, 1; 2, 2, 0
H: biexp = 1, -1
I: inner R3
";
        let fs = parse_bindings(text).unwrap();
        assert_eq!(fs.len(), 15);
        let a = &fs[0];
        assert_eq!(a.call1(&vec![2.0, 3.0].into()).unwrap(), Value::Scalar(5.0));
        assert_eq!(fs[8].codomain(), Space::Euclidean(3));
        assert_eq!(fs[13].arity(), 2);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_bindings("a: linear R2 = 1, 1\n\nb: linear R3 = 1, 2\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(parse_bindings("a: wavelet R").is_err());
        assert!(parse_bindings("a: linear R2 = 1\n").is_err());
        assert!(parse_bindings("a: exp R2").is_err());
        assert!(parse_bindings("a: grid_integral G1").is_err());
        assert!(parse_bindings("a: linear R = 1\na: exp").is_err());
        assert!(parse_bindings("1a: exp").is_err());
    }
}
