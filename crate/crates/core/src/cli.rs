//! Command-line interface: argument definitions and command execution.

use std::fmt::Write as _;

use clap::{Parser, Subcommand};

use crate::bindings::{parse_binding, parse_bindings};
use crate::canon::{sort_of, Sort};
use crate::combinatorics::{partitions, MAX_PARTITION_SIZE};
use crate::diff::{nth_chain_diff, nth_chain_diff_traced};
use crate::dsl::{parse_request, Request};
use crate::expr::Expr;
use crate::numeric::{compile_value, verify, EvalContext, Space, Value};
use crate::serialize::{to_json, trace_to_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "chaindiff", version, about = "Symbolic higher-order chain differentials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Differentiate an expression symbolically.
    Diff {
        /// Expression, or a request such as `D[1,2] (f o g) @ x`.
        expr: String,
        /// Direction indices, e.g. `1,2`.
        #[arg(long, value_delimiter = ',')]
        dirs: Vec<u32>,
        /// Differential order; defaults to the number of directions.
        #[arg(long)]
        order: Option<usize>,
        /// Point variable to differentiate at.
        #[arg(long, default_value = "x")]
        at: String,
        /// Print one JSON line per applied rule after the result.
        #[arg(long)]
        trace: bool,
        /// Print the result as a JSON tree.
        #[arg(long)]
        json: bool,
    },
    /// Compare a symbolic differential against numeric estimates.
    Verify {
        /// Function or value expression, e.g. `exp o lin[a]`.
        expr: String,
        /// Bindings file.
        #[arg(long)]
        bindings: Option<String>,
        /// Inline binding line, e.g. `a: linear R2 = 1, 1` (repeatable).
        #[arg(long)]
        bind: Vec<String>,
        /// Point value, e.g. `0,0` or `1.5`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Direction vectors, e.g. `(1,0);(0,1)`.
        #[arg(long, allow_hyphen_values = true)]
        dirs: String,
        /// Differential order; defaults to the number of directions.
        #[arg(long)]
        order: Option<usize>,
        /// Relative tolerance.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Point variable name.
        #[arg(long, default_value = "x")]
        at: String,
        /// Estimate differentials of symbols without an exact differential.
        #[arg(long)]
        numeric_fallback: bool,
    },
    /// List the set partitions of {1..n}.
    Partitions { n: usize },
    /// Print the canonical form of an expression.
    Canon {
        expr: String,
        /// Point variable names (comma separated).
        #[arg(long, value_delimiter = ',', default_value = "x")]
        points: Vec<String>,
        #[arg(long)]
        json: bool,
    },
}

/// Captured result of running a command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn usage(message: impl std::fmt::Display) -> Self {
        Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

const VERIFY_FLAGS: &[&str] = &[
    "bindings",
    "bind",
    "point",
    "dirs",
    "order",
    "tol",
    "at",
    "numeric-fallback",
    "help",
];

/// Rewrites `verify` arguments of the form `--NAME v1,v2,...` for unknown
/// flags into `--bind "NAME: linear ... = v1,v2,..."`.
pub fn expand_inline_bindings(args: Vec<String>) -> Vec<String> {
    let Some(verb) = args.iter().position(|a| a == "verify") else {
        return args;
    };
    let mut out: Vec<String> = args[..=verb].to_vec();
    let mut rest = args[verb + 1..].iter().peekable();
    while let Some(arg) = rest.next() {
        let inline = arg
            .strip_prefix("--")
            .filter(|name| !name.is_empty() && !name.contains('=') && !VERIFY_FLAGS.contains(name));
        match (inline, rest.peek()) {
            (Some(name), Some(value)) => {
                out.push("--bind".into());
                out.push(format!("{name}: linear = {value}"));
                rest.next();
            }
            _ => out.push(arg.clone()),
        }
    }
    out
}

fn parse_value(text: &str) -> Result<Value, String> {
    let t = text.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<f64> = t
        .split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>().map_err(|_| format!("invalid number `{s}` in `{text}`"))
        })
        .collect::<Result<_, _>>()?;
    Ok(if parts.len() == 1 {
        Value::Scalar(parts[0])
    } else {
        Value::Vector(parts)
    })
}

/// Parses `(1,0);(0,1)` into direction values.
pub fn parse_directions(text: &str) -> Result<Vec<Value>, String> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_value)
        .collect()
}

fn space_of(v: &Value) -> Space {
    match v {
        Value::Scalar(_) => Space::Real,
        Value::Vector(xs) => Space::Euclidean(xs.len()),
    }
}

fn render(e: &Expr, json: bool) -> String {
    if json {
        to_json(e)
    } else {
        e.to_string()
    }
}

/// Executes a command and captures its output.
pub fn run(cmd: &Command) -> Outcome {
    match cmd {
        Command::Partitions { n } => run_partitions(*n),
        Command::Canon { expr, points, json } => {
            let points: Vec<&str> = points.iter().map(String::as_str).collect();
            match parse_request(expr, &points).and_then(|r| r.evaluate()) {
                Ok(e) => Outcome::ok(format!("{}\n", render(&e, *json))),
                Err(e) => Outcome::usage(e),
            }
        }
        Command::Diff {
            expr,
            dirs,
            order,
            at,
            trace,
            json,
        } => run_diff(expr, dirs, *order, at, *trace, *json),
        Command::Verify {
            expr,
            bindings,
            bind,
            point,
            dirs,
            order,
            tol,
            at,
            numeric_fallback,
        } => run_verify(VerifyArgs {
            expr,
            bindings: bindings.as_deref(),
            bind,
            point,
            dirs,
            order: *order,
            tol: *tol,
            at,
            numeric_fallback: *numeric_fallback,
        }),
    }
}

fn run_partitions(n: usize) -> Outcome {
    if n > MAX_PARTITION_SIZE {
        return Outcome::usage(format!("n must be at most {MAX_PARTITION_SIZE}"));
    }
    match partitions(n) {
        Ok(ps) => Outcome::ok(ps.iter().fold(String::new(), |mut s, p| {
            let _ = writeln!(s, "{p}");
            s
        })),
        Err(e) => Outcome::usage(e),
    }
}

fn run_diff(text: &str, dirs: &[u32], order: Option<usize>, at: &str, trace: bool, json: bool) -> Outcome {
    let request = match parse_request(text, &[at]) {
        Ok(r) => r,
        Err(e) => return Outcome::usage(e),
    };
    let (expr, point, directions) = match request {
        Request::Differential {
            expr,
            point,
            directions,
        } => {
            if !dirs.is_empty() || order.is_some() {
                return Outcome::usage("`--dirs`/`--order` cannot be combined with a `D[...]` request");
            }
            (expr, point, directions)
        }
        Request::Expr { expr, point } => {
            let directions: Vec<u32> = match (dirs.is_empty(), order) {
                (true, None) => vec![1],
                (true, Some(n)) => (1..=n as u32).collect(),
                (false, Some(n)) if n != dirs.len() => {
                    return Outcome::usage(format!(
                        "--order {n} does not match {} direction(s)",
                        dirs.len()
                    ))
                }
                (false, _) => dirs.to_vec(),
            };
            (expr, point.unwrap_or_else(|| at.to_string()), directions)
        }
    };
    let mut traces = Vec::new();
    let result = if trace {
        nth_chain_diff_traced(&expr, &point, &directions, &mut traces)
    } else {
        nth_chain_diff(&expr, &point, &directions)
    };
    match result {
        Ok(d) => {
            let mut out = format!("{}\n", render(&d, json));
            for t in &traces {
                out.push_str(&trace_to_json(t));
                out.push('\n');
            }
            Outcome::ok(out)
        }
        Err(e) => Outcome::usage(e),
    }
}

struct VerifyArgs<'a> {
    expr: &'a str,
    bindings: Option<&'a str>,
    bind: &'a [String],
    point: &'a str,
    dirs: &'a str,
    order: Option<usize>,
    tol: f64,
    at: &'a str,
    numeric_fallback: bool,
}

fn build_context(args: &VerifyArgs) -> Result<EvalContext, String> {
    let mut ctx = EvalContext::new().with_numeric_fallback(args.numeric_fallback);
    if let Some(path) = args.bindings {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read `{path}`: {e}"))?;
        for f in parse_bindings(&text).map_err(|e| e.to_string())? {
            ctx = ctx.bind(f);
        }
    }
    for line in args.bind {
        let f = parse_binding(line).map_err(|e| format!("binding `{line}`: {e}"))?;
        ctx = ctx.bind(f);
    }
    Ok(ctx)
}

fn run_verify(args: VerifyArgs) -> Outcome {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Outcome::usage("--tol must be positive");
    }
    let mut ctx = match build_context(&args) {
        Ok(c) => c,
        Err(e) => return Outcome::usage(e),
    };
    let point = match parse_value(args.point) {
        Ok(v) => v,
        Err(e) => return Outcome::usage(e),
    };
    let etas = match parse_directions(args.dirs) {
        Ok(d) if !d.is_empty() => d,
        Ok(_) => return Outcome::usage("--dirs needs at least one direction"),
        Err(e) => return Outcome::usage(e),
    };
    if let Some(n) = args.order {
        if n != etas.len() {
            return Outcome::usage(format!("--order {n} does not match {} direction(s)", etas.len()));
        }
    }
    let expr = match parse_request(args.expr, &[args.at]) {
        Ok(Request::Expr { expr, point: None }) => expr,
        Ok(_) => return Outcome::usage("verify takes a plain expression; use --at, --order and --dirs"),
        Err(e) => return Outcome::usage(e),
    };
    let value_expr = match sort_of(&expr) {
        Ok(Sort::Function(1)) => Expr::call(expr.clone(), Expr::point(args.at)),
        Ok(Sort::Function(n)) => {
            return Outcome::usage(format!("expected a univariate function, found arity {n}"))
        }
        Ok(_) => expr.clone(),
        Err(e) => return Outcome::usage(e),
    };
    let indices: Vec<u32> = (1..=etas.len() as u32).collect();
    ctx = ctx.point(args.at, point.clone());
    for (i, eta) in indices.iter().zip(etas) {
        ctx = ctx.direction(*i, eta);
    }
    let symbolic = match nth_chain_diff(&value_expr, args.at, &indices) {
        Ok(d) => d,
        Err(e) => return Outcome::usage(e),
    };
    let report = compile_value(&value_expr, &ctx, args.at, space_of(&point))
        .and_then(|target| verify(&symbolic, &target, &ctx, args.at, &indices, args.tol));
    match report {
        Ok(r) => {
            let body = serde_json::json!({
                "symbolic": symbolic.to_string(),
                "report": r,
            });
            let text = serde_json::to_string_pretty(&body).expect("reports always serialize");
            Outcome {
                code: if r.passed { EXIT_OK } else { EXIT_VERIFY_FAILED },
                stdout: format!("{text}\n"),
                stderr: String::new(),
            }
        }
        Err(e) => Outcome::usage(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &[&str]) -> Vec<String> {
        s.iter().map(|a| a.to_string()).collect()
    }

    #[test]
    fn inline_bindings_are_expanded() {
        let out = expand_inline_bindings(args(&["chaindiff", "verify", "exp o lin[a]", "--point", "0,0", "--a", "1,1"]));
        assert_eq!(
            out,
            args(&["chaindiff", "verify", "exp o lin[a]", "--point", "0,0", "--bind", "a: linear = 1,1"])
        );
        let untouched = args(&["chaindiff", "diff", "--a", "1"]);
        assert_eq!(expand_inline_bindings(untouched.clone()), untouched);
    }

    #[test]
    fn exp_of_linear_verifies() {
        let cli = Cli::parse_from(expand_inline_bindings(args(&[
            "chaindiff", "verify", "--order", "2", "exp o lin[a]", "--point", "0,0", "--a", "1,1", "--dirs",
            "(1,0);(0,1)", "--tol", "1e-5",
        ])));
        let out = run(&cli.command);
        assert_eq!(out.code, EXIT_OK, "{}{}", out.stdout, out.stderr);
        assert!(out.stdout.contains("\"passed\": true"));
    }

    #[test]
    fn diff_prints_closed_form() {
        let cli = Cli::parse_from(args(&["chaindiff", "diff", "--dirs", "1", "exp o g", "--at", "x"]));
        assert_eq!(run(&cli.command), Outcome::ok("exp(g(x)) * Dg(x;e1)\n".into()));
        let bad = Cli::parse_from(args(&["chaindiff", "diff", "--dirs", "1,2", "--order", "3", "g"]));
        assert_eq!(run(&bad.command).code, EXIT_USAGE);
    }

    #[test]
    fn partitions_of_three() {
        let out = run(&Command::Partitions { n: 3 });
        assert_eq!(out.stdout, "{{1,2,3}}\n{{1,2},{3}}\n{{1,3},{2}}\n{{1},{2,3}}\n{{1},{2},{3}}\n");
    }
}
