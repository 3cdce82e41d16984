use std::io::Write;
use std::process::{Command, Output};

fn chaindiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaindiff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn report(out: &Output) -> serde_json::Value {
    serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap()["report"].clone()
}

#[test]
fn partitions_lists_one_per_line() {
    let out = chaindiff(&["partitions", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<String> = stdout(&out).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "{{1,2,3}}");
    assert_eq!(lines[4], "{{1},{2},{3}}");
}

#[test]
fn diff_prints_closed_form_exp_rule() {
    let out = chaindiff(&["diff", "--dirs", "1", "exp o g", "--at", "x"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "exp(g(x)) * Dg(x;e1)");
}

#[test]
fn diff_json_and_trace() {
    let out = chaindiff(&["diff", "--json", "--dirs", "1", "pow[3] o g"]);
    let tree: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(tree["kind"], "product");
    assert_eq!(tree["children"][0]["value"], "3");

    let out = chaindiff(&["diff", "--trace", "--dirs", "1,2", "exp o g"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("exp(g(x))"));
    let traces: Vec<serde_json::Value> = lines.map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!traces.is_empty());
    assert!(traces.iter().all(|t| t["rule"].is_string() && t["input"].is_object() && t["output"].is_object()));
}

#[test]
fn diff_request_syntax() {
    let out = chaindiff(&["diff", "D[1,2] (f o g) @ x"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out).trim(),
        "D^2f(g(x);Dg(x;e1), Dg(x;e2)) + Df(g(x);D^2g(x;e1, e2))"
    );
}

#[test]
fn verify_example_passes() {
    let out = chaindiff(&[
        "verify", "--order", "2", "exp o lin[a]", "--point", "0,0", "--a", "1,1", "--dirs", "(1,0);(0,1)", "--tol", "1e-5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["passed"], true);
    assert_eq!(r["actual"], 1.0);
    assert!(r["residual"].as_f64().unwrap() <= 1e-5);
}

#[test]
fn verify_reads_bindings_file() {
    let mut file = tempfile();
    writeln!(file.1, "# unit weights\na: linear R2 = 1, 1").unwrap();
    let out = chaindiff(&[
        "verify", "exp o lin[a]", "--bindings", &file.0, "--point", "0.5,-0.25", "--dirs", "(1,2)",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let want = 0.25f64.exp() * 3.0;
    assert!((r["actual"].as_f64().unwrap() - want).abs() < 1e-12);
    assert_eq!(r["converged"], true);
    std::fs::remove_file(&file.0).unwrap();
}

fn tempfile() -> (String, std::fs::File) {
    let path = std::env::temp_dir().join(format!("chaindiff-bindings-{}.txt", std::process::id()));
    let file = std::fs::File::create(&path).unwrap();
    (path.to_string_lossy().into_owned(), file)
}

#[test]
fn failed_verification_exits_one() {
    let out = chaindiff(&["verify", "k", "--bind", "k: abs", "--numeric-fallback", "--point", "0", "--dirs", "(1)"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["passed"], false);
    assert_eq!(r["converged"], false);
}

#[test]
fn parse_and_usage_errors_exit_two() {
    let out = chaindiff(&["diff", "--dirs", "1", "exp o (g"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("column"));
    assert_eq!(chaindiff(&["canon", "pow[x] o g"]).status.code(), Some(2));
    assert_eq!(chaindiff(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(chaindiff(&["verify", "g", "--point", "1", "--dirs", "(1)"]).status.code(), Some(2));
    assert_eq!(chaindiff(&["verify", "g", "--bind", "g: wavelet", "--point", "1", "--dirs", "(1)"]).status.code(), Some(2));
}

#[test]
fn canon_normalizes() {
    let out = chaindiff(&["canon", "g(x) * 2 + 0 + g(x)*1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "3 * g(x)");
}
