//! The `indicial` binary: scripts, formats, exit codes and the REPL.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_indicial");

fn golden_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scripts/maxwell.mac")
}

fn temp_script(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("indicial-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn run_script(name: &str, body: &str, extra: &[&str]) -> Output {
    let path = temp_script(name, body);
    let mut args = vec!["--script", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn golden_script_transcript() {
    let o = run(&["--script", golden_path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let labels: Vec<&str> = out.lines().map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(labels, ["(%o5)", "(%t6)", "(%t12)", "(%t13)", "(%t14)", "(%t15)"]);
    let tail: Vec<&str> = out.lines().rev().take(3).collect();
    assert_eq!(
        tail,
        ["(%t15) j^{m}_{;m}", "(%t14) j^{m} - F^{m n}_{;n}", "(%t13) F^{m n}"]
    );
    assert!(stderr(&o).contains("warning: decsym(F,0,2"));
}

#[test]
fn empty_script_succeeds_silently() {
    let o = run_script("empty.mac", "/* nothing */\n", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
}

#[test]
fn parse_error_exits_one_and_runs_nothing() {
    let o = run_script("syntax.mac", "x([a],[]);\ny([a],[]\n", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).is_empty(), "nothing runs before a parse error");
    assert!(stderr(&o).contains("parse error"), "{}", stderr(&o));
}

#[test]
fn evaluation_error_exits_two_after_partial_transcript() {
    let o = run_script("triple.mac", "x([a],[]);\nx([a],[])*y([],[a])*z([a],[]);\nw;\n", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o), "(%o1) x_{a}\n");
    let err = stderr(&o);
    assert!(err.contains("error in statement 2 (line 2)"), "{err}");
    assert!(err.contains("three or more times"), "{err}");
}

#[test]
fn missing_file_is_reported() {
    let o = run(&["--script", "/nonexistent/indicial.mac"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn fixed_dimension_evaluates_traces() {
    let o = run_script("dim.mac", "contract(kdelta([a],[a]));\n", &["--dim", "4"]);
    assert_eq!(stdout(&o), "(%o1) 4\n");
    let o = run_script("dim.mac", "contract(kdelta([a],[a]));\n", &[]);
    assert_eq!(stdout(&o), "(%o1) dim\n");
}

#[test]
fn zero_dimension_is_rejected() {
    let o = run(&["--dim", "0", "--script", golden_path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "clap usage error");
}

#[test]
fn latex_format() {
    let o = run_script("latex.mac", "-1/4*F([a,b],[])*F([],[a,b]);\n", &["--format", "latex"]);
    assert_eq!(stdout(&o), "(%o1) -\\frac{1}{4} F_{a b}\\, F^{a b}\n");
}

#[test]
fn json_format_is_one_object_per_line() {
    let o = run(&["--script", golden_path().to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0]["kind"], "output");
    assert_eq!(lines[0]["number"], 5);
    assert_eq!(lines[5]["kind"], "show");
    assert_eq!(lines[5]["number"], 15);
}

#[test]
fn script_format_reads_back() {
    let o = run_script(
        "script.mac",
        "'covdiff(v([],[a]),b);\nidiff(phi([],[],a),b);\n",
        &["--format", "script"],
    );
    assert_eq!(stdout(&o), "(%o1) 'covdiff(v([],[a]),b)\n(%o2) phi([],[],a,b)\n");
}

#[test]
fn unknown_format_is_a_usage_error() {
    let o = run(&["--format", "html", "--script", golden_path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn trace_prints_euler_lagrange_steps() {
    let src = "imetric(g)$\neulerlagrange(1/2*g([],[a,b])*phi([],[],a)*phi([],[],b),phi);\n";
    let plain = stdout(&run_script("el.mac", src, &[]));
    assert_eq!(plain.lines().count(), 1);
    let traced = stdout(&run_script("el.mac", src, &["--trace"]));
    assert!(traced.lines().count() > 5, "{traced}");
    assert!(traced.contains("lagrangian"), "{traced}");
    assert!(traced.lines().last().unwrap().starts_with("(%o2)"));
}

#[test]
fn script_and_repl_conflict() {
    let o = run(&["--repl", "--script", golden_path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn repl_recovers_from_errors() {
    let mut child = Command::new(BIN)
        .arg("--repl")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"imetric(g)$\nx([a],[])*y([a],[]);\ncontract(g([],[a,b])*\nx([b],[]));\nquit;\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("(%i1) "), "{out}");
    assert!(out.contains("repeated with the same variance"), "{out}");
    assert!(out.contains("x^{a}"), "{out}");
}
