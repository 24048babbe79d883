use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde::Deserialize;
use tempfile::TempDir;

use dtpasp::dt::{solve, UtilityReport};
use dtpasp::lang::load;

const EX2: &str = "0.3::a. 0.4::b. qr :- a. qr ; nqr :- b.";
const EX3: &str = "0.3::a. 0.4::b. qr :- a. qr ; nqr :- b. :- a, b.";
const EX5: &str = "0.3::a. 0.4::b. decision da. decision db. utility(qr,2). utility(nqr,-12). \
                   qr :- da, a. qr ; nqr :- db, b.";
const EX6: &str = include_str!("../../core/tests/data/example6.lp");
const C_RUN: &str = include_str!("../../core/tests/data/c_run.cnf");
const CYCLIC: &str = "0.5::a. p :- q. q :- p. p :- a. decision d. utility(p,1).";

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace { dir: tempfile::tempdir().unwrap() }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        fs::write(&path, text).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn dtpasp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtpasp"))
        .args(args)
        .env_remove("DTPASP_JOBS")
        .env_remove("DTPASP_ATOM_CAP")
        .env_remove("DTPASP_FACT_CAP")
        .env_remove("DTPASP_TIMEOUT")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn success(o: &Output) -> String {
    assert!(o.status.success(), "status {:?}, stderr: {}", o.status, stderr(o));
    stdout(o)
}

#[derive(Deserialize)]
struct SolveJson {
    method: String,
    report: UtilityReport,
}

#[test]
fn credal_queries_print_bounds() {
    let ws = Workspace::new();
    let ex2 = ws.file("ex2.lp", EX2);
    assert_eq!(success(&dtpasp(&["query", p(&ex2), "--query", "qr"])), "qr: lower=0.3 upper=0.58 inc=0\n");
    let ex3 = ws.file("ex3.lp", EX3);
    let out = success(&dtpasp(&["query", p(&ex3), "--query", "qr", "--query", "not qr"]));
    assert_eq!(out, "qr: lower=0.18 upper=0.46 inc=0.12\nnot qr: lower=0.42 upper=0.7 inc=0.12\n");
}

#[test]
fn query_json_has_one_entry_per_query() {
    let ws = Workspace::new();
    let ex3 = ws.file("ex3.lp", EX3);
    let out = success(&dtpasp(&["--json", "query", p(&ex3), "--query", "qr", "--query", "nqr"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let entries = v.as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["query"], "qr");
    assert!((entries[0]["lower"].as_f64().unwrap() - 0.18).abs() < 1e-12);
}

#[test]
fn unknown_query_atom_is_a_semantic_error() {
    let ws = Workspace::new();
    let ex2 = ws.file("ex2.lp", EX2);
    let o = dtpasp(&["query", p(&ex2), "--query", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nosuch"), "{}", stderr(&o));
}

#[test]
fn example_five_by_both_methods() {
    let ws = Workspace::new();
    let ex5 = ws.file("ex5.lp", EX5);
    let out = success(&dtpasp(&["solve", p(&ex5), "--method", "enum"]));
    assert!(out.starts_with("method: enum\nlower: {da} 0.6\nupper: {da,db} 1.16\n"), "{out}");
    assert!(out.contains("  {db} [-4.8, 0.8] inc=0\n"), "{out}");
    assert!(out.contains("  {da,db} [-2.76, 1.16] inc=0\n"), "{out}");
    assert!(out.ends_with("pairs evaluated: 16\n"), "{out}");
    let out = success(&dtpasp(&["solve", p(&ex5), "--method", "amc3"]));
    assert_eq!(out, "method: amc3\nlower: {da} 0.6\nupper: {da,db} 1.16\n");
}

#[test]
fn example_six_optima() {
    let ws = Workspace::new();
    let ex6 = ws.file("ex6.lp", EX6);
    for method in ["enum", "amc3"] {
        let out = success(&dtpasp(&["solve", p(&ex6), "--method", method]));
        assert!(out.contains("lower: {target(bob)} 1.5\n"), "{method}: {out}");
        assert!(out.contains("upper: {target(anna),target(bob)} 4.3\n"), "{method}: {out}");
    }
}

#[test]
fn json_report_matches_the_library() {
    let ws = Workspace::new();
    let ex5 = ws.file("ex5.lp", EX5);
    let out = success(&dtpasp(&["--json", "solve", p(&ex5), "--method", "enum"]));
    let parsed: SolveJson = serde_json::from_str(&out).unwrap();
    assert_eq!(parsed.method, "enum");
    let expected = solve(&load(EX5).unwrap()).unwrap();
    assert_eq!(parsed.report, expected);
}

#[test]
fn program_without_decisions() {
    let ws = Workspace::new();
    let f = ws.file("z.lp", "0.5::a. q :- a. utility(q,3).");
    for method in ["enum", "amc3", "auto"] {
        let out = success(&dtpasp(&["solve", p(&f), "--method", method]));
        assert!(out.contains("lower: {} 1.5\nupper: {} 1.5\n"), "{method}: {out}");
    }
}

#[test]
fn auto_falls_back_on_cyclic_programs() {
    let ws = Workspace::new();
    let f = ws.file("cyc.lp", CYCLIC);
    let o = dtpasp(&["solve", p(&f)]);
    let out = success(&o);
    assert!(out.starts_with("method: enum\nlower: {} 0.5\n"), "{out}");
    assert!(stderr(&o).contains("falling back to enumeration"), "{}", stderr(&o));
    let o = dtpasp(&["compile", p(&f)]);
    assert!(success(&o).starts_with("method: enum\n"));
    let o = dtpasp(&["solve", p(&f), "--method", "amc3"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn compile_dumps_a_circuit() {
    let ws = Workspace::new();
    let ex5 = ws.file("ex5.lp", EX5);
    let nnf = ws.path("ex5.nnf");
    let out = success(&dtpasp(&["compile", p(&ex5), "--dump-nnf", p(&nnf)]));
    assert!(out.contains("circuit: "), "{out}");
    let text = fs::read_to_string(&nnf).unwrap();
    dtpasp::compile::parse_nnf(&text).unwrap();
}

#[test]
fn compile_accepts_dimacs() {
    let ws = Workspace::new();
    let f = ws.file("c_run.cnf", C_RUN);
    let out = success(&dtpasp(&["compile", p(&f)]));
    assert!(out.contains("circuit: "), "{out}");
}

#[test]
fn tree_decomposition_of_the_running_cnf() {
    let ws = Workspace::new();
    let f = ws.file("c_run.cnf", C_RUN);
    let td = ws.path("c_run.td");
    let out = success(&dtpasp(&["td", p(&f), "--out-td", p(&td)]));
    assert!(out.starts_with("width: 2\n"), "{out}");
    assert!(out.contains("audit: ok"), "{out}");
    let text = fs::read_to_string(&td).unwrap();
    let (parsed, vertices) = dtpasp::treedecomp::parse_td(&text).unwrap();
    assert_eq!(vertices, 9);
    assert_eq!(parsed.width(), 2);
    let out = success(&dtpasp(&["td", p(&f), "--no-definability"]));
    let width: usize = out.lines().next().unwrap().strip_prefix("width: ").unwrap().parse().unwrap();
    assert!(width >= 4, "{out}");
}

#[test]
fn bench_writes_one_row_per_size() {
    let ws = Workspace::new();
    let csv_path = ws.path("t1.csv");
    success(&dtpasp(&["bench", "--suite", "t1", "--params", "n=2,d=1..8", "--out", p(&csv_path)]));
    let text = fs::read_to_string(&csv_path).unwrap();
    assert_eq!(text.lines().count(), 9, "{text}");
    let out = success(&dtpasp(&["bench", "--suite", "t3", "--params", "size=1..2", "--method", "both"]));
    assert_eq!(out.lines().count(), 5, "{out}");
}

#[test]
fn parse_errors_exit_with_one() {
    let ws = Workspace::new();
    let f = ws.file("bad.lp", "a :- .");
    let o = dtpasp(&["solve", p(&f)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("1:6"), "{err}");
    assert_eq!(err.matches("1:6").count(), 1, "{err}");
}

#[test]
fn resource_limits_exit_with_three() {
    let o = dtpasp(&["bench", "--suite", "t1", "--params", "n=2,d=30"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let ws = Workspace::new();
    let ex2 = ws.file("ex2.lp", EX2);
    let o = dtpasp(&["--fact-cap", "1", "query", p(&ex2), "--query", "qr"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn missing_input_file() {
    let o = dtpasp(&["solve", "/nonexistent/input.lp"]);
    assert_eq!(o.status.code(), Some(2));
}
