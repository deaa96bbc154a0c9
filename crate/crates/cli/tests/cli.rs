use std::path::Path;
use std::process::{Command, Output};

use liftsat_core::corpus::pigeonhole;

fn liftsat(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liftsat"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("run liftsat")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn with_pigeons() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("pigeonhole.lp"), pigeonhole(10, 5, 2)).unwrap();
    dir
}

#[test]
fn solve_writes_models_and_trace() {
    let dir = with_pigeons();
    let o = liftsat(&["solve", "pigeonhole.lp", "--method", "lt1", "--output-dir", "out"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("lifted used: 2"));

    let lifted: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/pigeonhole.lifted.json")).unwrap()).unwrap();
    let mut muls: Vec<u64> = lifted["mul"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).collect();
    muls.sort();
    assert_eq!(muls, vec![5, 10]);
    assert!(dir.path().join("out/pigeonhole.trace.json").exists());

    let v = liftsat(&["verify", "pigeonhole.lp", "out/pigeonhole.expanded.json"], dir.path());
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(stdout(&v).trim(), "valid");

    let e = liftsat(
        &["expand", "pigeonhole.lp", "out/pigeonhole.lifted.json", "-o", "again.json"],
        dir.path(),
    );
    assert_eq!(e.status.code(), Some(0), "{}", stderr(&e));
    let a = std::fs::read_to_string(dir.path().join("again.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("out/pigeonhole.expanded.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn zero_iteration_budget_exhausts() {
    let dir = with_pigeons();
    let o = liftsat(&["solve", "pigeonhole.lp", "--method", "lt1", "--max-iters", "0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = liftsat(&["solve", "missing.lp"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("file not found"));
}

#[test]
fn parse_and_type_errors_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.lp"), "type T\ntheory {\n  !x in T: p(x.\n}\n").unwrap();
    std::fs::write(dir.path().join("ill.lp"), "type T\ntype U\npred p(T)\ntheory {\n  !x in U: p(x).\n}\n").unwrap();
    let a = liftsat(&["parse", "bad.lp"], dir.path());
    let b = liftsat(&["parse", "ill.lp"], dir.path());
    assert_eq!(a.status.code(), Some(1));
    assert_eq!(b.status.code(), Some(1));
    assert!(stderr(&a).contains("parse error"), "{}", stderr(&a));
    assert!(stderr(&b).contains("type error"), "{}", stderr(&b));
}

#[test]
fn verify_reports_a_broken_model() {
    let dir = with_pigeons();
    let model = r#"{"domains": {"Pigeon": ["p"], "Hole": ["h"]}, "predicates": {"isIn": []}, "functions": {}}"#;
    std::fs::write(dir.path().join("m.json"), model).unwrap();
    let o = liftsat(&["verify", "pigeonhole.lp", "m.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("invalid"), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn translate_annotates_rules() {
    let dir = with_pigeons();
    let o = liftsat(&["translate", "pigeonhole.lp"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("// rule:"));
    assert!(out.contains("mul("));
}

#[test]
fn solver_command_comes_from_the_environment() {
    let dir = with_pigeons();
    let o = Command::new(env!("CARGO_BIN_EXE_liftsat"))
        .args(["solve", "pigeonhole.lp"])
        .env("LIFTSAT_SOLVER", "/nonexistent/solver")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/solver"), "{}", stderr(&o));
}

#[test]
fn bench_rows_and_csv() {
    let dir = with_pigeons();
    std::fs::create_dir(dir.path().join("corpus")).unwrap();
    std::fs::rename(dir.path().join("pigeonhole.lp"), dir.path().join("corpus/pigeonhole.lp")).unwrap();
    let o = liftsat(&["bench", "corpus", "--methods", "lt1,m1", "--timeout", "60"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][1], rows[0][3], rows[0][4]), ("lt1", "sat", "2"));
    assert_eq!((rows[1][1], rows[1][3], rows[1][4]), ("m1", "sat", "15"));
}

#[test]
fn bench_marks_timeouts() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("corpus")).unwrap();
    std::fs::write(dir.path().join("corpus/p.lp"), pigeonhole(30, 15, 2)).unwrap();
    let o = liftsat(&["bench", "corpus", "--methods", "t1", "--timeout", "0.05"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    assert_eq!(csv.lines().nth(1).unwrap(), "p,t1,T,T,-,-,0");
}

#[test]
fn bench_on_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("corpus")).unwrap();
    let o = liftsat(&["bench", "corpus"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn gen_corpus_files_parse() {
    let dir = tempfile::tempdir().unwrap();
    let o = liftsat(&["gen-corpus", "c"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let n = std::fs::read_dir(dir.path().join("c")).unwrap().count();
    assert!(n >= 10);
    let p = liftsat(&["parse", "c/bapa.lp"], dir.path());
    assert_eq!(p.status.code(), Some(0), "{}", stderr(&p));
}
