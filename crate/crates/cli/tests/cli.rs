use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const PHI1: &str = "G [x <- f(x)] && G F (p(x) && X !p(x))";
const PHI2: &str = "G ([x <- f(x)] && p(x)) && F !p(f(x))";

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus/applications")
}

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("tslsat-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn tslsat(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tslsat"))
        .args(args)
        .env_remove("TSLSAT_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_exit_codes() {
    let o = tslsat(&["check"], PHI1);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("SAT\npref:"), "{out}");
    assert!(out.contains("rec:") && out.contains("model:"));

    let o = tslsat(&["check", "-"], PHI2);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "UNSAT\n");

    assert_eq!(tslsat(&["check"], "").status.code(), Some(3));
    let o = tslsat(&["check"], "p(x) &&\n  q(");
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("2:"), "line/column expected");
    assert_eq!(tslsat(&["check", "/nonexistent/file.tsl"], "").status.code(), Some(3));
    assert_eq!(tslsat(&["check", "--workers", "3"], PHI1).status.code(), Some(3));
    assert_eq!(tslsat(&["check", "--timeout", "0"], PHI1).status.code(), Some(3));
}

#[test]
fn unknown_on_budget() {
    let o = tslsat(&["check", "--block-budget", "3"], PHI1);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("UNKNOWN("));
}

#[test]
fn validity() {
    assert_eq!(tslsat(&["valid"], "p(x) || !p(x)").status.code(), Some(0));
    let o = tslsat(&["valid"], "p(x)");
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("INVALID\n"));
}

#[test]
fn json_report() {
    let o = tslsat(&["check", "--json"], PHI1);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outcome"], "SAT");
    assert!(v["witness"]["pref"].is_array() && v["witness"]["rec"].is_array());
    assert!(v["model"]["classes"].is_array());
    assert!(v["stats"]["wall_ms"].is_u64());

    let o = tslsat(&["check", "--json"], PHI2);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["outcome"], "UNSAT");
}

#[test]
fn deterministic_reports_are_identical() {
    let file = corpus_dir().join("small_holding_arbiter.tsl");
    let file = file.to_str().unwrap();
    let run = || {
        let o = tslsat(&["check", "--json", "--deterministic", file], "");
        assert_eq!(o.status.code(), Some(0));
        let mut v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        v["stats"]["wall_ms"] = Value::Null;
        v
    };
    assert_eq!(run(), run());
    assert_eq!(tslsat(&["check", "--deterministic", "--workers", "2", file], "").status.code(), Some(3));
}

#[test]
fn gen_commands() {
    let o = tslsat(&["gen", "scal-sat", "3"], "");
    assert_eq!(stdout(&o), "G [x <- f(x)] && F !p(x) && p(x) && p(f(x)) && p(f(f(x))) && p(f(f(f(x))))\n");
    assert_eq!(tslsat(&["gen", "scal-unsat", "0"], "").status.code(), Some(3));
    assert_eq!(tslsat(&["gen", "scal-unsat", "2"], "").status.code(), Some(0));

    let a = tslsat(&["gen", "random", "--seed", "7", "--size", "20"], "");
    let b = tslsat(&["gen", "random", "--seed", "7", "--size", "20"], "");
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_tslsat"))
        .args(["gen", "random", "--size", "20"])
        .env("TSLSAT_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);

    let dir = tmp("gen");
    let o = tslsat(&["gen", "random", "--seed", "3", "--count", "4", "--out", dir.to_str().unwrap()], "");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 4);
    let o = tslsat(&["bench", dir.to_str().unwrap(), "--timeout", "10", "--soft-fail", "--json"], "");
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn encode_goto() {
    let dir = tmp("goto");
    let halt = dir.join("halt.goto");
    std::fs::write(&halt, "l0: HALT\n").unwrap();
    let o = tslsat(&["encode-goto", halt.to_str().unwrap()], "");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("G F p0(l)"));
    let o = tslsat(&["encode-goto", "--theory", "te", halt.to_str().unwrap()], "");
    assert!(stdout(&o).contains("eq(e, g(f(e)))"));

    let bad = dir.join("bad.goto");
    std::fs::write(&bad, "l0: JUMP v1\n").unwrap();
    assert_eq!(tslsat(&["encode-goto", bad.to_str().unwrap()], "").status.code(), Some(3));
}

#[test]
fn bench_corpus_dirs() {
    let empty = tmp("empty");
    assert_eq!(tslsat(&["bench", empty.to_str().unwrap()], "").status.code(), Some(3));

    let dir = tmp("bench");
    for name in ["filter.tsl", "one_of_two.tsl", "holding_arbiter.tsl"] {
        std::fs::copy(corpus_dir().join(name), dir.join(name)).unwrap();
    }
    let o = tslsat(&["bench", dir.to_str().unwrap(), "--json"], "");
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["ok"] == true && r["got"] == r["expected"]));

    // A wrong expectation is a mismatch.
    std::fs::write(dir.join("wrong.tsl"), "#!expect: UNSAT\ntrue\n").unwrap();
    assert_eq!(tslsat(&["bench", dir.to_str().unwrap()], "").status.code(), Some(1));
}

fn script(dir: &Path, name: &str, answer: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, format!("#!/bin/sh\ncat > /dev/null\necho {answer}\n")).unwrap();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755)).unwrap();
    }
    p.to_str().unwrap().to_string()
}

#[cfg(unix)]
#[test]
fn external_solver_and_smt_dump() {
    let dir = tmp("solver");
    let sat = script(&dir, "sat.sh", "sat");
    let unknown = script(&dir, "unknown.sh", "unknown");
    let dump = dir.join("dump");
    let o = tslsat(&["check", "--solver", &sat, "--smt-dump", dump.to_str().unwrap()], PHI1);
    assert_eq!(o.status.code(), Some(0));
    let files: Vec<_> = std::fs::read_dir(&dump).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(!files.is_empty());
    let text = std::fs::read_to_string(&files[0]).unwrap();
    assert!(text.contains("(check-sat)"));

    let o = tslsat(&["check", "--solver", &unknown], PHI1);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("UNKNOWN(solver"));
}

#[test]
fn nba_injection_is_checksummed() {
    let p = tslsat::parse_formula(PHI1, None).unwrap();
    let a = tslsat::ltl::approximate(&p, tslsat::Mode::Finitary);
    let nba = tslsat::automata::ltl_to_nba(&a.ltl, a.universe.len()).unwrap();
    let dir = tmp("hoa");
    let hoa = dir.join("phi1.hoa");
    std::fs::write(&hoa, nba.to_hoa(&a.universe, &p.arena)).unwrap();
    let o = tslsat(&["check", "--json", "--nba-from", hoa.to_str().unwrap()], PHI1);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let digest = v["nba_sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);

    std::fs::write(&hoa, "HOA: v1\nnonsense\n").unwrap();
    assert_eq!(tslsat(&["check", "--nba-from", hoa.to_str().unwrap()], PHI1).status.code(), Some(3));
}
