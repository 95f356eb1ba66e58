//! End-to-end tests against the built binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

fn claro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_claro")).args(args).output().unwrap()
}

fn write_model(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// The worked example file shipped with the crate.
fn chain_path() -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/models/chain.json");
    p.to_str().unwrap().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn chain_second_edge_reports_all_sections_in_order() {
    let out = claro(&[&chain_path(), "--query", "edge:y->z"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut last = 0;
    for title in [
        "STATUS", "MSAS", "MAXIMAL IV-PAIRS", "DEGREES", "CONSTRAINTS", "RELEVANCE",
        "RELEVANT SUBMODEL", "CAVEATS",
    ] {
        let at = text.find(&format!("{title}\n")).unwrap_or_else(|| panic!("missing {title}"));
        assert!(at >= last, "{title} printed out of order");
        last = at;
    }
    assert!(text.contains("edge y->z: identified"));
    assert!(text.contains("m  = 3"));
    assert!(text.contains("k  = 2"));
    assert!(text.contains("df = 1"));
    assert!(text.contains("cov(z,x)/cov(y,x) == cov(z,y|x)/cov(y,y|x)"));
}

#[test]
fn chain_first_edge_marks_only_its_own_absence_relevant() {
    let out = claro(&[&chain_path(), "--query", "edge:x->y"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("df = 0"));
    assert_eq!(text.matches("\n  relevant  ").count(), 1);
    assert_eq!(text.matches("\n  irrelevant").count(), 3);
    assert!(text.contains("relevant   cov(e_x,e_y) = 0"));
}

#[test]
fn chain_total_effect_reports_both_strategies() {
    let out = claro(&[&chain_path(), "--query", "te:x->z"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("te x->z: identified"));
    assert!(text.contains("cov(z,x)/cov(x,x)"));
    assert!(text.contains("(cov(y,x)/cov(x,x)) * (cov(z,y|x)/cov(y,y|x))"));
    assert!(text.contains("m  = 2"));
}

#[test]
fn machine_report_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let one = dir.path().join("one.json");
    let two = dir.path().join("two.json");
    let first =
        claro(&[&chain_path(), "--query", "edge:y->z", "--json", one.to_str().unwrap()]);
    let second =
        claro(&[&chain_path(), "--query", "edge:y->z", "--json", two.to_str().unwrap()]);
    assert!(first.status.success() && second.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(fs::read(&one).unwrap(), fs::read(&two).unwrap());

    let v: serde_json::Value = serde_json::from_slice(&fs::read(&one).unwrap()).unwrap();
    assert_eq!(v["report_version"], 1);
    assert_eq!(v["degrees"]["m"], 3);
    assert_eq!(v["degrees"]["k"], 2);
    assert_eq!(v["degrees"]["df"], 1);
    assert_eq!(v["msas"].as_array().unwrap().len(), 3);
    assert_eq!(v["status"], "identified");
}

#[test]
fn unidentified_claim_still_exits_zero() {
    let dir = TempDir::new().unwrap();
    let bow = write_model(
        &dir,
        "bow.json",
        r#"{"variables": ["x", "y"], "directed": [["x", "y"]], "bidirected": [["x", "y"]]}"#,
    );
    let out = claro(&[&bow, "--query", "edge:x->y"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("not identified by implemented criteria"));
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let chain = chain_path();

    let missing = claro(&["/no/such/model.json", "--query", "edge:x->y"]);
    assert_eq!(missing.status.code(), Some(2));

    let bad_json = write_model(&dir, "bad.json", r#"{"variables": ["x"], "extra": 1}"#);
    let out = claro(&[&bad_json, "--query", "edge:x->y"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("model:"));

    let backwards = write_model(
        &dir,
        "backwards.json",
        r#"{"variables": ["x", "y"], "directed": [["y", "x"]]}"#,
    );
    let out = claro(&[&backwards, "--query", "edge:x->y"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("directed[0]:"));

    let out = claro(&[&chain, "--query", "edge:x=>y"]);
    assert_eq!(out.status.code(), Some(2));

    let out = claro(&[&chain, "--query", "edge:q->z"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown variable `q`"));

    let out = claro(&[&chain, "--query", "edge:x->z"]);
    assert_eq!(out.status.code(), Some(2), "absent target edge is an input error");

    let out = claro(&[&chain, "--query", "te:z->x"]);
    assert_eq!(out.status.code(), Some(2), "backward total effect is an input error");
}

#[test]
fn exhausted_budget_exits_three() {
    let out = claro(&[&chain_path(), "--query", "edge:y->z", "--budget", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("budget"));
}

#[test]
fn oversized_models_warn_on_stderr() {
    let dir = TempDir::new().unwrap();
    let wide = write_model(
        &dir,
        "wide.json",
        r#"{"variables": ["a", "b", "c", "d", "e", "f", "g", "h"]}"#,
    );
    // A query error keeps the run cheap; the warning is emitted first.
    let out = claro(&[&wide, "--query", "edge:a->nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("warning: 8 variables"));
}

#[test]
fn oracle_flag_is_accepted_and_deterministic() {
    let out = claro(&[&chain_path(), "--query", "edge:y->z", "--oracle", "--seed", "5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let again = claro(&[&chain_path(), "--query", "edge:y->z", "--oracle", "--seed", "5"]);
    assert_eq!(out.stdout, again.stdout);
}
