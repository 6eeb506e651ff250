use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weyl-frobenius")).args(args).output().unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("weyl-frobenius-cli-{}", std::process::id()));
    fs::create_dir_all(&d).unwrap();
    d.join(name)
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn potential_terms(doc: &Value) -> Vec<(String, String)> {
    doc["potential"]["f"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| (t["monomial"].to_string(), t["coefficient"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn construct_rank_one() {
    let o = run(&["construct", "--family", "C", "--rank", "1", "--vertex", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let d = json(&o);
    let mut terms = potential_terms(&d);
    terms.sort();
    assert_eq!(
        terms,
        vec![
            (r#"{"E":2}"#.to_string(), "1/2".to_string()),
            (r#"{"t1":2,"t2":1}"#.to_string(), "1/2".to_string()),
        ]
    );
    assert!(d["report"].as_array().unwrap().iter().all(|r| r["passed"] == true));
}

#[test]
fn b_construct_matches_c() {
    let b = run(&["construct", "--family", "B", "--rank", "3", "--vertex", "2"]);
    let c = run(&["construct", "--family", "C", "--rank", "3", "--vertex", "2"]);
    assert_eq!(b.status.code(), Some(0));
    let (bd, cd) = (json(&b), json(&c));
    assert_eq!(potential_terms(&bd), potential_terms(&cd));
    assert_eq!(bd["identified_with"]["family"], "C");
    assert!(bd["maps"].as_array().unwrap().iter().any(|m| m["name"] == "c-to-b"));
}

#[test]
fn verify_examples() {
    for (l, k, check) in [("4", "2", "wdvv"), ("5", "3", "det"), ("2", "1", "oracle")] {
        let o = run(&["verify", "--family", "C", "--rank", l, "--vertex", k, "--checks", check]);
        assert_eq!(o.status.code(), Some(0), "{l} {k} {check}");
        assert_eq!(json(&o)["passed"], true);
    }
}

#[test]
fn verify_reports_failures_with_exit_one() {
    let o = run(&["verify", "--family", "C", "--rank", "2", "--vertex", "1", "--checks", "det"]);
    assert_eq!(o.status.code(), Some(1));
    let r = json(&o);
    assert_eq!(r["checks"][0]["name"], "det");
    assert_eq!(r["checks"][0]["passed"], false);
}

#[test]
fn oracle_rank_limit() {
    let o = run(&["verify", "--family", "C", "--rank", "4", "--vertex", "1", "--checks", "oracle", "--oracle-max-rank", "3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compare_fixtures() {
    for id in ["c3k1", "c4k1", "c4k2"] {
        let o = run(&["compare", "--fixture", id]);
        assert_eq!(o.status.code(), Some(0), "{id}");
        assert_eq!(json(&o)["matched"], true);
    }
    assert_eq!(run(&["compare", "--fixture", "c5k1"]).status.code(), Some(2));
}

#[test]
fn latex_output() {
    let p = tmp("c3k1.tex");
    let o = run(&["construct", "--family", "C", "--rank", "3", "--vertex", "1", "--format", "latex", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = fs::read_to_string(&p).unwrap();
    assert!(s.contains("\\frac{1}{48}\\frac{t_{2}^{3}}{t_{3}}"));
    assert!(s.contains("E = t_{1}\\partial_{1} + \\frac{3}{4}t_{2}\\partial_{2}"));
}

#[test]
fn invalid_invocations_exit_two() {
    for args in [
        vec!["construct", "--family", "D", "--rank", "3", "--vertex", "1"],
        vec!["construct", "--family", "C", "--rank", "0", "--vertex", "1"],
        vec!["construct", "--family", "C", "--rank", "3"],
        vec!["verify", "--family", "C", "--rank", "3", "--vertex", "1", "--checks", ""],
        vec!["frobnicate"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
    let p = tmp("garbage.json");
    fs::write(&p, "{\"format\": 3}").unwrap();
    assert_eq!(run(&["verify", "--input", p.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--input", "/nonexistent/doc.json"]).status.code(), Some(2));
}
