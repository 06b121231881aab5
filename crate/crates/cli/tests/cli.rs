use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use discenv::domains::parse_domain;
use discenv::envelopes::{ebj_ball_inf, OptimizerConfig};
use discenv::primitives::ComplexVector;
use tempfile::TempDir;

const BALL: &str = r#"{"type":"ball","center":[[0,0]],"radius":1}"#;
const UNION: &str = r#"{"type":"union","parts":[
    {"type":"ball","center":[[-3,0]],"radius":1},
    {"type":"ball","center":[[3,0]],"radius":1}]}"#;
const ANNULUS: &str = r#"{"type":"difference","outer":{"type":"ball","center":[[0,0]],"radius":2},
    "inner_center":[[0,0]],"inner_radius":1}"#;

fn discenv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discenv")).args(args).output().unwrap()
}

fn domain_file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn rows(csv: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(csv).unwrap();
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

const LIGHT: [&str; 4] = ["--restarts", "1", "--max-evals", "200"];

#[test]
fn eval_lempert_on_ball_fills_the_grid() {
    let dir = TempDir::new().unwrap();
    let dom = domain_file(&dir, "ball.json", BALL);
    let out = dir.path().join("v.csv");
    let mut args = vec!["eval", "--domain", s(&dom), "--method", "lempert", "--grid", "-3,-3,3,3,5,5", "--out", s(&out)];
    args.extend(LIGHT);
    let o = discenv(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(&out).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["re1", "im1", "value", "feasible", "iterations", "J_part", "poisson_part"]);
    let table = rows(&out);
    assert_eq!(table.len(), 25);
    assert!(table.iter().all(|row| row[3] == "true"));
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("v.csv.json")).unwrap()).unwrap();
    assert_eq!(side["config"]["restarts"], 1);
    assert_eq!(side["seed"], 0);
    assert_eq!(side["points"].as_array().unwrap().len(), 25);
    assert!(side["points"][0]["best_disc"]["components"].is_array());
}

#[test]
fn lempert_refuses_disconnected_union() {
    let dir = TempDir::new().unwrap();
    let dom = domain_file(&dir, "u.json", UNION);
    let o = discenv(&["eval", "--domain", s(&dom), "--method", "lempert", "--grid", "-1,-1,1,1,2,2"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("disconnected"));
}

#[test]
fn ebj_passes_through() {
    let dir = TempDir::new().unwrap();
    let dom = domain_file(&dir, "ball.json", BALL);
    let out = dir.path().join("e.csv");
    let o = discenv(&["eval", "--domain", s(&dom), "--method", "ebj", "--grid", "-4,-1,4,2,6,3", "--out", s(&out)]);
    assert!(o.status.success());
    let x = parse_domain(BALL).unwrap();
    for row in rows(&out) {
        let re: f64 = row[0].parse().unwrap();
        let im: f64 = row[1].parse().unwrap();
        let z = ComplexVector::from_reals(&[re, im]).unwrap();
        let want = ebj_ball_inf(&x, &z, &OptimizerConfig::default()).unwrap();
        assert_eq!(row[2].parse::<f64>().unwrap(), want);
    }
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = TempDir::new().unwrap();
    let dom = domain_file(&dir, "ball.json", BALL);
    let bad = domain_file(&dir, "bad.json", r#"{"type":"ball","radius":1}"#);
    let code = |args: &[&str]| discenv(args).status.code();
    assert_eq!(code(&["eval", "--domain", s(&dom), "--method", "nope", "--grid", "0,0,1,1,1,1"]), Some(1));
    assert_eq!(code(&["eval", "--domain", s(&dom), "--method", "ebj", "--grid", "0,0,1,1,101,100"]), Some(1));
    assert_eq!(code(&["eval", "--domain", s(&dom), "--method", "ebj", "--grid", "0,0,1,1,0,3"]), Some(1));
    assert_eq!(code(&["eval", "--domain", s(&dom), "--method", "ebj", "--grid", "0,0,1,x,2,2"]), Some(2));
    assert_eq!(code(&["eval", "--domain", s(&bad), "--method", "ebj", "--grid", "0,0,1,1,2,2"]), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&["eval", "--domain", s(&missing), "--method", "ebj", "--grid", "0,0,1,1,2,2"]), Some(2));
    assert_eq!(code(&["eval", "--domain", s(&dom), "--method", "ebj", "--grid", "0,0,1,1,2,2", "--slice", "0,2"]), Some(1));
}

#[test]
fn compare_on_ball_has_small_gaps() {
    let dir = TempDir::new().unwrap();
    let dom = domain_file(&dir, "ball.json", BALL);
    let rep = dir.path().join("cmp.json");
    let mut args = vec!["compare", "--domain", s(&dom), "--method", "lempert1pole", "--grid", "1.5,-2,3,2,3,3", "--report", s(&rep)];
    args.extend(LIGHT);
    let o = discenv(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    let sum = &doc["summary"];
    assert_eq!(sum["direction_violations"], 0);
    assert_eq!(sum["direction_checked"], true);
    assert!(sum["max_abs_gap"].as_f64().unwrap() <= 0.02);
    assert_eq!(sum["reports"].as_array().unwrap().len(), 9);
}

#[test]
fn compare_on_union_reports_restricted_gaps() {
    let dir = TempDir::new().unwrap();
    let dom = domain_file(&dir, "u.json", UNION);
    let rep = dir.path().join("cmp.json");
    let mut args = vec![
        "compare", "--domain", s(&dom), "--method", "lempert", "--grid", "-0.5,0,0.5,0,2,1", "--allow-disconnected", "--report", s(&rep),
    ];
    args.extend(LIGHT);
    let o = discenv(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(doc["summary"]["oracle"], "min over union parts");
    assert_eq!(doc["summary"]["direction_violations"], 0);
}

#[test]
fn annulus_certificate_is_positive() {
    let dir = TempDir::new().unwrap();
    let dom = domain_file(&dir, "a.json", ANNULUS);
    let o = discenv(&[
        "compare", "--domain", s(&dom), "--method", "ebj", "--grid", "0,0,0,0,1,1", "--cert-centre", "0,0", "--cert-radius", "1.5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    let line = text.lines().find(|l| l.starts_with("sub-mean-value certificate")).unwrap();
    let v: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(v > 0.01, "{line}");
    assert!(text.contains("no closed-form oracle"));
}

fn eval_run(dir: &TempDir, dom: &Path, tag: &str, extra: &[&str]) -> PathBuf {
    let out = dir.path().join(format!("{tag}.csv"));
    let mut args = vec!["eval", "--domain", s(dom), "--method", "theorem2", "--grid", "1.5,0,3,1,2,2", "--out", s(&out)];
    args.extend(LIGHT);
    args.extend(extra);
    let o = discenv(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    dir.path().join(format!("{tag}.csv.json"))
}

#[test]
fn report_checks_budget_and_seeds() {
    let dir = TempDir::new().unwrap();
    let dom = domain_file(&dir, "ball.json", BALL);
    let mut runs: Vec<PathBuf> = ["2", "4", "8", "16"]
        .iter()
        .map(|d| eval_run(&dir, &dom, &format!("d{d}"), &["--degree", d]))
        .collect();
    runs.push(eval_run(&dir, &dom, "again", &["--degree", "16", "--threads", "2"]));
    let plot = dir.path().join("plot.csv");
    let mut args = vec!["report", "--out", s(&plot)];
    args.extend(runs.iter().map(|p| s(p)));
    let o = discenv(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("budget monotonicity: 0 increases"), "{text}");
    assert!(text.contains("repeat runs: 0 disagree"), "{text}");
    let table = rows(&plot);
    assert_eq!(table.len(), 5 * 4);
    assert!(table.iter().all(|r| r[8] == "true"));
    let a = std::fs::read(dir.path().join("d16.csv")).unwrap();
    let b = std::fs::read(dir.path().join("again.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn report_without_runs_is_a_parse_error() {
    assert_eq!(discenv(&["report"]).status.code(), Some(2));
    assert_eq!(discenv(&["report", "/nonexistent/run.json"]).status.code(), Some(2));
}
