use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_planeauto"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn map_file(name: &str, x: &str, y: &str) -> PathBuf {
    let path = scratch(name);
    std::fs::write(&path, serde_json::json!({ "x": x, "y": y }).to_string()).unwrap();
    path
}

fn run(args: &[&str]) -> (i32, Value, Output) {
    let out = bin().args(args).output().unwrap();
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), report, out)
}

fn validator() -> jsonschema::Validator {
    let schema: Value = serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(report: &Value) {
    let v = validator();
    let errors: Vec<String> = v.iter_errors(report).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}\n{report:#}");
}

#[test]
fn classify_reports_dynamical_degree() {
    let f = map_file("cubic.json", "y", "x + y^3");
    let (code, report, _) = run(&["classify", "-i", f.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(report["outputs"]["class"], "loxodromic");
    assert_eq!(report["outputs"]["lambda1"], 3);
    assert_valid(&report);
}

#[test]
fn self_conjugacy_is_the_identity() {
    let f = map_file("cubic_self.json", "y", "x + y^3");
    let p = f.to_str().unwrap();
    let (code, report, _) = run(&["conjugate", "-f", p, "-g", p]);
    assert_eq!(code, 0);
    let cert = &report["outputs"]["certificate"];
    assert_eq!(report["outputs"]["result"], "certificate");
    assert_eq!((cert["psi"]["x"].as_str(), cert["psi"]["y"].as_str()), (Some("x"), Some("y")));
    assert_eq!(cert["verified"], true);
    assert_valid(&report);
}

#[test]
fn distinct_degrees_are_refuted_exactly() {
    let f = map_file("refute_f.json", "y", "x + y^3");
    let g = map_file("refute_g.json", "y", "x + y^2 - 1");
    let (code, report, _) = run(&["conjugate", "-f", f.to_str().unwrap(), "-g", g.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(report["outputs"]["refutation"]["reason"], "lambda1-mismatch");
    assert_eq!(report["outputs"]["refutation"]["numeric"], false);
    assert_valid(&report);
}

#[test]
fn worked_example_over_a_quadratic_field() {
    let (code, report, _) = run(&["example", "--m", "2", "--d", "2"]);
    assert_eq!(code, 0);
    let out = &report["outputs"];
    assert_eq!(out["result"], "certificate");
    assert_eq!(out["field"]["minpoly"], serde_json::json!(["-2", "0", "1"]));
    assert_eq!(out["alpha_power_m"], "1/2");
    assert_valid(&report);
}

#[test]
fn every_subcommand_matches_the_schema() {
    let g = map_file("quadratic.json", "y", "x + y^2 - 1");
    let p = g.to_str().unwrap();
    let pgm = scratch("slice.pgm");
    let cases: Vec<Vec<&str>> = vec![
        vec!["decompose", "-i", p],
        vec!["normal-form", "-i", p],
        vec!["invert", "-i", p],
        vec!["green", "-i", p, "--at", "0.5,0,0.2,0", "--at", "100,0,1,0", "--mode", "gmax"],
        vec!["raster", "-i", p, "--grid", "4,3"],
        vec!["raster", "-i", p, "--grid", "4,3", "--format", "pgm", "--out", pgm.to_str().unwrap()],
        vec!["periodic", "-i", p, "--max-period", "2"],
        vec!["bound", "--df", "2", "--dg", "3"],
        vec!["bound", "-f", p, "-g", p],
    ];
    for args in cases {
        let (code, report, out) = run(&args);
        assert_eq!(code, 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(report["command"], args[0]);
        assert_valid(&report);
    }
    let text = std::fs::read_to_string(&pgm).unwrap();
    let header: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).take(3).collect();
    assert_eq!(header, ["P2", "4 3", "65535"]);
}

#[test]
fn bound_for_quadratic_pair() {
    let (_, report, _) = run(&["bound", "--df", "2", "--dg", "2"]);
    assert_eq!(report["outputs"]["bits"], 116);
}

#[test]
fn usage_errors_exit_with_two() {
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["raster", "-i", "nowhere.json", "--grid", "0,4"]);
    assert_eq!(code, 2);
    let bad = scratch("bad.json");
    std::fs::write(&bad, r#"{"x": "x^2", "y": "y"}"#).unwrap();
    let (code, report, _) = run(&["classify", "-i", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(report["outputs"]["kind"], "usage");
    assert_valid(&report);
    let (code, report, _) = run(&["classify", "-i", scratch("missing.json").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_valid(&report);
}

#[test]
fn reruns_are_identical_apart_from_timing() {
    let g = map_file("rerun.json", "y", "x + y^2 - 1");
    let p = g.to_str().unwrap();
    for args in [vec!["periodic", "-i", p, "--max-period", "2"], vec!["raster", "-i", p, "--grid", "16,16", "--seed", "9"]] {
        let (_, mut a, _) = run(&args);
        let (_, mut b, _) = run(&args);
        a["timing_ms"] = Value::Null;
        b["timing_ms"] = Value::Null;
        assert_eq!(a, b, "{args:?}");
        assert_eq!(a["seed"], if args.contains(&"--seed") { 9 } else { 0 });
    }
}

#[test]
fn report_can_be_written_to_a_file() {
    let f = map_file("to_file.json", "y", "x + y^3");
    let out = scratch("report.json");
    let (code, _, o) = run(&["invert", "-i", f.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(o.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["outputs"]["inverse"]["x"], "-x^3 + y");
    assert_valid(&report);
}
