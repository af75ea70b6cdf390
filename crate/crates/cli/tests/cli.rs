use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use singforge::mixedpoly::{g_polynomial, MixedPoly, WeightVector};
use singforge::LoopPoly;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_singforge")).args(args).env_remove("SINGFORGE_GRID").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn forge_hopf() {
    let out = run(&["forge", "--word", "s=2: s1 s1", "--k", "1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["polynomial_text"], "u^2 - v^2");
    assert_eq!(v["all_pass"], true);
}

#[test]
fn forge_half_twist_round_trips() {
    let out = run(&["forge", "--word", "s=2: s1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let f: MixedPoly = serde_json::from_value(v["polynomial"].clone()).unwrap();
    let g: LoopPoly = serde_json::from_value(v["loop"].clone()).unwrap();
    let w = &v["weight"];
    let p = WeightVector::new(w[0].as_u64().unwrap(), w[1].as_u64().unwrap()).unwrap();
    let back = g_polynomial(&f, &p).unwrap().to_loop_poly().unwrap();
    assert!(back.max_coeff_diff(&g) < 1e-12);
}

#[test]
fn forge_errors() {
    assert_eq!(code(&run(&["forge", "--strands", "/nonexistent/strands.json"])), 1);
    assert_eq!(code(&run(&["forge", "--word", "s=2: s3"])), 1);
    assert_eq!(code(&run(&["forge", "--word", "s=2: s1", "--symmetry", "u-even"])), 2);
}

#[test]
fn certify_examples() {
    assert_eq!(code(&run(&["certify", "--expr", "u^2 - v^2"])), 0);
    let out = run(&["certify", "--expr", "u*v + u*vb + ub*v + ub*vb"]);
    assert_eq!(code(&out), 4);
    assert_eq!(json(&out)["certificates"]["weak"]["status"], "FAIL");
    let out = run(&["certify", "--strong", "--expr", "u^2 - v^2*vb^2"]);
    assert_eq!(code(&out), 4);
    assert_eq!(json(&out)["certificates"]["strong"]["status"], "FAIL");
}

#[test]
fn compat_examples() {
    let out = run(&["compat", &data("hopf_circle.json")]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["polynomial_text"], "u^3 - u^2*v^4 + v^10*vb^4");
    assert_eq!(v["newton"]["faces"].as_array().unwrap().len(), 2);

    let out = run(&["compat", &data("broken_ladder.json")]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stdout).contains("a_{i-1} ≠ b_i a_i"));

    assert_eq!(code(&run(&["compat", &data("empty.json")])), 1);
}

#[test]
fn obstruct_examples() {
    let v = json(&run(&["obstruct", "1", "-4", "8", "-9", "8", "-4", "1"]));
    assert_eq!(v["report"]["excluded"], true);
    assert_eq!(v["report"]["murasugi"]["reduction_mod2"], "1+t^3+t^6");
    for delta in [&["1", "-1", "1"][..], &["1"]] {
        let mut args = vec!["obstruct"];
        args.extend_from_slice(delta);
        let v = json(&run(&args));
        assert_eq!(v["report"]["excluded"], false);
        assert!(v["report"]["verdict"].as_str().unwrap().starts_with("no obstruction"));
    }
    assert_eq!(code(&run(&["obstruct", "0"])), 1);
}

#[test]
fn newton_examples() {
    let v = json(&run(&["newton", "--expr", "u^3 + u*v^2 + v^5"]));
    let weights: Vec<&Value> = v["faces"].as_array().unwrap().iter().map(|f| &f["weight"]).collect();
    assert_eq!(weights, [&serde_json::json!([3, 1]), &serde_json::json!([1, 1])]);
    let v = json(&run(&["newton", "--expr", "u^2 - v^2"]));
    assert_eq!(v["faces"][0]["weight"], serde_json::json!([1, 1]));
    assert_eq!(code(&run(&["newton", "--expr", "3"])), 1);
}

#[test]
fn plotdata_csv() {
    let out = run(&["plotdata", &data("hopf_loop.json")]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,root_index,re,im,circle_radius,circle_index"));
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 6);
        assert!(((cols[2] * cols[2] + cols[3] * cols[3]).sqrt() - cols[4]).abs() < 1e-9);
    }
}

#[test]
fn symmetry_report_lists_checks() {
    let v = json(&run(&["symmetry", "--word", "s=2: s1 s1"]));
    let present: Vec<&str> = v["report"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["present"] == true)
        .map(|c| c["symmetry"].as_str().unwrap())
        .collect();
    assert!(present.contains(&"u-even"));
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        &["forge", "--word", "s=2: s1 s1 s1"][..],
        &["compat", &data("hopf_circle.json")],
        &["obstruct", "1", "-3", "1"],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn grid_can_be_overridden() {
    let out = Command::new(env!("CARGO_BIN_EXE_singforge"))
        .args(["forge", "--word", "s=2: s1 s1", "--k", "1"])
        .env("SINGFORGE_GRID", "128")
        .output()
        .unwrap();
    assert_eq!(json(&out)["certificates"]["p_fibered"]["grid"], 128);
    let out = run(&["--grid", "96", "forge", "--word", "s=2: s1 s1", "--k", "1"]);
    assert_eq!(json(&out)["certificates"]["p_fibered"]["grid"], 96);
    assert_eq!(code(&run(&["--grid", "15", "forge", "--word", "s=2: s1 s1"])), 1);
}
