use std::fs;
use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

const ROSE: &str = r#"{"rank":2,"vertices":[0],"edges":[{"id":1,"from":0,"to":0,"length":"1/2"},{"id":2,"from":0,"to":0,"length":"1/2"}],"marking":{"a":[1],"b":[2]}}"#;
// rose with lengths 1/3, 2/3 whose marking sends b to the loop 1·2
const TWISTED: &str = r#"{"rank":2,"vertices":[0],"edges":[{"id":1,"from":0,"to":0,"length":"1/3"},{"id":2,"from":0,"to":0,"length":"2/3"}],"marking":{"a":[1],"b":[1,2]}}"#;

fn dir(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::create_dir_all(&d).unwrap();
    fs::write(d.join("g1.json"), ROSE).unwrap();
    fs::write(d.join("g2.json"), TWISTED).unwrap();
    d
}

fn osk(args: &[&str]) -> String {
    osk_env(args, &[])
}

fn osk_env(args: &[&str], env: &[(&str, &str)]) -> String {
    let mut c = Command::new(env!("CARGO_BIN_EXE_osk"));
    c.args(args);
    for (k, v) in env {
        c.env(k, v);
    }
    let out = c.output().unwrap();
    assert!(out.status.success(), "osk {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn p(d: &PathBuf, f: &str) -> String {
    d.join(f).to_string_lossy().into_owned()
}

#[test]
fn dist_reports_lambda_and_writes_the_map() {
    let d = dir("dist");
    let v = json(&osk(&["dist", "--from", &p(&d, "g1.json"), "--to", &p(&d, "g2.json"), "--map-out", &p(&d, "map.json")]));
    // b has length 1/2 on the rose and 1 on the twisted rose
    assert_eq!(v["lambda"], "2");
    let map = json(&fs::read_to_string(d.join("map.json")).unwrap());
    for key in ["vertex_images", "edge_paths", "slopes", "tension", "gates"] {
        assert!(map.get(key).is_some(), "{key}");
    }
    assert!(map["slopes"].as_array().unwrap().iter().all(|s| s.as_str().unwrap().parse::<i64>().is_ok() || s.as_str().unwrap().contains('/')));
}

#[test]
fn fold_query_and_project_round_trip() {
    let d = dir("fold");
    osk(&["fold", "--from", &p(&d, "g1.json"), "--to", &p(&d, "g2.json"), "--out", &p(&d, "path.json")]);
    let path = json(&fs::read_to_string(d.join("path.json")).unwrap());
    assert_eq!(path["omega"], "1/3");
    let q = json(&osk(&["query", "--path", &p(&d, "path.json"), "--time", "s=1/10", "--class", "aB"]));
    assert_eq!(q["natural"], "1/10");
    let exact: f64 = {
        let s = q["class"]["normalized_length"].as_str().unwrap();
        let (a, b) = s.split_once('/').unwrap();
        a.parse::<f64>().unwrap() / b.parse::<f64>().unwrap()
    };
    assert!((q["class"]["formula"].as_f64().unwrap() - exact).abs() < 1e-12);
    let pr = json(&osk(&["project", "--path", &p(&d, "path.json"), "--factor", "aB"]));
    assert!(pr["lt"].as_f64().unwrap() <= pr["rt"].as_f64().unwrap());
    assert!(!pr["factors-at-lt"].as_array().unwrap().is_empty());
    assert!(pr["witnesses"].get("left").is_some());
}

#[test]
fn tampered_paths_are_rejected() {
    let d = dir("tamper");
    osk(&["fold", "--from", &p(&d, "g1.json"), "--to", &p(&d, "g2.json"), "--out", &p(&d, "path.json")]);
    let text = fs::read_to_string(d.join("path.json")).unwrap().replace("\"1/3\"", "\"1/4\"");
    fs::write(d.join("bad.json"), text).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_osk")).args(["query", "--path", &p(&d, "bad.json"), "--time", "0"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn whitehead_commands() {
    let v = json(&osk(&["whitehead", "--op", "simple", "--word", "abAB", "--rank", "2"]));
    assert_eq!((v["simple"].as_bool(), v["verified"].as_bool()), (Some(false), Some(true)));
    let v = json(&osk(&["whitehead", "--op", "surface-relation", "--word", "abAB", "--rank", "2"]));
    assert_eq!(v["surface_relation"], true);
    let v = json(&osk(&["whitehead", "--op", "primitive", "--word", "aab", "--rank", "2"]));
    assert_eq!(v["primitive"], true);
    let v = json(&osk(&["whitehead", "--op", "minimize", "--word", "aabab", "--rank", "2"]));
    assert!(v["minimal"].as_str().unwrap().len() <= 5);
}

#[test]
fn factor_complex_commands() {
    let v = json(&osk(&["ffdist", "--rank", "2", "--a", "a", "--b", "b"]));
    assert_eq!(v["distance"], 1);
    let v = json(&osk(&["ffdist", "--a", "ab", "--b", "aaab"]));
    assert_eq!(v["distance"].as_u64().unwrap() + 1, v["slopes"].as_array().unwrap().len() as u64);
    let d = dir("ffbound");
    let v = json(&osk(&["ffbound", "--factor", "aab", "--graph", &p(&d, "g2.json")]));
    assert!(v["upper_bound"].as_u64().unwrap() <= v["theoretical_bound"].as_u64().unwrap());
}

#[test]
fn experiment_csv_is_identical_across_thread_counts() {
    let args = ["experiment", "--name", "thin-triangles", "--trials", "6", "--seed", "9"];
    let one = osk_env(&args, &[("OSK_THREADS", "1")]);
    let four = osk_env(&args, &[("OSK_THREADS", "4")]);
    assert_eq!(one, four);
    assert!(one.starts_with("experiment,trial,rank,variant,param,metric,value,aux,samples,consistent,inputs\n"));
    assert_eq!(one.lines().count(), 7);
}
