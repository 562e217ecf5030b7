use std::path::PathBuf;
use std::process::{Command, Output};

fn lot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lot")).args(args).env("LOT_THREADS", "2").output().expect("binary runs")
}

fn catalogue(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "conformance", "experiments", name].iter().collect();
    path.to_string_lossy().into_owned()
}

fn scratch(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("lot-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn transport_reproduces_the_fixture() {
    let (mu, nu) = (catalogue("fixture-mu.json"), catalogue("fixture-nu.json"));
    let doc = json(&lot(&["transport", "--mu", &mu, "--nu", &nu, "--u", "u_p:0.5"]));
    assert!((doc["lambda"].as_f64().unwrap() - 1.4571067811865475).abs() < 1e-8);
    assert_eq!(doc["saturated"], true);
    assert_eq!(doc["coupling"]["mass"].as_array().unwrap().len(), 2);
}

#[test]
fn output_is_deterministic_and_written_to_file() {
    let (mu, nu) = (catalogue("fixture-mu.json"), catalogue("fixture-nu.json"));
    let first = lot(&["transport", "--mu", &mu, "--nu", &nu]);
    let second = lot(&["transport", "--mu", &mu, "--nu", &nu]);
    assert_eq!(first.stdout, second.stdout);
    let out = scratch("solution.json", "");
    assert!(lot(&["transport", "--mu", &mu, "--nu", &nu, "--out", &out]).status.success());
    assert_eq!(std::fs::read(&out).unwrap(), first.stdout);
}

#[test]
fn duality_checks() {
    let (mu, nu) = (catalogue("fixture-mu.json"), catalogue("fixture-nu.json"));
    let sep = json(&lot(&["duality", "--mu", &mu, "--nu", &nu, "--check", "separation"]));
    assert_eq!(sep["report"]["valid"], true);
    assert!((sep["dual_value"].as_f64().unwrap() - 1.4571067811865475).abs() < 2e-8);
    let mono = json(&lot(&["duality", "--mu", &mu, "--nu", &nu, "--check", "monotone"]));
    assert!(mono["report"]["min_margin"].as_f64().unwrap() >= -1e-8);
    let star = json(&lot(&["duality", "--mu", &mu, "--nu", &nu, "--check", "starshape", "--grid", "4"]));
    assert!(star["report"]["residual"].as_array().unwrap().iter().all(|r| r.as_f64().unwrap() < 1e-9));
}

#[test]
fn geodesic_paths_have_small_defect() {
    let (mu, nu) = (catalogue("fixture-mu.json"), catalogue("fixture-nu.json"));
    let doc = json(&lot(&["geodesic", "--mu", &mu, "--nu", &nu, "--grid", "5"]));
    assert_eq!(doc["path"]["measures"].as_array().unwrap().len(), 5);
    assert!(doc["defect"].as_f64().unwrap() < 2e-5);
}

#[test]
fn geodesic_map_conserves_mass() {
    let doc =
        json(&lot(&["geodesic-map", "--phi", "quad:q=0.2|0|0|0.2,a=-1|0,b=0", "--rho0", "box:lo=-0.5|-0.5,hi=0.5|0.5", "--s", "0.5"]));
    assert!(doc["monge_ampere_residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(doc["sample"]["images"].as_array().unwrap().len(), 64);
}

#[test]
fn entropy_csv_for_the_flat_converse() {
    let csv = scratch("curve.csv", "");
    let doc = json(&lot(&["entropy", "--experiment", "converse-flat", "--out", &csv]));
    assert!((doc["report"]["min_margin_lambda2"].as_f64().unwrap() + 1.0).abs() < 1e-6);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "s,e,e1_analytic,e2_analytic,e1_fd,e2_fd,margin_lambda2,margin_l2pi");
    assert_eq!(lines.count(), 11);
}

#[test]
fn entropy_from_a_config_file() {
    let cfg = scratch(
        "exp.json",
        r#"{"kind": "curve", "name": "tiny", "spacetime": "minkowski:2 V=quad:alpha=0.3 N=inf",
            "u": "u_p:0.5", "phi": "affine:a=-1|0", "rho0": "box:lo=-0.5|-0.5,hi=0.5|0.5", "grid": 5}"#,
    );
    let doc = json(&lot(&["entropy", "--config", &cfg]));
    assert_eq!(doc["report"]["convex"], true);
    assert!((doc["certified_k"].as_f64().unwrap() - 0.3).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let mu = catalogue("fixture-mu.json");
    assert_eq!(lot(&["transport", "--mu", "/nonexistent.json", "--nu", &mu]).status.code(), Some(1));
    let bad = scratch("bad.json", r#"{"points": [[0, 0]], "weights": [0.4]}"#);
    assert_eq!(lot(&["transport", "--mu", &bad, "--nu", &mu]).status.code(), Some(1));
    assert_eq!(lot(&["transport", "--mu", &mu, "--nu", &mu, "--u", "u_p:2"]).status.code(), Some(1));
    assert_eq!(lot(&["entropy", "--experiment", "missing"]).status.code(), Some(1));
    assert_eq!(lot(&["no-such-command"]).status.code(), Some(1));
    // spacelike pair: separation certificates need every pair timelike
    let a = scratch("a.json", r#"{"points": [[0, 0]], "weights": [1]}"#);
    let b = scratch("b.json", r#"{"points": [[1, 0], [0.5, 3]], "weights": [0.5, 0.5]}"#);
    assert_eq!(lot(&["duality", "--mu", &a, "--nu", &b, "--check", "separation"]).status.code(), Some(3));
    assert!(lot(&["--help"]).status.success());
}

#[test]
fn seeded_instances_are_recorded_and_replayable() {
    let first = lot(&["transport", "--seed", "7", "--atoms", "3"]);
    let doc = json(&first);
    assert_eq!(doc["seed"], 7);
    assert_eq!(first.stdout, lot(&["transport", "--seed", "7", "--atoms", "3"]).stdout);
    let mu = scratch("seed-mu.json", &doc["mu"].to_string());
    let nu = scratch("seed-nu.json", &doc["nu"].to_string());
    let replay = json(&lot(&["transport", "--mu", &mu, "--nu", &nu]));
    assert_eq!(replay["lambda"], doc["lambda"]);
    assert_eq!(lot(&["transport", "--seed", "7", "--mu", &mu, "--nu", &nu]).status.code(), Some(1));
    assert_eq!(lot(&["transport"]).status.code(), Some(1));
}
