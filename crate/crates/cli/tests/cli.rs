use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn lclr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lclr"))
        .current_dir(dir)
        .env_remove("LCLR_BUDGET")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const COLORING: &str = r#"{"formalism": "lcl", "builtin": "coloring", "params": {"colors": 4}}"#;

/// Vertices and edges renamed to 0..n in increasing order of id.
fn canonical(g: &Value) -> (Vec<(u64, u64)>, Vec<u64>) {
    let vs: Vec<u64> = g["vertices"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    let rank = |x: u64| vs.iter().position(|&v| v == x).unwrap() as u64;
    let mut edges: Vec<(u64, u64)> = g["edges"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (rank(e[0].as_u64().unwrap()), rank(e[1].as_u64().unwrap())))
        .collect();
    edges.sort();
    let labels = vs.iter().map(|v| g["node_labels"][v.to_string()].as_u64().unwrap()).collect();
    (edges, labels)
}

#[test]
fn encode_then_decode_recovers_the_graph() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    assert_eq!(code(&lclr(p, &["fixture", "k33", "--output", "g.json"])), 0);
    // relabel one vertex so labels are not uniform
    let mut g = json(p.join("g.json"));
    g["node_labels"]["2"] = 2.into();
    g["node_labels"]["4"] = 1.into();
    write(p, "g.json", &g.to_string());
    assert_eq!(code(&lclr(p, &["encode-ab", "--instance", "g.json", "--output", "e.json", "--map", "m.json"])), 0);
    let e = json(p.join("e.json"));
    assert!(e["vertices"].as_array().unwrap().len() > 6);
    assert!(json(p.join("m.json")).is_object());
    assert_eq!(code(&lclr(p, &["decode", "--instance", "e.json", "--output", "d.json"])), 0);
    assert_eq!(canonical(&json(p.join("d.json"))), canonical(&g));
}

#[test]
fn solve_verify_and_lift_through_the_encoding() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    write(p, "col.json", COLORING);
    lclr(p, &["fixture", "prism", "--output", "g.json"]);
    assert_eq!(code(&lclr(p, &["solve", "--problem", "col.json", "--instance", "g.json", "--output", "s.json"])), 0);
    let ok = lclr(p, &["verify", "--problem", "col.json", "--instance", "g.json", "--output", "s.json", "--report", "v.json"]);
    assert_eq!(code(&ok), 0);
    assert_eq!(json(p.join("v.json"))["overall"], true);

    let fwd = ["lift-ab", "--problem", "col.json", "--instance", "g.json", "--labeling", "s.json", "--output", "b.json"];
    assert_eq!(code(&lclr(p, &fwd)), 0);
    let back = [
        "lift-ab", "--problem", "col.json", "--instance", "g.json", "--labeling", "b.json", "--direction", "back", "--output",
        "a.json",
    ];
    assert_eq!(code(&lclr(p, &back)), 0);
    assert_eq!(json(p.join("a.json")), json(p.join("s.json")));
}

#[test]
fn improper_coloring_fails_verification() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    write(p, "col.json", COLORING);
    lclr(p, &["fixture", "k4", "--output", "g.json"]);
    write(p, "s.json", r#"{"nodes": {"0": 1, "1": 1, "2": 2, "3": 3}}"#);
    let o = lclr(p, &["verify", "--problem", "col.json", "--instance", "g.json", "--output", "s.json"]);
    assert_eq!(code(&o), 1);
    // three colors do not suffice on K4
    write(p, "c3.json", r#"{"formalism": "lcl", "builtin": "coloring", "params": {"colors": 3}}"#);
    assert_eq!(code(&lclr(p, &["solve", "--problem", "c3.json", "--instance", "g.json"])), 1);
}

#[test]
fn malformed_inputs_exit_with_input_error() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    write(p, "bad.json", "{\"vertices\": [0, 1], \"edges\": [[0,");
    let o = lclr(p, &["export", "--instance", "bad.json"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json"));
    assert_eq!(code(&lclr(p, &["export", "--instance", "missing.json"])), 2);
    write(p, "g.json", r#"{"vertices": [0, 1], "edges": [[0, 1]]}"#);
    assert_eq!(code(&lclr(p, &["export", "--instance", "g.json", "--format", "svg"])), 2);
    write(p, "loop.json", r#"{"vertices": [0], "edges": [[0, 0]]}"#);
    assert_eq!(code(&lclr(p, &["export", "--instance", "loop.json"])), 2);
    write(p, "weird.json", r#"{"formalism": "lcl", "builtin": "coloring", "colours": 4}"#);
    assert_eq!(code(&lclr(p, &["solve", "--problem", "weird.json", "--instance", "g.json"])), 2);
    assert_eq!(code(&lclr(p, &["fixture", "dodecahedron"])), 2);
}

#[test]
fn pipeline_exit_codes_follow_the_overall_outcome() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let ab = lclr(p, &["pipeline", "--fixture", "prism", "--stages", "A-B", "--output", "r.json"]);
    assert_eq!(code(&ab), 0, "{}", String::from_utf8_lossy(&ab.stderr));
    let r = json(p.join("r.json"));
    assert_eq!(r["overall"], "pass");
    assert_eq!(r["locality"]["B"], 39);

    let ae = lclr(p, &["pipeline", "--fixture", "k4", "--stages", "A-E", "--output", "r.json"]);
    assert_eq!(code(&ae), 3);
    let stages = json(p.join("r.json"))["stages"].clone();
    assert_eq!(stages[2]["outcome"], "budget_exceeded");
    assert_eq!(stages[3]["outcome"], "skipped");

    assert_eq!(code(&lclr(p, &["pipeline", "--stages", "E-A"])), 2);
    write(p, "c3.json", r#"{"formalism": "lcl", "builtin": "coloring", "params": {"colors": 3}}"#);
    assert_eq!(code(&lclr(p, &["pipeline", "--problem", "c3.json", "--fixture", "k4", "--stages", "A"])), 1);
}

#[test]
fn pipeline_reports_are_reproducible() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let run = |out: &str| {
        let o = lclr(
            p,
            &["pipeline", "--fixture", "random", "--seed", "7", "--stages", "A-B", "--no-timings", "--output", out],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(p.join(out)).unwrap()
    };
    assert_eq!(run("r1.json"), run("r2.json"));
}

#[test]
fn written_configs_replay_and_stale_ones_are_rejected() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let first = ["pipeline", "--fixture", "cube", "--no-timings", "--write-config", "cfg.json", "--output", "r1.json"];
    assert_eq!(code(&lclr(p, &first)), 0);
    assert_eq!(code(&lclr(p, &["pipeline", "--config", "cfg.json", "--no-timings", "--output", "r2.json"])), 0);
    assert_eq!(std::fs::read(p.join("r1.json")).unwrap(), std::fs::read(p.join("r2.json")).unwrap());

    let mut cfg = json(p.join("cfg.json"));
    cfg["constants"]["lambda"] = 40.into();
    write(p, "stale.json", &cfg.to_string());
    let o = lclr(p, &["pipeline", "--config", "stale.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn theta_fixture_exports_chains_as_dot() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    assert_eq!(code(&lclr(p, &["fixture", "theta:5", "--output", "t.json"])), 0);
    let o = lclr(p, &["export", "--instance", "t.json", "--format", "dot"]);
    assert_eq!(code(&o), 0);
    let dot = String::from_utf8(o.stdout).unwrap();
    assert!(dot.starts_with("graph"));
    let nodes = dot.lines().filter(|l| l.contains("[label=")).count();
    // a chain of five gadgets on six vertices each, plus the two endpoints
    assert_eq!(nodes, 5 * 6 + 2);
    assert!(dot.contains("fillcolor"));
}

#[test]
fn empty_graph_exports() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    write(p, "e.json", r#"{"vertices": [], "edges": []}"#);
    let o = lclr(p, &["export", "--instance", "e.json", "--format", "dot"]);
    assert_eq!(code(&o), 0);
    let dot = String::from_utf8(o.stdout).unwrap();
    assert!(!dot.contains("--"));
    let o = lclr(p, &["export", "--instance", "e.json"]);
    let g: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(g["vertices"].as_array().unwrap().len(), 0);
}

#[test]
fn gadget_contract_and_theorem_check() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    lclr(p, &["fixture", "k4", "--output", "g.json"]);
    assert_eq!(code(&lclr(p, &["gadget-bd", "--instance", "g.json", "--output", "gg.json"])), 0);
    let gg = json(p.join("gg.json"));
    assert_eq!(gg["graph"]["vertices"].as_array().unwrap().len(), 130);
    let contract = ["contract-db", "--instance", "gg.json", "--output", "c.json", "--coloring-out", "x.json"];
    assert_eq!(code(&lclr(p, &contract)), 0);
    let c = json(p.join("c.json"));
    assert_eq!(c["vertices"].as_array().unwrap().len(), 4);
    assert_eq!(c["edges"].as_array().unwrap().len(), 6);
    assert_eq!(json(p.join("x.json")).as_object().unwrap().len(), 6);

    let ok = lclr(p, &["check-theorem", "--fixture", "theta:2,3,4"]);
    assert_eq!(code(&ok), 0);
    assert!(String::from_utf8_lossy(&ok.stdout).contains("ExhaustedOk"));
    assert_eq!(code(&lclr(p, &["check-theorem", "--fixture", "twin:3"])), 3);
}

#[test]
fn d_to_e_lift_round_trips() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    write(p, "col.json", COLORING);
    lclr(p, &["fixture", "k4", "--output", "g.json"]);
    lclr(p, &["gadget-bd", "--instance", "g.json", "--output", "gg.json"]);
    lclr(p, &["solve", "--problem", "col.json", "--instance", "g.json", "--output", "s.json"]);
    let bd = ["lift-bd", "--problem", "col.json", "--instance", "gg.json", "--labeling", "s.json", "--output", "d.json"];
    assert_eq!(code(&lclr(p, &bd)), 0);
    let de = ["lift-de", "--problem", "col.json", "--instance", "gg.json", "--labeling", "d.json", "--output", "e.json"];
    assert_eq!(code(&lclr(p, &de)), 0);
    let ed = ["lift-ed", "--problem", "col.json", "--instance", "gg.json", "--labeling", "e.json", "--output", "d2.json"];
    assert_eq!(code(&lclr(p, &ed)), 0);
    assert_eq!(json(p.join("d.json")), json(p.join("d2.json")));

    let o = lclr(p, &["compile-re", "--problem", "col.json"]);
    let k: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((k["k"].as_str(), k["r_d"].as_u64()), (Some("7"), Some(30)));
}

#[test]
fn simulations_record_radii() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    lclr(p, &["fixture", "cycle5", "--output", "g.json"]);
    let o = lclr(p, &["simulate", "--mode", "local", "--alg", "builtin:min_id:2", "--instance", "g.json", "--output", "r.json"]);
    assert_eq!(code(&o), 0);
    let r = json(p.join("r.json"));
    assert_eq!(r["max_radius"], 2);
    let outs: Vec<&Value> = r["outputs"].as_object().unwrap().values().collect();
    // radius 2 covers all of C5, so every vertex sees the global minimum
    assert!(outs.windows(2).all(|w| w[0] == w[1]));

    let o = lclr(p, &["simulate", "--mode", "slocal", "--alg", "builtin:greedy_coloring", "--instance", "g.json"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let c = |v: u64| r["outputs"][v.to_string()].as_u64().unwrap();
    assert!((0..5).all(|v| c(v) != c((v + 1) % 5)));

    lclr(p, &["fixture", "prism", "--output", "prism.json"]);
    let o = lclr(p, &["simulate", "--mode", "a2", "--alg", "builtin:degree", "--instance", "prism.json"]);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r["outputs"].as_object().unwrap().values().all(|x| x == 3));
    assert_eq!(code(&lclr(p, &["simulate", "--mode", "local", "--alg", "builtin:nope", "--instance", "g.json"])), 2);
}

#[test]
fn fixture_listing_names_everything() {
    let d = TempDir::new().unwrap();
    let o = lclr(d.path(), &["fixture", "--list"]);
    let s = String::from_utf8(o.stdout).unwrap();
    for id in ["k4", "petersen", "theta:", "sinkless-orientation", "maximal-matching"] {
        assert!(s.contains(id), "{id}");
    }
}
