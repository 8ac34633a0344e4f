use std::path::Path;
use std::process::{Command, Output};

use hdgr::data::load_jsonl;
use hdgr::graph::load_graph;
use hdgr::refiner::EdgeScoreTable;
use hdgr::trainer::load_model;

fn hdgr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdgr"))
        .args(args)
        .current_dir(cwd)
        .env_remove("HDGR_SEED")
        .output()
        .expect("binary runs")
}

fn error_line(out: &Output) -> serde_json::Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("stderr is not one JSON line: {text}"))
}

/// Small synthetic task so the commands below have inputs.
fn fixture(dir: &Path) {
    let out = hdgr(&["synth", "--dim", "512", "--epochs", "2", "--out", "s"], dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn threshold_out_of_range_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = hdgr(&["refine", "--threshold", "1.5"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_line(&out)["error"]["kind"], "usage");
}

#[test]
fn unknown_flag_and_missing_argument_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["refine", "--bogus"][..], &["refine"][..], &["frobnicate"][..]] {
        let out = hdgr(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert_eq!(error_line(&out)["error"]["code"], 1);
    }
}

#[test]
fn missing_or_malformed_input_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{not json").unwrap();
    std::fs::write(dir.path().join("cfg.json"), r#"{"no_such_key": 1}"#).unwrap();
    for args in [
        &["dot", "--graph", "absent.json"][..],
        &["dot", "--graph", "bad.json"][..],
        &["dot", "--config", "cfg.json"][..],
    ] {
        let out = hdgr(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(error_line(&out)["error"]["kind"], "input");
    }
}

#[test]
fn divergence_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let out = hdgr(
        &["refine", "--graph", "s/graph.json", "--data", "s/dataset.jsonl", "--dim", "256", "--lr", "1e300", "--out", "r"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_line(&out)["error"]["kind"], "numeric");
    assert!(!dir.path().join("r").exists());
}

#[test]
fn dot_with_scores_labels_edges() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let out = hdgr(&["dot", "--graph", "s/graph_round_1.json", "--scores", "s/scores_round_1.json"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("label=\"0."), "{text}");
}

#[test]
fn outputs_round_trip_through_their_loaders() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let run = |args: &[&str]| {
        let out = hdgr(args, dir.path());
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    run(&["refine", "--graph", "s/graph.json", "--data", "s/dataset.jsonl", "--dim", "256", "--rounds", "2", "--out", "r"]);
    run(&["train", "--graph", "s/graph.json", "--data", "s/dataset.jsonl", "--dim", "256", "--out", "t"]);
    let p = dir.path();
    let read = |rel: &str| std::fs::read(p.join(rel)).unwrap();
    for rel in ["s/graph.json", "s/graph_round_1.json", "r/graph_round_1.json", "r/graph_round_2.json", "r/refined.json"] {
        load_graph(&read(rel)).unwrap();
    }
    for rel in ["s/scores_round_1.json", "r/scores_round_2.json"] {
        let table = EdgeScoreTable::from_json(&read(rel)).unwrap();
        assert_eq!(table.to_json(), read(rel));
    }
    load_jsonl(&String::from_utf8(read("s/dataset.jsonl")).unwrap()).unwrap();
    for rel in ["t/model.json", "r/model.json"] {
        let model = load_model(&read(rel)).unwrap();
        assert_eq!(hdgr::trainer::save_model(&model), read(rel));
    }
}

#[test]
fn flags_override_config_which_overrides_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let p = dir.path();
    let encode = |extra: &[&str], env_seed: Option<&str>, out: &str| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_hdgr"));
        cmd.args(["encode", "--graph", "s/graph.json", "--dim", "64", "--out", out]).args(extra).current_dir(p);
        match env_seed {
            Some(s) => cmd.env("HDGR_SEED", s),
            None => cmd.env_remove("HDGR_SEED"),
        };
        assert!(cmd.output().unwrap().status.success());
        let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join(out).join("encoding.json")).unwrap()).unwrap();
        doc["seed"].as_u64().unwrap()
    };
    std::fs::write(p.join("cfg.json"), r#"{"seed": 5}"#).unwrap();
    assert_eq!(encode(&[], None, "a"), 42);
    assert_eq!(encode(&[], Some("9"), "b"), 9);
    assert_eq!(encode(&["--config", "cfg.json"], Some("9"), "c"), 5);
    assert_eq!(encode(&["--config", "cfg.json", "--seed", "3"], Some("9"), "d"), 3);
}

#[test]
fn help_documents_every_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = hdgr(&["refine", "--help"], dir.path());
    assert!(out.status.success());
    let help = String::from_utf8(out.stdout).unwrap();
    for flag in [
        "--config", "--graph", "--data", "--model", "--scores", "--task", "--out", "--dim", "--latent-dim", "--lr",
        "--epochs", "--lambda", "--threshold", "--threshold-mode", "--rounds", "--seed", "--head", "--signal",
        "--threads", "--with-memories",
    ] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
}
