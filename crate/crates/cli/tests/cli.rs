//! End-to-end runs of the `ahp` binary: exit codes, output documents,
//! trace replay and byte-level determinism.

use ahp_cli::parse_document;
use ahp_core::isomorphic;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ahp")
}

fn model(name: &str) -> String {
    format!("{}/models/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run_cli(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn ahp")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ahp-cli-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn validate_accepts_the_bundled_models() {
    for name in ["lambda.ahp", "securitisation.ahp"] {
        let out = run_cli(&["validate", &model(name)]);
        assert!(out.status.success(), "{name}: {out:?}");
    }
}

#[test]
fn validate_rejects_broken_documents_with_exit_1() {
    let dir = tmp_dir("invalid");
    let path = dir.join("broken.ahp");
    // two nodes named A with different interfaces
    std::fs::write(
        &path,
        "graph g { node a: A ports [p]; node b: A ports [p, q]; }",
    )
    .unwrap();
    let out = run_cli(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("interface mismatch"), "{stderr}");
}

#[test]
fn missing_file_is_a_usage_error() {
    let out = run_cli(&["validate", "/nonexistent/nowhere.ahp"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_rule_name_is_a_usage_error() {
    let out = run_cli(&[
        "match",
        &model("lambda.ahp"),
        "--rule",
        "ghost",
        "--graph",
        "term1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn match_reports_counts_and_json() {
    let out = run_cli(&[
        "match",
        &model("lambda.ahp"),
        "--rule",
        "beta",
        "--graph",
        "term3",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("3 match(es)"), "{stdout}");

    let out = run_cli(&[
        "match",
        &model("lambda.ahp"),
        "--rule",
        "beta",
        "--graph",
        "term3",
        "--json",
    ]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["count"], serde_json::json!(3));
    assert_eq!(value["matches"].as_array().unwrap().len(), 3);
    assert!(value["matches"][0]["morphism"]["nodes"].is_object());
}

#[test]
fn run_reduces_the_lambda_fixture_to_its_recorded_normal_form() {
    let dir = tmp_dir("run-term1");
    let out_path = dir.join("out.ahp");
    let out = run_cli(&[
        "run",
        &model("lambda.ahp"),
        "--strategy",
        "normalize",
        "--graph",
        "term1",
        "--seed",
        "0",
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("1 step(s)"), "{stdout}");

    let produced = parse_document(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let expected = parse_document(&std::fs::read_to_string(model("lambda.ahp")).unwrap()).unwrap();
    assert!(isomorphic(
        produced.graph("term1").unwrap(),
        expected.graph("term1_normal").unwrap()
    ));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tmp_dir("determinism");
    let a = dir.join("a.ahp");
    let b = dir.join("b.ahp");
    for (path, trace) in [(&a, "ta"), (&b, "tb")] {
        let trace_dir = dir.join(trace);
        let out = run_cli(&[
            "run",
            &model("securitisation.ahp"),
            "--strategy",
            "develop",
            "--graph",
            "market",
            "--seed",
            "7",
            "-o",
            path.to_str().unwrap(),
            "--trace",
            trace_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{out:?}");
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    for step in [
        "step_000.ahp",
        "step_001.ahp",
        "step_002.ahp",
        "manifest.json",
    ] {
        assert_eq!(
            std::fs::read(dir.join("ta").join(step)).unwrap(),
            std::fs::read(dir.join("tb").join(step)).unwrap(),
            "{step} differs between identical runs"
        );
    }
}

#[test]
fn trace_documents_chain_and_validate() {
    let dir = tmp_dir("trace");
    let trace_dir = dir.join("t");
    let out = run_cli(&[
        "run",
        &model("lambda.ahp"),
        "--strategy",
        "normalize",
        "--graph",
        "term3",
        "--seed",
        "3",
        "-o",
        dir.join("out.ahp").to_str().unwrap(),
        "--trace",
        trace_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(trace_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["status"], "success");
    let steps = manifest["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 3);
    for step in 0..=steps.len() {
        let path = trace_dir.join(format!("step_{step:03}.ahp"));
        let text = std::fs::read_to_string(&path).unwrap();
        let doc = parse_document(&text).unwrap();
        assert_eq!(doc.validate(), vec![], "trace step {step} must validate");
    }
}

#[test]
fn failed_strategies_exit_1() {
    let dir = tmp_dir("fail");
    let out = run_cli(&[
        "run",
        &model("lambda.ahp"),
        "--strategy",
        "normalize",
        "--graph",
        "term1_normal",
        "-o",
        dir.join("out.ahp").to_str().unwrap(),
    ]);
    // repeat never fails: zero iterations succeed on a normal form
    assert!(out.status.success());

    let doc_path = dir.join("one.ahp");
    std::fs::write(
        &doc_path,
        format!(
            "{}\nstrategy once {{ one(beta) }}\n",
            std::fs::read_to_string(model("lambda.ahp")).unwrap()
        ),
    )
    .unwrap();
    let out = run_cli(&[
        "run",
        doc_path.to_str().unwrap(),
        "--strategy",
        "once",
        "--graph",
        "term1_normal",
        "-o",
        dir.join("out2.ahp").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn flatten_output_validates_and_is_level_zero() {
    let dir = tmp_dir("flatten");
    let out_path = dir.join("flat.ahp");
    let out = run_cli(&[
        "flatten",
        &model("securitisation.ahp"),
        "--graph",
        "market",
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let out = run_cli(&["validate", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let doc = parse_document(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc.graph("market").unwrap().level(), 0);
}

#[test]
fn export_dot_matches_the_golden_files() {
    for (depth, golden) in [("0", "market_depth0.dot"), ("2", "market_depth2.dot")] {
        let out = run_cli(&[
            "export-dot",
            &model("securitisation.ahp"),
            "--graph",
            "market",
            "--depth",
            depth,
        ]);
        assert!(out.status.success());
        let expected = std::fs::read_to_string(format!(
            "{}/tests/golden/{golden}",
            env!("CARGO_MANIFEST_DIR")
        ))
        .unwrap();
        assert_eq!(
            String::from_utf8(out.stdout).unwrap(),
            expected,
            "depth {depth} output drifted from {golden}"
        );
    }
}

#[test]
fn export_dot_renders_a_flat_two_node_graph() {
    let dir = tmp_dir("dot-flat");
    let path = dir.join("two.ahp");
    std::fs::write(
        &path,
        "graph two { node a: A ports [p]; node b: B ports [q]; edge a.p -- b.q; }",
    )
    .unwrap();
    let out = run_cli(&[
        "export-dot",
        path.to_str().unwrap(),
        "--graph",
        "two",
        "--depth",
        "0",
    ]);
    assert!(out.status.success());
    let dot = String::from_utf8(out.stdout).unwrap();
    assert_eq!(dot.matches("subgraph cluster_").count(), 2);
    assert_eq!(dot.matches(" -> ").count(), 1);
}

#[test]
fn export_dot_is_deterministic_and_depth_sensitive() {
    let args = |depth: &str| {
        vec![
            "export-dot".to_string(),
            model("securitisation.ahp"),
            "--graph".into(),
            "market".into(),
            "--depth".into(),
            depth.into(),
        ]
    };
    let shallow = run_cli(&args("0").iter().map(|s| s.as_str()).collect::<Vec<_>>());
    let deep = run_cli(&args("2").iter().map(|s| s.as_str()).collect::<Vec<_>>());
    assert!(shallow.status.success() && deep.status.success());
    let shallow = String::from_utf8(shallow.stdout).unwrap();
    let deep = String::from_utf8(deep.stdout).unwrap();
    assert!(shallow.contains("more level(s)"), "{shallow}");
    assert!(!shallow.contains("Obligors"));
    assert!(deep.contains("Obligors"), "{deep}");
    let again = run_cli(&args("2").iter().map(|s| s.as_str()).collect::<Vec<_>>());
    assert_eq!(deep, String::from_utf8(again.stdout).unwrap());
}

#[test]
fn rewrite_match_index_out_of_range_is_usage() {
    let dir = tmp_dir("rewrite-range");
    let out = run_cli(&[
        "rewrite",
        &model("securitisation.ahp"),
        "--rule",
        "transfer",
        "--graph",
        "market",
        "--match",
        "9",
        "-o",
        dir.join("x.ahp").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
