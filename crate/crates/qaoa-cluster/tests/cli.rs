//! End-to-end tests of the `qaoa-cluster` binary: exit codes, file
//! round-trips, and output determinism.

use std::path::Path;
use std::process::{Command, Output};

use qaoa_cluster::graph::{random_weights, topology_19q, WeightedGraph};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qaoa-cluster"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn write_triangle(dir: &Path) -> String {
    let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
    let path = dir.join("triangle.json");
    g.write_json(&path).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn solve_reports_the_triangle_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_triangle(dir.path());
    let out = run(&[
        "solve", "--graph", &graph, "--p", "1", "--shots", "200", "--budget", "10", "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("JSON output");
    assert_eq!(report["nodes"], 3);
    assert_eq!(report["edges"], 3);
    assert_eq!(report["optimum"], 2.0);
    assert_eq!(report["best_cost"], 2.0);
    assert_eq!(report["reached_optimum"], true);
    let labels = report["labels"].as_array().expect("labels array");
    assert_eq!(labels.len(), 3);
}

#[test]
fn solve_exit_codes_for_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    // Missing file → usage error (2).
    let missing = dir.path().join("absent.json");
    let out = run(&["solve", "--graph", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // Malformed JSON → usage error (2).
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let out = run(&["solve", "--graph", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // Graph with an out-of-range endpoint → usage error (2).
    let invalid = dir.path().join("invalid.json");
    std::fs::write(&invalid, r#"{"nodes": 2, "edges": [[0, 5, 1.0]]}"#).unwrap();
    let out = run(&["solve", "--graph", invalid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("invalid graph"));

    // Unknown flag → clap usage error (2).
    let out = run(&["solve", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_accepts_the_device_noise_table_only_for_19_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let triangle = write_triangle(dir.path());
    let out = run(&["solve", "--graph", &triangle, "--noise", "table-s1"]);
    assert_eq!(out.status.code(), Some(2), "3-node graph cannot use the 19-qubit table");
    assert!(stderr(&out).contains("19"));

    let device = dir.path().join("device.json");
    random_weights(&topology_19q(), 5).write_json(&device).unwrap();
    let out = run(&[
        "solve", "--graph", device.to_str().unwrap(), "--noise", "table-s1", "--shots", "50",
        "--budget", "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("JSON output");
    assert_eq!(report["nodes"], 19);

    let out = run(&["solve", "--graph", &triangle, "--noise", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cluster_splits_point_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("points.json");
    std::fs::write(
        &data,
        r#"{"kind": "points", "data": [[0.0, 0.0], [0.1, 0.0], [9.0, 0.0], [9.1, 0.0]]}"#,
    )
    .unwrap();
    let out = run(&["cluster", "--data", data.to_str().unwrap(), "--solver", "brute-force"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let labels: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("JSON output");
    let l: Vec<u64> =
        labels["labels"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    // Nearby points land in the same cluster (up to a global flip).
    assert_eq!(l.len(), 4);
    assert_eq!(l[0], l[1]);
    assert_eq!(l[2], l[3]);
    assert_ne!(l[0], l[2]);

    // --out writes the same JSON to a file.
    let labels_path = dir.path().join("labels.json");
    let out = run(&[
        "cluster",
        "--data",
        data.to_str().unwrap(),
        "--solver",
        "brute-force",
        "--out",
        labels_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&labels_path).unwrap()).unwrap();
    assert_eq!(written, labels);
}

#[test]
fn cluster_boxes_with_qaoa_solver() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("boxes.json");
    std::fs::write(
        &data,
        r#"{"kind": "boxes", "data": [
            {"center": [0.0, 0.0], "size": [1.0, 1.0]},
            {"center": [0.5, 0.0], "size": [1.0, 1.0]},
            {"center": [0.2, 0.3], "size": [1.0, 1.0]}
        ]}"#,
    )
    .unwrap();
    let out = run(&[
        "cluster", "--data", data.to_str().unwrap(), "--solver", "qaoa", "--shots", "100",
        "--budget", "8", "--seed", "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let labels: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("JSON output");
    assert_eq!(labels["labels"].as_array().unwrap().len(), 3);

    // A single-element dataset is rejected as a usage error.
    let tiny = dir.path().join("tiny.json");
    std::fs::write(&tiny, r#"{"kind": "points", "data": [[0.0, 0.0]]}"#).unwrap();
    let out = run(&["cluster", "--data", tiny.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compile_emits_a_parseable_program() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_triangle(dir.path());
    let out = run(&["compile", "--graph", &graph, "--gamma", "0.5", "--beta", "0.25"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("# qubits 3"), "got: {text}");
    assert!(text.contains("# round 0"));
    assert!(text.contains("RZ(0.5)"));
    assert!(text.contains("CNOT"));
    assert!(text.contains("MEASURE"));
    // The emitted text parses back into an equivalent program.
    let parsed = qaoa_cluster::compile::parse_program(&text).expect("round-trips");
    assert_eq!(parsed.n_qubits(), 3);

    // CZ basis swaps the interaction blocks.
    let out = run(&["compile", "--graph", &graph, "--gamma", "0.5", "--beta", "0.25", "--basis", "cz"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("CZ"));

    // Two layers need two angles each; mismatched counts are usage errors.
    let out = run(&["compile", "--graph", &graph, "--gamma", "0.5,0.7", "--beta", "0.25"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_and_analyze_round_trip_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let graph_path = write_triangle(dir.path());
    let config_path = dir.path().join("exp.json");
    std::fs::write(
        &config_path,
        format!(
            r#"{{
                "name": "tiny",
                "master_seed": 3,
                "runs": 2,
                "budget": 3,
                "shots": 64,
                "graph": {{"source": "file", "path": {graph_path:?}}}
            }}"#
        ),
    )
    .unwrap();

    let out_a = dir.path().join("a");
    let run_a = run(&["run", "--config", config_path.to_str().unwrap(), "--out", out_a.to_str().unwrap()]);
    assert_eq!(run_a.status.code(), Some(0), "stderr: {}", stderr(&run_a));
    for name in
        ["traces.csv", "ecdf.csv", "null_cdf.csv", "ks_report.json", "per_step_costs.csv", "summary.json"]
    {
        assert!(out_a.join(name).is_file(), "{name} missing");
    }

    // Re-running the same config yields byte-identical outputs.
    let out_b = dir.path().join("b");
    let run_b = run(&["run", "--config", config_path.to_str().unwrap(), "--out", out_b.to_str().unwrap()]);
    assert_eq!(run_b.status.code(), Some(0));
    for name in ["traces.csv", "ecdf.csv", "null_cdf.csv", "per_step_costs.csv", "summary.json"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    let traces = out_a.join("traces.csv");
    let analyzed = run(&["analyze", "--traces", traces.to_str().unwrap()]);
    assert_eq!(analyzed.status.code(), Some(0), "stderr: {}", stderr(&analyzed));
    assert!(stdout(&analyzed).contains("instance 0:"));
}

#[test]
fn run_rejects_bad_configurations() {
    let dir = tempfile::tempdir().unwrap();
    // Field problems are reported with their paths, exit code 2.
    let config = dir.path().join("bad.json");
    std::fs::write(
        &config,
        r#"{"name": "x", "master_seed": 1, "runs": 1, "budget": 0, "shots": 0,
           "graph": {"source": "fc20"}}"#,
    )
    .unwrap();
    let out = run(&["run", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("budget"), "stderr: {err}");
    assert!(err.contains("shots"), "stderr: {err}");

    // Unknown preset, missing source, and unknown config fields: all 2.
    let out = run(&["run", "--preset", "nope", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["run", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let unknown = dir.path().join("unknown.json");
    std::fs::write(
        &unknown,
        r#"{"name": "x", "master_seed": 1, "runs": 1, "budget": 1, "shots": 1,
           "graph": {"source": "fc20"}, "extra": 1}"#,
    )
    .unwrap();
    let out = run(&["run", "--config", unknown.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // analyze on a malformed traces file: exit 2 with a line number.
    let traces = dir.path().join("traces.csv");
    std::fs::write(&traces, "wrong,header\n").unwrap();
    let out = run(&["analyze", "--traces", traces.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 1"));
}

#[test]
fn help_and_version_exit_cleanly() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for sub in ["run", "analyze", "solve", "cluster", "compile"] {
        assert!(text.contains(sub), "--help must list the {sub} subcommand");
    }
    let out = run(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
}
