//! End-to-end tests driving the `tcam` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tcam_cli::formats::{
    EdgeOut, ProvenanceOut, ResultsDoc, Scores, TruthFile, RESULTS_VERSION,
};

fn tcam(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcam"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(dir: &Path, args: &[&str]) -> Output {
    let out = tcam(dir, args);
    assert!(
        out.status.success(),
        "command {args:?} failed with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn expect_exit(dir: &Path, args: &[&str], code: i32) -> String {
    let out = tcam(dir, args);
    assert_eq!(
        out.status.code(),
        Some(code),
        "command {args:?}: expected exit {code}, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_value(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Writes a prior file whose tier map is copied from a truth file.
fn prior_from_truth(dir: &Path, truth_path: &Path) -> PathBuf {
    let truth = read_value(truth_path);
    let prior = serde_json::json!({ "tiers": truth["tiers"] });
    let path = dir.join("prior.json");
    fs::write(&path, serde_json::to_string(&prior).unwrap()).unwrap();
    path
}

/// A small simulated dataset with tiers, shared by several tests.
fn simulated(dir: &Path, seed: &str) -> (PathBuf, PathBuf) {
    let data = dir.join("data.csv");
    run_ok(
        dir,
        &[
            "simulate", "--p", "5", "--tiers", "2", "--n", "300", "--edge-prob", "0.5", "--seed",
            seed, "--out", data.to_str().unwrap(),
        ],
    );
    (data.clone(), dir.join("data.truth.json"))
}

fn minimal_doc(columns: &[&str], edges: &[(&str, &str)], tiers: &[(&str, usize)]) -> ResultsDoc {
    ResultsDoc {
        version: RESULTS_VERSION.to_string(),
        columns: columns.iter().map(|s| s.to_string()).collect(),
        edges: edges
            .iter()
            .map(|(s, t)| EdgeOut {
                source: s.to_string(),
                target: t.to_string(),
                gain: Some(0.5),
                p_value: 1e-6,
            })
            .collect(),
        ordering: columns.iter().map(|s| s.to_string()).collect(),
        scores: Scores { initial: columns.len() as f64, final_: 1.0 },
        trace: Vec::new(),
        provenance: ProvenanceOut {
            mode: "tcam".to_string(),
            seed: 0,
            n_rows: 100,
            imputed: Vec::new(),
            dropped: Vec::new(),
            tiers: tiers.iter().map(|(n, t)| (n.to_string(), *t)).collect(),
            roots: Vec::new(),
            candidate_counts: columns.iter().map(|n| (n.to_string(), 0)).collect(),
        },
        timings: None,
    }
}

fn write_doc(path: &Path, doc: &ResultsDoc) {
    fs::write(path, serde_json::to_string_pretty(doc).unwrap()).unwrap();
}

// ---------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------

#[test]
fn simulate_is_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for (path, seed) in [(&a, "1"), (&b, "1"), (&c, "2")] {
        run_ok(
            dir.path(),
            &[
                "simulate", "--p", "4", "--tiers", "2", "--n", "50", "--seed", seed, "--out",
                path.to_str().unwrap(),
            ],
        );
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "same seed, same bytes");
    assert_eq!(
        fs::read(dir.path().join("a.truth.json")).unwrap(),
        fs::read(dir.path().join("b.truth.json")).unwrap()
    );
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap(), "different seed, different data");
}

#[test]
fn simulate_truth_reflects_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let no_edges = dir.path().join("no_edges.csv");
    run_ok(
        dir.path(),
        &[
            "simulate", "--p", "4", "--tiers", "1", "--n", "30", "--edge-prob", "0", "--out",
            no_edges.to_str().unwrap(),
        ],
    );
    let truth = read_value(&dir.path().join("no_edges.truth.json"));
    assert_eq!(truth["edges"].as_array().unwrap().len(), 0);
    // Single-tier models carry no tier metadata at all.
    assert!(truth.get("tiers").is_none(), "unexpected tiers key: {truth}");

    let typed: TruthFile =
        serde_json::from_value(truth).expect("truth file matches the typed layout");
    assert_eq!(typed.columns, ["x1", "x2", "x3", "x4"]);
}

#[test]
fn simulate_rejects_bad_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    for args in [
        vec!["simulate", "--p", "0", "--out", out.to_str().unwrap()],
        vec!["simulate", "--p", "3", "--tiers", "4", "--out", out.to_str().unwrap()],
        vec!["simulate", "--p", "3", "--edge-prob", "1.5", "--out", out.to_str().unwrap()],
        vec!["simulate", "--p", "3", "--n", "0", "--out", out.to_str().unwrap()],
    ] {
        expect_exit(dir.path(), &args, 2);
    }
}

// ---------------------------------------------------------------------
// discover
// ---------------------------------------------------------------------

#[test]
fn discover_output_is_typed_and_matches_published_schema() {
    let dir = tempfile::tempdir().unwrap();
    let (data, truth) = simulated(dir.path(), "5");
    let prior = prior_from_truth(dir.path(), &truth);
    let results = dir.path().join("results.json");
    run_ok(
        dir.path(),
        &[
            "discover",
            data.to_str().unwrap(),
            "--prior",
            prior.to_str().unwrap(),
            "--seed",
            "7",
            "--out",
            results.to_str().unwrap(),
        ],
    );

    // Typed round-trip: every field accounted for, no unknown keys.
    let doc: ResultsDoc =
        serde_json::from_str(&fs::read_to_string(&results).unwrap()).expect("typed parse");
    assert_eq!(doc.version, RESULTS_VERSION);
    assert_eq!(doc.provenance.mode, "tcam", "tier prior should select the tier-aware search");
    assert!(doc.timings.is_none(), "pinned seed must suppress timings");
    assert_eq!(doc.ordering.len(), doc.columns.len());
    assert!(doc.scores.final_ <= doc.scores.initial + 1e-12);
    for e in &doc.edges {
        assert!((0.0..=1.0).contains(&e.p_value));
    }

    // The emitted document uses exactly the keys the published schema
    // declares, at the top level and inside each nested object.
    let schema = read_value(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/results.schema.json"),
    );
    let emitted = read_value(&results);
    let schema_keys: Vec<&String> =
        schema["properties"].as_object().unwrap().keys().collect();
    let emitted_keys: Vec<&String> = emitted.as_object().unwrap().keys().collect();
    assert_eq!(schema_keys, emitted_keys, "top-level keys diverge from schema");
    let required: Vec<&str> =
        schema["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for key in &required {
        assert!(emitted.get(key).is_some(), "required key '{key}' missing");
    }
    let edge_props = schema["definitions"]["edge"]["properties"].as_object().unwrap();
    for edge in emitted["edges"].as_array().unwrap() {
        for key in edge.as_object().unwrap().keys() {
            assert!(edge_props.contains_key(key), "edge key '{key}' not in schema");
        }
    }
    let prov_props = schema["definitions"]["provenance"]["properties"].as_object().unwrap();
    for key in emitted["provenance"].as_object().unwrap().keys() {
        assert!(prov_props.contains_key(key), "provenance key '{key}' not in schema");
    }
}

#[test]
fn discover_emits_timings_only_without_a_pinned_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (data, _) = simulated(dir.path(), "6");
    let timed = dir.path().join("timed.json");
    run_ok(dir.path(), &["discover", data.to_str().unwrap(), "--out", timed.to_str().unwrap()]);
    let doc = read_value(&timed);
    let timings = &doc["timings"];
    assert!(!timings.is_null(), "unpinned run should report timings");
    assert!(timings["total_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn discover_handles_missing_and_constant_columns() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("messy.csv");
    let mut csv = String::from("a,b,steady\n");
    // Column a drives b; 'steady' never varies; one b cell is missing.
    for i in 0..60 {
        let a = (i as f64) / 10.0 - 3.0;
        let b = if i == 7 { "NA".to_string() } else { format!("{}", (2.0 * a).sin()) };
        csv.push_str(&format!("{a},{b},5.5\n"));
    }
    fs::write(&data, csv).unwrap();
    let results = dir.path().join("results.json");
    run_ok(
        dir.path(),
        &[
            "discover",
            data.to_str().unwrap(),
            "--seed",
            "1",
            "--out",
            results.to_str().unwrap(),
        ],
    );
    let doc: ResultsDoc = serde_json::from_str(&fs::read_to_string(&results).unwrap()).unwrap();
    assert_eq!(doc.columns, ["a", "b"], "constant column must be dropped");
    assert_eq!(doc.provenance.dropped.len(), 1);
    assert_eq!(doc.provenance.dropped[0].column, "steady");
    assert_eq!(doc.provenance.dropped[0].reason, "constant");
    assert_eq!(doc.provenance.imputed.len(), 1);
    assert_eq!(doc.provenance.imputed[0].column, "b");
    assert_eq!(doc.provenance.imputed[0].count, 1);
}

#[test]
fn discover_with_fully_forbidden_prior_returns_empty_graph() {
    let dir = tempfile::tempdir().unwrap();
    let (data, _) = simulated(dir.path(), "8");
    let mut forbidden = Vec::new();
    for a in 1..=5 {
        for b in 1..=5 {
            if a != b {
                forbidden.push((format!("x{a}"), format!("x{b}")));
            }
        }
    }
    let prior = dir.path().join("prior.json");
    fs::write(
        &prior,
        serde_json::to_string(&serde_json::json!({ "forbidden": forbidden })).unwrap(),
    )
    .unwrap();
    let results = dir.path().join("results.json");
    run_ok(
        dir.path(),
        &[
            "discover",
            data.to_str().unwrap(),
            "--prior",
            prior.to_str().unwrap(),
            "--seed",
            "2",
            "--out",
            results.to_str().unwrap(),
        ],
    );
    let doc: ResultsDoc = serde_json::from_str(&fs::read_to_string(&results).unwrap()).unwrap();
    assert!(doc.edges.is_empty(), "forbidding everything must yield an empty graph");
}

#[test]
fn discover_mode_flag_overrides_the_prior() {
    let dir = tempfile::tempdir().unwrap();
    let (data, truth) = simulated(dir.path(), "9");
    let prior = prior_from_truth(dir.path(), &truth);
    let results = dir.path().join("results.json");
    run_ok(
        dir.path(),
        &[
            "discover",
            data.to_str().unwrap(),
            "--prior",
            prior.to_str().unwrap(),
            "--mode",
            "cam",
            "--seed",
            "3",
            "--out",
            results.to_str().unwrap(),
        ],
    );
    let doc: ResultsDoc = serde_json::from_str(&fs::read_to_string(&results).unwrap()).unwrap();
    assert_eq!(doc.provenance.mode, "cam");
    assert!(doc.provenance.tiers.values().all(|&t| t == 1), "plain mode ignores tiers");
}

#[test]
fn discover_validation_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let (data, _) = simulated(dir.path(), "10");

    // Unknown column in the prior.
    let bad_name = dir.path().join("bad_name.json");
    fs::write(&bad_name, r#"{"roots": ["nope"]}"#).unwrap();
    let stderr = expect_exit(
        dir.path(),
        &["discover", data.to_str().unwrap(), "--prior", bad_name.to_str().unwrap()],
        2,
    );
    assert!(stderr.contains("nope"), "stderr should name the column: {stderr}");

    // Partial tier map.
    let partial = dir.path().join("partial.json");
    fs::write(&partial, r#"{"tiers": {"x1": 1}}"#).unwrap();
    let stderr = expect_exit(
        dir.path(),
        &["discover", data.to_str().unwrap(), "--prior", partial.to_str().unwrap()],
        2,
    );
    assert!(stderr.contains("partial"), "stderr: {stderr}");

    // Unparseable cell.
    let garbage = dir.path().join("garbage.csv");
    fs::write(&garbage, "a,b\n1.0,2.0\noops,3.0\n").unwrap();
    let stderr = expect_exit(dir.path(), &["discover", garbage.to_str().unwrap()], 2);
    assert!(stderr.contains("oops"), "stderr: {stderr}");

    // Too few rows to fit anything.
    let tiny = dir.path().join("tiny.csv");
    fs::write(&tiny, "a,b\n1.0,2.0\n2.0,1.0\n3.0,4.0\n").unwrap();
    expect_exit(dir.path(), &["discover", tiny.to_str().unwrap()], 2);

    // Bad global flags.
    expect_exit(dir.path(), &["discover", data.to_str().unwrap(), "--prune-alpha", "0"], 2);
    expect_exit(dir.path(), &["discover", data.to_str().unwrap(), "--pns-threshold", "-1"], 2);
}

// ---------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------

fn write_truth(path: &Path, columns: &[&str], edges: &[(&str, &str)]) {
    let truth = TruthFile {
        columns: columns.iter().map(|s| s.to_string()).collect(),
        edges: edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        tiers: None,
        functions: BTreeMap::new(),
        noise_sd: vec![0.3; columns.len()],
    };
    fs::write(path, serde_json::to_string_pretty(&truth).unwrap()).unwrap();
}

#[test]
fn evaluate_against_truth_scores_perfect_and_empty_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let cols = ["a", "b", "c"];
    let truth_edges = [("a", "b"), ("b", "c")];
    let truth = dir.path().join("truth.json");
    write_truth(&truth, &cols, &truth_edges);

    let perfect = dir.path().join("perfect.json");
    write_doc(&perfect, &minimal_doc(&cols, &truth_edges, &[]));
    let out = run_ok(
        dir.path(),
        &["evaluate", perfect.to_str().unwrap(), "--truth", truth.to_str().unwrap()],
    );
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let run = &report["runs"][0];
    assert_eq!(run["shd"], 0);
    assert_eq!(run["precision"], 1.0);
    assert_eq!(run["recall"], 1.0);
    assert!(report.get("summary").is_none(), "single run has no summary");

    let empty = dir.path().join("empty.json");
    write_doc(&empty, &minimal_doc(&cols, &[], &[]));
    let out = run_ok(
        dir.path(),
        &["evaluate", empty.to_str().unwrap(), "--truth", truth.to_str().unwrap()],
    );
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let run = &report["runs"][0];
    assert_eq!(run["shd"], 2, "missing both true edges");
    assert_eq!(run["recall"], 0.0);
}

#[test]
fn evaluate_batch_mode_summarizes_and_broadcasts_the_reference() {
    let dir = tempfile::tempdir().unwrap();
    let cols = ["a", "b", "c"];
    let truth = dir.path().join("truth.json");
    write_truth(&truth, &cols, &[("a", "b")]);
    let perfect = dir.path().join("perfect.json");
    write_doc(&perfect, &minimal_doc(&cols, &[("a", "b")], &[]));
    let off = dir.path().join("off.json");
    write_doc(&off, &minimal_doc(&cols, &[("a", "b"), ("a", "c")], &[]));

    let out = run_ok(
        dir.path(),
        &[
            "evaluate",
            perfect.to_str().unwrap(),
            off.to_str().unwrap(),
            "--truth",
            truth.to_str().unwrap(),
        ],
    );
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["runs"].as_array().unwrap().len(), 2);
    let summary = &report["summary"];
    assert_eq!(summary["runs"], 2);
    assert_eq!(summary["mean_distance"], 0.5);
    // Sample standard deviation of {0, 1}.
    let sd = summary["sd_distance"].as_f64().unwrap();
    assert!((sd - (0.5f64).sqrt()).abs() < 1e-12, "sd {sd}");
}

#[test]
fn evaluate_against_expert_annotations_uses_adapted_distance() {
    let dir = tempfile::tempdir().unwrap();
    let cols = ["a", "b", "c", "d"];
    // Estimated: a->b (sure hit), c->d (undepicted), b->c possible hit.
    let est = dir.path().join("est.json");
    write_doc(&est, &minimal_doc(&cols, &[("a", "b"), ("b", "c"), ("c", "d")], &[]));
    let expert = dir.path().join("expert.json");
    fs::write(
        &expert,
        r#"{"sure": [["a","b"],["a","c"]], "possible": [["b","c"]]}"#,
    )
    .unwrap();
    let out = run_ok(
        dir.path(),
        &["evaluate", est.to_str().unwrap(), "--expert", expert.to_str().unwrap()],
    );
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    // Missing sure a->c (+1) and undepicted c->d (+1).
    assert_eq!(report["runs"][0]["ashd"], 2);
    assert!(report["runs"][0].get("shd").is_none());
}

#[test]
fn evaluate_rejects_node_mismatch_and_ambiguous_flags() {
    let dir = tempfile::tempdir().unwrap();
    let est = dir.path().join("est.json");
    write_doc(&est, &minimal_doc(&["a", "b"], &[], &[]));
    let truth = dir.path().join("truth.json");
    write_truth(&truth, &["a", "z"], &[]);
    expect_exit(
        dir.path(),
        &["evaluate", est.to_str().unwrap(), "--truth", truth.to_str().unwrap()],
        2,
    );
    expect_exit(dir.path(), &["evaluate", est.to_str().unwrap()], 2);
    let expert = dir.path().join("expert.json");
    fs::write(&expert, r#"{"sure": []}"#).unwrap();
    expect_exit(
        dir.path(),
        &[
            "evaluate",
            est.to_str().unwrap(),
            "--truth",
            truth.to_str().unwrap(),
            "--expert",
            expert.to_str().unwrap(),
        ],
        2,
    );
}

// ---------------------------------------------------------------------
// export-dot
// ---------------------------------------------------------------------

#[test]
fn export_dot_renders_tiers_and_round_trips_counts() {
    let dir = tempfile::tempdir().unwrap();
    let doc = minimal_doc(
        &["a", "b", "c"],
        &[("a", "c"), ("b", "c")],
        &[("a", 1), ("b", 1), ("c", 2)],
    );
    let results = dir.path().join("results.json");
    write_doc(&results, &doc);
    let out = run_ok(dir.path(), &["export-dot", results.to_str().unwrap()]);
    let dot = String::from_utf8(out.stdout).unwrap();
    assert_eq!(dot.matches("fillcolor").count(), 3, "one fill per node:\n{dot}");
    assert_eq!(dot.matches(" -> ").count(), 2, "one arrow per edge:\n{dot}");
    let distinct_fills: std::collections::BTreeSet<&str> = dot
        .lines()
        .filter(|l| l.contains("fillcolor"))
        .map(|l| l.split("fillcolor=").nth(1).unwrap().split('"').nth(1).unwrap())
        .collect();
    assert_eq!(distinct_fills.len(), 2, "two tiers, two colors:\n{dot}");

    // Empty graph: nodes only.
    let empty = dir.path().join("empty.json");
    write_doc(&empty, &minimal_doc(&["a", "b"], &[], &[]));
    let out = run_ok(dir.path(), &["export-dot", empty.to_str().unwrap()]);
    let dot = String::from_utf8(out.stdout).unwrap();
    assert_eq!(dot.matches("fillcolor").count(), 2);
    assert_eq!(dot.matches(" -> ").count(), 0);
}

#[test]
fn export_dot_rejects_malformed_documents() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"version": "1", "columns": []}"#).unwrap();
    expect_exit(dir.path(), &["export-dot", bad.to_str().unwrap()], 2);

    let mut doc = minimal_doc(&["a", "b"], &[], &[]);
    doc.version = "99".to_string();
    let wrong_version = dir.path().join("v99.json");
    write_doc(&wrong_version, &doc);
    expect_exit(dir.path(), &["export-dot", wrong_version.to_str().unwrap()], 2);
}

// ---------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------

#[test]
fn benchmark_compares_plain_and_tier_aware_searches() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(
        dir.path(),
        &[
            "benchmark", "--p", "4", "--tiers", "2", "--n", "150", "--edge-prob", "0.5",
            "--runs", "2", "--seed", "3",
        ],
    );
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let methods = report["methods"].as_array().unwrap();
    assert_eq!(methods.len(), 2);
    assert_eq!(methods[0]["method"], "cam");
    assert_eq!(methods[1]["method"], "tcam");
    for m in methods {
        assert!(m["mean_ashd"].as_f64().unwrap() >= 0.0);
        assert!(m["mean_time_s"].as_f64().unwrap() > 0.0);
    }
    assert_eq!(report["runs"].as_array().unwrap().len(), 4, "two methods per seed");
    expect_exit(dir.path(), &["benchmark", "--runs", "0"], 2);
}

// ---------------------------------------------------------------------
// merge
// ---------------------------------------------------------------------

#[test]
fn merge_joins_children_by_position_and_warns_on_orphans() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("mother.csv"), "id,weight\nM1,10.5\nM2,10.7\n").unwrap();
    fs::write(dir.path().join("bolts.csv"), "id,len\nB1,5.0\nB2,5.1\nB3,4.9\nB4,1.0\n").unwrap();
    fs::write(
        dir.path().join("bom.csv"),
        "child_id,mother_id,position\nB1,M1,1\nB2,M1,2\nB3,M2,1\n",
    )
    .unwrap();
    let out = run_ok(
        dir.path(),
        &["merge", "mother.csv", "--child", "bolts.csv", "--bom", "bom.csv"],
    );
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "id,weight,1.len,2.len");
    assert_eq!(lines.next().unwrap(), "M1,10.5,5,5.1");
    assert_eq!(lines.next().unwrap(), "M2,10.7,4.9,NA");
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("B4"), "orphan B4 should be warned about: {stderr}");

    // Placing two children at the same position is an error.
    fs::write(
        dir.path().join("bad_bom.csv"),
        "child_id,mother_id,position\nB1,M1,1\nB2,M1,1\n",
    )
    .unwrap();
    expect_exit(
        dir.path(),
        &["merge", "mother.csv", "--child", "bolts.csv", "--bom", "bad_bom.csv"],
        2,
    );
}
