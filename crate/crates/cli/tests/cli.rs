use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_str()
        .unwrap()
        .to_owned()
}

fn nlasso(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlasso"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn gen_args(out: &str) -> Vec<&str> {
    vec![
        "gen",
        "--model",
        "sbm",
        "--clusters",
        "2",
        "--sizes",
        "20,20",
        "--pin",
        "0.5",
        "--pout",
        "0.02",
        "--seed",
        "11",
        "--out",
        out,
        "--partition",
        "p.json",
    ]
}

#[test]
fn gen_writes_graph_and_partition() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlasso(dir.path(), &gen_args("g.json"));
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let g = json(dir.path().join("g.json"));
    assert_eq!(g["nodes"], 40);
    let edges = g["edges"].as_array().unwrap();
    assert!(!edges.is_empty());
    for e in edges {
        let (i, j) = (e[0].as_u64().unwrap(), e[1].as_u64().unwrap());
        assert!(i < j && j < 40);
    }
    let p = json(dir.path().join("p.json"));
    let clusters = p["clusters"].as_array().unwrap();
    assert_eq!(clusters.len(), 2);
    assert!(clusters.iter().all(|c| c.as_array().unwrap().len() == 20));
}

#[test]
fn gen_without_out_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = gen_args("g.json");
    args.truncate(args.len() - 4);
    args.extend(["--partition", "p.json"]);
    let out = nlasso(dir.path(), &args);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_rejects_mismatched_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = gen_args("g.json");
    args[4] = "3";
    assert_eq!(nlasso(dir.path(), &args).status.code(), Some(2));
}

#[test]
fn solve_two_node_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlasso(
        dir.path(),
        &[
            "solve",
            "--graph",
            &fixture("pair.graph.json"),
            "--labels",
            &fixture("pair.labels.json"),
            "--lambda",
            "0.25",
            "--tol",
            "1e-12",
            "--max-iters",
            "1000000",
            "--out",
            "x.json",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = json(dir.path().join("x.json"));
    let x: Vec<f64> = r["x"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(
        (x[0] - 0.75).abs() < 1e-4 && (x[1] + 0.75).abs() < 1e-4,
        "{x:?}"
    );
    assert_eq!(r["status"], "converged");
}

#[test]
fn solve_records_default_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlasso(
        dir.path(),
        &[
            "solve",
            "--graph",
            &fixture("pair.graph.json"),
            "--labels",
            &fixture("pair.labels.json"),
            "--lambda",
            "0.25",
            "--out",
            "x.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = json(dir.path().join("x.json"));
    assert_eq!(r["meta"]["tol"].as_f64(), Some(1e-7));
    assert_eq!(r["meta"]["lambda"].as_f64(), Some(0.25));
}

#[test]
fn solve_rejects_nonpositive_lambda() {
    let dir = tempfile::tempdir().unwrap();
    for lambda in ["0", "-1"] {
        let out = nlasso(
            dir.path(),
            &[
                "solve",
                "--graph",
                &fixture("pair.graph.json"),
                "--labels",
                &fixture("pair.labels.json"),
                "--lambda",
                lambda,
                "--out",
                "x.json",
            ],
        );
        assert_eq!(out.status.code(), Some(2), "lambda {lambda}");
    }
    assert!(!dir.path().join("x.json").exists());
}

#[test]
fn solve_reports_iteration_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlasso(
        dir.path(),
        &[
            "solve",
            "--graph",
            &fixture("pair.graph.json"),
            "--labels",
            &fixture("pair.labels.json"),
            "--lambda",
            "0.25",
            "--max-iters",
            "3",
            "--out",
            "x.json",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(
        json(dir.path().join("x.json"))["status"],
        "max_iters_reached"
    );
}

fn certify(dir: &Path, extra: &[&str]) -> (Option<i32>, Value) {
    let graph = fixture("pair.graph.json");
    let partition = fixture("pair.partition.json");
    let train = fixture("pair.labels.json");
    let mut args = vec![
        "certify",
        "--graph",
        &graph,
        "--partition",
        &partition,
        "--train",
        &train,
        "--out",
        "c.json",
    ];
    args.extend_from_slice(extra);
    let out = nlasso(dir, &args);
    (out.status.code(), json(dir.join("c.json")))
}

#[test]
fn certify_two_node_instance() {
    // each singleton cluster must absorb L through a demand of at most K/2
    let dir = tempfile::tempdir().unwrap();
    let (code, c) = certify(dir.path(), &["--K", "2", "--L", "1"]);
    assert_eq!(code, Some(0));
    assert_eq!(c["status"], "certified");

    let (code, c) = certify(dir.path(), &["--K", "1.9", "--L", "1"]);
    assert_eq!(code, Some(4));
    assert_eq!(c["status"], "refuted");
    assert!(c["witness"].is_object());

    let (code, c) = certify(dir.path(), &["--K", "2", "--max-L", "--tol", "1e-6"]);
    assert_eq!(code, Some(0));
    assert!((c["L"].as_f64().unwrap() - 1.0).abs() < 1e-5);
}

#[test]
fn certify_ncc_samples_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let (code, c) = certify(
        dir.path(),
        &["--K", "2", "--L", "1", "--ncc-samples", "500"],
    );
    assert_eq!(code, Some(0));
    assert_eq!(c["ncc"]["samples_tested"], 500);
    assert_eq!(c["ncc"]["violated"], false);
}

fn example_config() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/example.toml")
        .to_str()
        .unwrap()
        .to_owned()
}

#[test]
fn experiment_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlasso(
        dir.path(),
        &[
            "experiment",
            "--config",
            &example_config(),
            "--out",
            "r.csv",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("sigma,M,lambda,trial,tv_error,node_error,iters,K,L,kappa")
    );
    // 2 sigmas x 2 sizes x 1 lambda x 5 trials
    assert_eq!(lines.count(), 20);
    let meta = json(dir.path().join("r.csv.meta.json"));
    assert!(meta["graph_stats"]["rho_f"].as_f64().unwrap() > 0.0);

    let report = |grid: &str, extra: &[&str]| {
        let mut args = vec![
            "report",
            "--results",
            "r.csv",
            "--eta-grid",
            grid,
            "--out",
            "b.csv",
        ];
        args.extend_from_slice(extra);
        nlasso(dir.path(), &args)
    };
    // several cells remain without selectors
    assert_eq!(report("0.5:2:0.5", &[]).status.code(), Some(2));
    assert_eq!(
        report("0.5:2:0", &["--sigma", "0.1", "--M", "6"])
            .status
            .code(),
        Some(2)
    );
    let out = report("0.5:2:0.5", &["--sigma", "0.1", "--M", "6"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "eta,empirical_freq,bound");
    assert_eq!(rows.len(), 5);
}

#[test]
fn missing_input_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlasso(
        dir.path(),
        &[
            "solve",
            "--graph",
            "absent.json",
            "--labels",
            "absent.json",
            "--lambda",
            "1",
            "--out",
            "x.json",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}
