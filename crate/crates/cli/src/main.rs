//! `nlasso` command line tool.
//!
//! Exit codes: 0 success, 1 input error, 2 usage error, 3 solver hit its
//! iteration cap, 4 certificate refuted.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use nlasso::experiments::{
    self, eta_grid, evaluate_bound, generate_sbm, run_experiment, GraphStats, SbmSpec, TrialRecord,
    CLUSTER_SIZE_NOTE,
};
use nlasso::flow::{
    check_resolving, max_certifiable_l, ncc_sampled_check, CertificateStatus, CertifyOptions,
};
use nlasso::io::{
    read_json, write_atomic, write_json, CertificateFile, GraphFile, LabelFile, Meta,
    PartitionFile, ResultFile, SignalFile, TrainingSetFile,
};
use nlasso::signal::{
    derive_seed, sample_labels, sample_training_set, ClusteredSignal, NoiseModel,
};
use nlasso::solver::{solve, SolveStatus, SolverConfig};
use nlasso::Error;

const EXIT_INPUT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_REFUTED: u8 = 4;

#[derive(Parser)]
#[command(name = "nlasso", version, about = "Network Lasso on empirical graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random graph with planted clusters.
    Gen(GenArgs),
    /// Solve the network Lasso for a labelled training set.
    Solve(SolveArgs),
    /// Check whether a training set resolves a partition.
    Certify(CertifyArgs),
    /// Run a Monte-Carlo experiment from a TOML config.
    Experiment(ExperimentArgs),
    /// Compare empirical TV-error tails against the probability bound.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Sbm,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[arg(long)]
    clusters: usize,
    /// Cluster sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long)]
    pin: f64,
    #[arg(long)]
    pout: f64,
    #[arg(long, default_value_t = 1.0)]
    within_weight: f64,
    #[arg(long, default_value_t = 1.0)]
    between_weight: f64,
    #[arg(long)]
    seed: u64,
    /// Graph JSON output.
    #[arg(long)]
    out: PathBuf,
    /// Partition JSON output.
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Cluster values; writes the expanded ground truth.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    signal: Option<Vec<f64>>,
    /// Ground-truth JSON output [default: OUT with extension `signal.json`].
    #[arg(long, requires = "signal")]
    signal_out: Option<PathBuf>,
    /// Label JSON output: noisy labels on a random training set.
    #[arg(long, requires_all = ["signal", "train_size"])]
    labels: Option<PathBuf>,
    #[arg(long, requires = "labels")]
    train_size: Option<usize>,
    #[arg(long, default_value_t = 0.0, requires = "labels")]
    sigma: f64,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, value_parser = positive)]
    lambda: f64,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_iters: u64,
    /// Relative change of the averaged iterate that stops the iteration.
    #[arg(long, default_value_t = SolverConfig::DEFAULT_REL_TOL, value_parser = positive)]
    tol: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    partition: PathBuf,
    /// JSON with a `training_set` field (label files qualify).
    #[arg(long)]
    train: PathBuf,
    #[arg(long = "K", value_parser = positive)]
    k: f64,
    #[arg(long = "L", value_parser = positive, required_unless_present = "max_l", conflicts_with = "max_l")]
    l: Option<f64>,
    /// Search for the largest certifiable L instead.
    #[arg(long = "max-L")]
    max_l: bool,
    /// Bisection tolerance for --max-L.
    #[arg(long, default_value_t = 1e-3, value_parser = positive, requires = "max_l")]
    tol: f64,
    /// Also run a sampled compatibility-condition check.
    #[arg(long)]
    ncc_samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Results CSV; graph statistics go to `<OUT>.meta.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Debug)]
struct EtaGrid(Vec<f64>);

fn parse_grid(s: &str) -> Result<EtaGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts[..] else {
        return Err("expected a:b:step".into());
    };
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    eta_grid(num(a)?, num(b)?, num(step)?)
        .map(EtaGrid)
        .map_err(|e| e.to_string())
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    results: PathBuf,
    /// Experiment metadata [default: `<RESULTS>.meta.json`].
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long, value_parser = parse_grid)]
    eta_grid: EtaGrid,
    /// Cell selection; required when the results hold several cells.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Input(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Certify(a) => certify(a),
        Command::Experiment(a) => experiment(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn gen(a: GenArgs) -> Outcome {
    if a.clusters != a.sizes.len() {
        return Err(Failure::Usage(format!(
            "--clusters {} does not match {} --sizes entries",
            a.clusters,
            a.sizes.len()
        )));
    }
    if let Some(sig) = &a.signal {
        if sig.len() != a.clusters {
            return Err(Failure::Usage(format!(
                "--signal has {} values for {} clusters",
                sig.len(),
                a.clusters
            )));
        }
    }
    let Model::Sbm = a.model;
    let spec = SbmSpec {
        sizes: a.sizes.clone(),
        p_in: a.pin,
        p_out: a.pout,
        within_weight: a.within_weight,
        between_weight: a.between_weight,
    };
    let (graph, partition) = generate_sbm(&spec, a.seed)?;
    let meta = Meta::new()
        .with("command", "gen")
        .with("model", "sbm")
        .with("sizes", json!(a.sizes))
        .with("pin", a.pin)
        .with("pout", a.pout)
        .with("within_weight", a.within_weight)
        .with("between_weight", a.between_weight)
        .with("seed", a.seed);
    write_json(&a.out, &GraphFile::from_graph(&graph, meta.clone()))?;
    if let Some(p) = &a.partition {
        let file = PartitionFile {
            clusters: partition.clusters().to_vec(),
            meta: Some(meta.clone()),
        };
        write_json(p, &file)?;
    }
    if let Some(values) = a.signal {
        let truth = ClusteredSignal::new(partition, values.clone())?.expand();
        let meta = meta.with("signal", json!(values));
        let path = a
            .signal_out
            .unwrap_or_else(|| sibling(&a.out, ".signal.json"));
        write_json(
            &path,
            &SignalFile {
                x: truth.clone(),
                meta: Some(meta.clone()),
            },
        )?;
        if let (Some(path), Some(size)) = (a.labels, a.train_size) {
            let set = sample_training_set(&graph, size, derive_seed(a.seed, &[1]))?;
            let noise = NoiseModel::new(a.sigma, derive_seed(a.seed, &[2]))?;
            let labels = sample_labels(&truth, &set, &noise)?;
            let meta = meta.with("train_size", size).with("sigma", a.sigma);
            write_json(
                &path,
                &LabelFile::from_labels(&labels, a.sigma, a.seed, meta),
            )?;
        }
    }
    Ok(0)
}

fn solve_cmd(a: SolveArgs) -> Outcome {
    let graph = read_json::<GraphFile>(&a.graph)?.to_graph()?;
    let labels = read_json::<LabelFile>(&a.labels)?
        .to_labels()
        .map_err(|e| Failure::Input(format!("{}: {e}", a.labels.display())))?;
    labels
        .check_against(&graph)
        .map_err(|e| Failure::Input(format!("{}: {e}", a.labels.display())))?;
    let cfg = SolverConfig {
        max_iters: a.max_iters as usize,
        rel_tol: a.tol,
        ..SolverConfig::new(a.lambda)
    };
    let result = solve(&graph, &labels, &cfg)?;
    let meta = Meta::new()
        .with("command", "solve")
        .with("lambda", a.lambda)
        .with("max_iters", a.max_iters)
        .with("tol", a.tol)
        .with("window", cfg.window);
    write_json(&a.out, &ResultFile::from_result(&result, meta))?;
    Ok(match result.status {
        SolveStatus::Converged => 0,
        SolveStatus::MaxItersReached => {
            eprintln!(
                "warning: stopped at --max-iters {} before reaching --tol {}",
                a.max_iters, a.tol
            );
            EXIT_NOT_CONVERGED
        }
    })
}

fn certify(a: CertifyArgs) -> Outcome {
    let graph = read_json::<GraphFile>(&a.graph)?.to_graph()?;
    let partition = read_json::<PartitionFile>(&a.partition)?
        .to_partition(&graph)
        .map_err(|e| Failure::Input(format!("{}: {e}", a.partition.display())))?;
    let set = read_json::<TrainingSetFile>(&a.train)?
        .to_nodes(&graph)
        .map_err(|e| Failure::Input(format!("{}: {e}", a.train.display())))?;
    let opts = CertifyOptions::default();
    let mut meta = Meta::new().with("command", "certify").with("K", a.k);

    let l = match a.l {
        Some(l) => l,
        None => {
            meta = meta.with("max_L", true).with("tol", a.tol);
            match max_certifiable_l(&graph, &partition, &set, a.k, a.tol, &opts) {
                Ok(l) if l.is_infinite() => {
                    return Err(Failure::Input(
                        "partition has no boundary edges, so every L is certifiable".into(),
                    ))
                }
                Ok(l) => l,
                // nothing positive passes; report the refutation at the search resolution
                Err(Error::NoFeasibleL { .. }) => a.tol,
                Err(e) => return Err(e.into()),
            }
        }
    };
    let cert = check_resolving(&graph, &partition, &set, a.k, l, &opts)?;
    let ncc = match a.ncc_samples {
        Some(n) => {
            meta = meta.with("ncc_samples", n).with("seed", a.seed);
            Some(ncc_sampled_check(
                &graph, &partition, &set, a.k, l, n, a.seed,
            )?)
        }
        None => None,
    };
    write_json(&a.out, &CertificateFile::from_certificate(&cert, ncc, meta))?;
    Ok(match cert.status {
        CertificateStatus::Refuted => EXIT_REFUTED,
        _ => 0,
    })
}

fn experiment(a: ExperimentArgs) -> Outcome {
    let cfg = experiments::read_config(&a.config)?;
    let run = run_experiment(&cfg)?;
    let meta = Meta::new()
        .with("command", "experiment")
        .with("config", serde_json::to_value(&cfg).map_err(Error::from)?)
        .with(
            "graph_stats",
            serde_json::to_value(run.stats).map_err(Error::from)?,
        )
        .with(
            "certifications",
            serde_json::to_value(&run.certifications).map_err(Error::from)?,
        );
    experiments::emit_results(&run.records, &a.out)?;
    write_json(&with_suffix(&a.out, ".meta.json"), &meta)?;
    Ok(0)
}

fn report(a: ReportArgs) -> Outcome {
    let bytes = std::fs::read(&a.results)
        .map_err(|e| Failure::Input(format!("{}: {e}", a.results.display())))?;
    let records = experiments::parse_results(&bytes, &a.results.display().to_string())?;
    let meta_path = a
        .meta
        .clone()
        .unwrap_or_else(|| with_suffix(&a.results, ".meta.json"));
    let meta: serde_json::Value = read_json(&meta_path)?;
    let stats: GraphStats = serde_json::from_value(meta["graph_stats"].clone())
        .map_err(|e| Failure::Input(format!("{}: graph_stats: {e}", meta_path.display())))?;

    let selected: Vec<TrialRecord> = records
        .into_iter()
        .filter(|r| a.sigma.is_none_or(|s| r.sigma == s))
        .filter(|r| a.m.is_none_or(|m| r.m == m))
        .filter(|r| a.lambda.is_none_or(|l| r.lambda == l))
        .collect();
    let cells = experiments::cells(&selected);
    let (sigma, m, lambda) = match cells[..] {
        [] => return Err(Failure::Input("no records match the cell selection".into())),
        [cell] => cell,
        _ => {
            let list: Vec<String> = cells
                .iter()
                .map(|(s, m, l)| format!("--sigma {s} --M {m} --lambda {l}"))
                .collect();
            return Err(Failure::Usage(format!(
                "results hold {} cells; select one of:\n  {}",
                cells.len(),
                list.join("\n  ")
            )));
        }
    };
    let rows = evaluate_bound(&selected, &stats, &a.eta_grid.0)?;
    let first = selected[0];
    let out_meta = Meta::new()
        .with("command", "report")
        .with("sigma", sigma)
        .with("M", m)
        .with("lambda", lambda)
        .with("trials", selected.len())
        .with("K", first.k)
        .with("L", json!(first.l))
        .with("kappa", json!(first.kappa))
        .with(
            "graph_stats",
            serde_json::to_value(stats).map_err(Error::from)?,
        )
        .with("hypotheses_hold", rows.iter().any(|r| r.bound.is_some()))
        .with("note", CLUSTER_SIZE_NOTE);
    write_atomic(&a.out, &experiments::bound_table_to_csv(&rows)?)?;
    write_json(&with_suffix(&a.out, ".meta.json"), &out_meta)?;
    Ok(0)
}
