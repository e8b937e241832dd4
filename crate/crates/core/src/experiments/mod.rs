//! Monte-Carlo harness for the TV estimation error.
//!
//! One experiment draws a single SBM graph, then for every cell
//! `(σ, M, λ)` runs `trials` rounds of sample → solve → measure.
//!
//! Seeds: the graph uses `derive_seed(seed, [0])`, the training sets are
//! prefixes of one shuffle seeded by `derive_seed(seed, [1])` (so they are
//! nested in `M`), and trial `t` draws its label noise from
//! `derive_seed(seed, [2, t])`. Cells sharing a trial index therefore share
//! noise, which keeps comparisons across `σ`, `M` and `λ` paired.

mod bounds;
mod sbm;
pub mod stats;
mod table;

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bounds::{
    check_hypotheses, corollary1_check, lemma2_check, theorem1_bound, theorem1_rhs,
    Corollary1Sides, GraphStats,
};
pub use sbm::{generate_sbm, SbmSpec, MAX_RETRIES};
pub use table::{
    bound_table_to_csv, emit_bound_table, emit_results, parse_results, results_to_csv, BoundRow,
    TrialRecord, BOUND_HEADER, RESULTS_HEADER,
};

use crate::error::{Error, Result};
use crate::flow::{condition_number, max_certifiable_l, CertifyOptions};
use crate::graph::{node_norm, EmpiricalGraph, Partition};
use crate::signal::{derive_seed, sample_labels, sample_training_set, ClusteredSignal, NoiseModel};
use crate::solver::{estimation_error_tv, solve, SolverConfig};

/// Reported alongside every bound evaluation.
pub const CLUSTER_SIZE_NOTE: &str =
    "the cluster size in the first exponent is instantiated as the smallest cluster size";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertifySettings {
    #[serde(rename = "K")]
    pub k: f64,
    /// Bisection tolerance on `L`.
    pub tol: f64,
}

impl Default for CertifySettings {
    fn default() -> Self {
        Self { k: 4.0, tol: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub max_iters: usize,
    pub rel_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            rel_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub graph: SbmSpec,
    /// Cluster values `a_C`, one per cluster.
    pub signal: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub training_sizes: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub certify: CertifySettings,
    #[serde(default)]
    pub solver: SolverSettings,
}

fn config_error(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.graph.validate()?;
        let n = self.graph.node_count();
        if self.signal.len() != self.graph.sizes.len() {
            return Err(config_error(
                "signal",
                format!(
                    "{} values for {} clusters",
                    self.signal.len(),
                    self.graph.sizes.len()
                ),
            ));
        }
        if self.signal.iter().any(|a| !a.is_finite()) {
            return Err(config_error("signal", "values must be finite"));
        }
        if self.sigmas.is_empty() {
            return Err(config_error("sigmas", "list is empty"));
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
            return Err(config_error(
                "sigmas",
                format!("noise levels must be finite and >= 0, got {s}"),
            ));
        }
        if self.training_sizes.is_empty() {
            return Err(config_error("training_sizes", "list is empty"));
        }
        if let Some(m) = self.training_sizes.iter().find(|&&m| m == 0 || m > n) {
            return Err(config_error(
                "training_sizes",
                format!("sizes must lie in 1..={n}, got {m}"),
            ));
        }
        if self.lambdas.is_empty() {
            return Err(config_error("lambdas", "list is empty"));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(config_error(
                "lambdas",
                format!("must be positive, got {l}"),
            ));
        }
        if self.trials == 0 {
            return Err(config_error("trials", "must be at least 1"));
        }
        if !(self.certify.k > 0.0) || !self.certify.k.is_finite() {
            return Err(config_error(
                "certify.K",
                format!("must be positive, got {}", self.certify.k),
            ));
        }
        if !(self.certify.tol > 0.0) {
            return Err(config_error(
                "certify.tol",
                format!("must be positive, got {}", self.certify.tol),
            ));
        }
        if self.solver.max_iters == 0 {
            return Err(config_error("solver.max_iters", "must be at least 1"));
        }
        if !(self.solver.rel_tol > 0.0) {
            return Err(config_error(
                "solver.rel_tol",
                format!("must be positive, got {}", self.solver.rel_tol),
            ));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.sigmas.len() * self.training_sizes.len() * self.lambdas.len()
    }
}

/// Certified constants for one training set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub graph: EmpiricalGraph,
    pub partition: Partition,
    pub stats: GraphStats,
    pub certifications: Vec<Certification>,
    /// Sorted by `(σ, M, λ, trial)` in config order.
    pub records: Vec<TrialRecord>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    cfg.validate()?;
    let (graph, partition) = generate_sbm(&cfg.graph, derive_seed(cfg.seed, &[0]))?;
    let stats = GraphStats::compute(&graph, &partition)?;
    let truth = ClusteredSignal::new(partition.clone(), cfg.signal.clone())?.expand();
    let all_nodes: Vec<usize> = (0..graph.node_count()).collect();
    let set_seed = derive_seed(cfg.seed, &[1]);

    let mut sizes = cfg.training_sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let certified: Vec<(usize, Vec<usize>, Certification)> = sizes
        .par_iter()
        .map(|&m| {
            let set = sample_training_set(&graph, m, set_seed)?;
            let l = match max_certifiable_l(
                &graph,
                &partition,
                &set,
                cfg.certify.k,
                cfg.certify.tol,
                &CertifyOptions::default(),
            ) {
                Ok(l) => Some(l),
                Err(Error::NoFeasibleL { .. }) => None,
                Err(e) => return Err(e),
            };
            let kappa = l.and_then(|l| condition_number(cfg.certify.k, l).ok());
            Ok((
                m,
                set,
                Certification {
                    m,
                    k: cfg.certify.k,
                    l,
                    kappa,
                },
            ))
        })
        .collect::<Result<_>>()?;
    let by_size: BTreeMap<usize, &(usize, Vec<usize>, Certification)> =
        certified.iter().map(|c| (c.0, c)).collect();

    let mut jobs = Vec::with_capacity(cfg.cell_count() * cfg.trials);
    for &sigma in &cfg.sigmas {
        for &m in &cfg.training_sizes {
            for &lambda in &cfg.lambdas {
                for trial in 0..cfg.trials {
                    jobs.push((sigma, m, lambda, trial));
                }
            }
        }
    }
    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(sigma, m, lambda, trial)| {
            let (_, set, cert) = by_size[&m];
            let noise = NoiseModel::new(sigma, derive_seed(cfg.seed, &[2, trial as u64]))?;
            let labels = sample_labels(&truth, set, &noise)?;
            let solver_cfg = SolverConfig {
                max_iters: cfg.solver.max_iters,
                rel_tol: cfg.solver.rel_tol,
                ..SolverConfig::new(lambda)
            };
            let result = solve(&graph, &labels, &solver_cfg)?;
            let diff: Vec<f64> = result
                .x_out
                .iter()
                .zip(&truth)
                .map(|(a, b)| a - b)
                .collect();
            Ok(TrialRecord {
                sigma,
                m,
                lambda,
                trial,
                tv_error: estimation_error_tv(&graph, &result.x_out, &truth)?,
                node_error: node_norm(&diff, &all_nodes)?,
                iters: result.iters_run,
                k: cert.k,
                l: cert.l,
                kappa: cert.kappa,
            })
        })
        .collect::<Result<_>>()?;

    Ok(ExperimentRun {
        graph,
        partition,
        stats,
        certifications: certified.into_iter().map(|c| c.2).collect(),
        records,
    })
}

/// `a, a + step, ...` up to and including `b` (within rounding).
pub fn eta_grid(a: f64, b: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::param(
            "step",
            format!("must be positive, got {step}"),
        ));
    }
    if !a.is_finite() || !b.is_finite() || a > b {
        return Err(Error::param(
            "eta grid",
            format!("need finite a <= b, got {a}:{b}"),
        ));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + i as f64 * step).collect())
}

/// Fraction of `errors` that are `≥ eta`.
pub fn tail_frequency(errors: &[f64], eta: f64) -> f64 {
    if errors.is_empty() {
        return 0.0;
    }
    errors.iter().filter(|&&e| e >= eta).count() as f64 / errors.len() as f64
}

/// Empirical tail frequencies of one cell's TV errors against the bound.
/// The bound column is `None` wherever `(K, L, σ, η)` violates its hypotheses.
pub fn evaluate_bound(
    records: &[TrialRecord],
    stats: &GraphStats,
    grid: &[f64],
) -> Result<Vec<BoundRow>> {
    let first = records.first().ok_or(Error::EmptyRecords)?;
    if records
        .iter()
        .any(|r| r.sigma != first.sigma || r.m != first.m || r.lambda != first.lambda)
    {
        return Err(Error::param(
            "records",
            "bound evaluation needs records from a single cell",
        ));
    }
    let errors: Vec<f64> = records.iter().map(|r| r.tv_error).collect();
    grid.iter()
        .map(|&eta| {
            let bound = match first.l {
                Some(l) => match theorem1_bound(stats, first.m, first.k, l, first.sigma, eta) {
                    Ok(b) => Some(b),
                    Err(Error::HypothesisViolated(_)) => None,
                    Err(e) => return Err(e),
                },
                None => None,
            };
            Ok(BoundRow {
                eta,
                empirical_freq: tail_frequency(&errors, eta),
                bound,
            })
        })
        .collect()
}

/// Distinct `(σ, M, λ)` cells in order of first appearance.
pub fn cells(records: &[TrialRecord]) -> Vec<(f64, usize, f64)> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for r in records {
        let key = (r.sigma, r.m, r.lambda);
        if !out.contains(&key) {
            out.push(key);
        }
    }
    out
}

/// Reads an experiment config from a TOML file.
pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    ExperimentConfig::from_toml(&text)
}
