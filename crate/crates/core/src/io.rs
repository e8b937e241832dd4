//! JSON artifact formats and atomic file output.
//!
//! Every file written by the tool carries a `meta` block with the tool
//! name, its version and the parameters that produced it. Readers ignore
//! `meta`, so hand-written inputs may omit it.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::flow::{CertificateStatus, NccReport, ResolvingCertificate, Witness};
use crate::graph::{EmpiricalGraph, Partition};
use crate::signal::LabelSet;
use crate::solver::{SolveStatus, SolverResult};

pub const TOOL_NAME: &str = "nlasso";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    #[serde(flatten)]
    pub params: BTreeMap<String, Value>,
}

impl Meta {
    pub fn new() -> Self {
        Self {
            tool: TOOL_NAME.to_string(),
            version: VERSION.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

impl Default for Meta {
    fn default() -> Self {
        Self::new()
    }
}

/// `{"nodes": N, "edges": [[i, j, w], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: usize,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl GraphFile {
    pub fn from_graph(graph: &EmpiricalGraph, meta: Meta) -> Self {
        Self {
            nodes: graph.node_count(),
            edges: graph.edges().iter().map(|e| (e.i, e.j, e.weight)).collect(),
            meta: Some(meta),
        }
    }

    pub fn to_graph(&self) -> Result<EmpiricalGraph> {
        EmpiricalGraph::new(self.nodes, &self.edges)
    }
}

/// `{"clusters": [[ids...], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub clusters: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl PartitionFile {
    pub fn to_partition(&self, graph: &EmpiricalGraph) -> Result<Partition> {
        Partition::new(graph, self.clusters.clone())
    }
}

/// `{"training_set": [ids...], "labels": {"id": y, ...}, "sigma": s, "seed": n}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelFile {
    pub training_set: Vec<usize>,
    pub labels: BTreeMap<usize, f64>,
    pub sigma: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl LabelFile {
    pub fn from_labels(labels: &LabelSet, sigma: f64, seed: u64, meta: Meta) -> Self {
        Self {
            training_set: labels.nodes().to_vec(),
            labels: labels.iter().collect(),
            sigma,
            seed,
            meta: Some(meta),
        }
    }

    /// Labels must be defined exactly on the training set.
    pub fn to_labels(&self) -> Result<LabelSet> {
        let mut set = self.training_set.clone();
        set.sort_unstable();
        set.dedup();
        let keys: Vec<usize> = self.labels.keys().copied().collect();
        if set != keys {
            return Err(Error::Format {
                path: "labels".into(),
                reason: "label keys must coincide with training_set".into(),
            });
        }
        LabelSet::new(self.labels.clone())
    }
}

/// `{"training_set": [ids...]}`. A label file is also a valid training-set file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSetFile {
    pub training_set: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl TrainingSetFile {
    /// Sorted, deduplicated and checked against the graph.
    pub fn to_nodes(&self, graph: &EmpiricalGraph) -> Result<Vec<usize>> {
        let mut set = self.training_set.clone();
        set.sort_unstable();
        set.dedup();
        if set.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        graph.check_nodes(&set)?;
        Ok(set)
    }
}

/// Ground-truth or estimated signal: `{"x": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalFile {
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

/// `{"x": [..], "iters": k, "objective": v, "trace": [[k, obj], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub x: Vec<f64>,
    pub iters: usize,
    pub objective: f64,
    pub trace: Vec<(usize, f64)>,
    pub status: SolveStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl ResultFile {
    pub fn from_result(r: &SolverResult, meta: Meta) -> Self {
        Self {
            x: r.x_out.clone(),
            iters: r.iters_run,
            objective: r.final_objective,
            trace: r.objective_trace.clone(),
            status: r.status,
            meta: Some(meta),
        }
    }
}

/// `{"K":..., "L":..., "status":..., "patterns_checked":..., "witness":...|null, "kappa":...}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub status: CertificateStatus,
    pub patterns_checked: u64,
    pub witness: Option<Witness>,
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ncc: Option<NccReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl CertificateFile {
    pub fn from_certificate(c: &ResolvingCertificate, ncc: Option<NccReport>, meta: Meta) -> Self {
        Self {
            k: c.k,
            l: c.l,
            status: c.status,
            patterns_checked: c.patterns_checked,
            witness: c.witness.clone(),
            kappa: c.kappa,
            ncc,
            meta: Some(meta),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Format {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, &to_json_bytes(value)?)
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Format {
            path: path.display().to_string(),
            reason: "not a file path".into(),
        })?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}
