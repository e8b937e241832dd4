use super::{bfs_reach, spectral_gap, EmpiricalGraph};
use crate::error::{Error, Result};

/// Disjoint clusters covering every node, each inducing a connected subgraph.
#[derive(Debug, Clone)]
pub struct Partition {
    clusters: Vec<Vec<usize>>,
    assignment: Vec<usize>,
    boundary: Vec<usize>,
    interior: Vec<usize>,
}

/// Subgraph induced by one cluster, with the map back to global node ids.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub graph: EmpiricalGraph,
    /// `nodes[local] = global`.
    pub nodes: Vec<usize>,
    /// Global edge id of each local edge.
    pub edge_ids: Vec<usize>,
}

impl Partition {
    pub fn new(graph: &EmpiricalGraph, clusters: Vec<Vec<usize>>) -> Result<Self> {
        let n = graph.node_count();
        let mut assignment = vec![usize::MAX; n];
        for (l, cluster) in clusters.iter().enumerate() {
            if cluster.is_empty() {
                return Err(Error::InvalidPartition(format!("cluster {l} is empty")));
            }
            for &node in cluster {
                if node >= n {
                    return Err(Error::InvalidPartition(format!(
                        "cluster {l} contains node {node}, graph has {n} nodes"
                    )));
                }
                if assignment[node] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "node {node} appears in clusters {} and {l}",
                        assignment[node]
                    )));
                }
                assignment[node] = l;
            }
        }
        if let Some(node) = assignment.iter().position(|&a| a == usize::MAX) {
            return Err(Error::InvalidPartition(format!(
                "node {node} is not covered"
            )));
        }

        let mut clusters = clusters;
        for c in &mut clusters {
            c.sort_unstable();
        }
        for (l, cluster) in clusters.iter().enumerate() {
            let local: std::collections::HashMap<usize, usize> =
                cluster.iter().enumerate().map(|(k, &v)| (v, k)).collect();
            let seen = bfs_reach(cluster.len(), 0, |u| {
                graph
                    .neighbors(cluster[u])
                    .iter()
                    .filter_map(|(v, _)| local.get(v).copied())
                    .collect::<Vec<_>>()
            });
            if seen.iter().any(|&s| !s) {
                return Err(Error::ClusterDisconnected { cluster: l });
            }
        }

        let (boundary, interior) = (0..graph.edge_count()).partition(|&e| {
            let edge = graph.edge(e);
            assignment[edge.i] != assignment[edge.j]
        });
        Ok(Self {
            clusters,
            assignment,
            boundary,
            interior,
        })
    }

    /// Single cluster holding every node.
    pub fn trivial(graph: &EmpiricalGraph) -> Self {
        Self::new(graph, vec![(0..graph.node_count()).collect()])
            .expect("whole connected graph is a valid cluster")
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn cluster_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    /// Edge ids of `∂F`, the edges joining different clusters.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Edge ids inside clusters (complement of `∂F`).
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn min_cluster_size(&self) -> usize {
        self.clusters.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn induced_subgraph(&self, graph: &EmpiricalGraph, l: usize) -> Result<Subgraph> {
        let nodes = self.clusters[l].clone();
        let mut local = vec![usize::MAX; graph.node_count()];
        for (k, &v) in nodes.iter().enumerate() {
            local[v] = k;
        }
        let mut edges = Vec::new();
        let mut edge_ids = Vec::new();
        for &e in &self.interior {
            let edge = graph.edge(e);
            if self.assignment[edge.i] == l {
                edges.push((local[edge.i], local[edge.j], edge.weight));
                edge_ids.push(e);
            }
        }
        let sub = EmpiricalGraph::build(nodes.len(), &edges).map_err(|err| match err {
            Error::Disconnected { .. } => Error::ClusterDisconnected { cluster: l },
            other => other,
        })?;
        Ok(Subgraph {
            graph: sub,
            nodes,
            edge_ids,
        })
    }

    /// `ρ(F)`: smallest spectral gap over the cluster-induced subgraphs.
    ///
    /// A single-node cluster has no second eigenvalue and counts as `+∞`.
    pub fn spectral_gap(&self, graph: &EmpiricalGraph) -> Result<f64> {
        let mut gap = f64::INFINITY;
        for l in 0..self.clusters.len() {
            let sub = self.induced_subgraph(graph, l)?;
            let rho = spectral_gap(&sub.graph).map_err(|err| match err {
                Error::Disconnected { .. } => Error::ClusterDisconnected { cluster: l },
                other => other,
            })?;
            gap = gap.min(rho);
        }
        Ok(gap)
    }
}
