//! Empirical graph and the matrices and semi-norms built on it.
//!
//! Nodes are dense ids `0..N`. Edges are undirected, carry a strictly
//! positive weight and are stored in input order; that order is the row
//! order of the incidence matrix.

mod partition;
mod spectral;

use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use partition::{Partition, Subgraph};
pub use spectral::{incidence_pseudoinverse, spectral_gap, PseudoInverse};

/// A graph signal: one real value per node.
pub type GraphSignal = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

impl Edge {
    pub fn sqrt_weight(&self) -> f64 {
        self.weight.sqrt()
    }

    pub fn other(&self, node: usize) -> usize {
        if node == self.i {
            self.j
        } else {
            self.i
        }
    }
}

/// Simple, connected, weighted undirected graph.
#[derive(Debug, Clone)]
pub struct EmpiricalGraph {
    node_count: usize,
    edges: Vec<Edge>,
    /// Per node: `(neighbour, edge id)`.
    adjacency: Vec<Vec<(usize, usize)>>,
    edge_index: HashMap<(usize, usize), usize>,
}

impl EmpiricalGraph {
    /// Validates and builds a graph from `(i, j, w)` triples.
    pub fn new(node_count: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if node_count >= 2 && edges.is_empty() {
            return Err(Error::EmptyEdgeList);
        }
        Self::build(node_count, edges)
    }

    /// Same checks as [`EmpiricalGraph::new`] but admits the edgeless
    /// single-node graph, which shows up as an induced cluster subgraph.
    pub(crate) fn build(node_count: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut stored = Vec::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); node_count];
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (e, &(i, j, weight)) in edges.iter().enumerate() {
            for node in [i, j] {
                if node >= node_count {
                    return Err(Error::NodeOutOfRange {
                        edge: e,
                        node,
                        node_count,
                    });
                }
            }
            if i == j {
                return Err(Error::SelfLoop { edge: e, node: i });
            }
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(Error::NonPositiveWeight { edge: e, weight });
            }
            let key = (i.min(j), i.max(j));
            if let Some(&first) = edge_index.get(&key) {
                return Err(Error::DuplicateEdge {
                    edge: e,
                    first,
                    i: key.0,
                    j: key.1,
                });
            }
            edge_index.insert(key, e);
            adjacency[i].push((j, e));
            adjacency[j].push((i, e));
            stored.push(Edge { i, j, weight });
        }
        let graph = Self {
            node_count,
            edges: stored,
            adjacency,
            edge_index,
        };
        if let Some(unreachable) = graph.first_unreachable() {
            return Err(Error::Disconnected { unreachable });
        }
        Ok(graph)
    }

    fn first_unreachable(&self) -> Option<usize> {
        let seen = bfs_reach(self.node_count, 0, |u| {
            self.adjacency[u].iter().map(|&(v, _)| v)
        });
        seen.iter().position(|&s| !s)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// `(neighbour, edge id)` pairs of `node`.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn edge_id(&self, i: usize, j: usize) -> Option<usize> {
        self.edge_index.get(&(i.min(j), i.max(j))).copied()
    }

    /// `‖W‖_∞`, the largest edge weight (0 for an edgeless graph).
    pub fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).fold(0.0, f64::max)
    }

    pub(crate) fn check_signal(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.node_count {
            return Err(Error::LengthMismatch {
                expected: self.node_count,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_nodes(&self, nodes: &[usize]) -> Result<()> {
        for &node in nodes {
            if node >= self.node_count {
                return Err(Error::InvalidNode {
                    node,
                    node_count: self.node_count,
                });
            }
        }
        Ok(())
    }

    /// Weighted total variation `Σ_{i,j} √W_ij |x_j − x_i|`.
    pub fn tv_norm(&self, x: &[f64]) -> Result<f64> {
        self.check_signal(x)?;
        Ok(self
            .edges
            .iter()
            .map(|e| e.sqrt_weight() * (x[e.j] - x[e.i]).abs())
            .sum())
    }

    /// Total variation restricted to the edge ids in `subset`.
    pub fn tv_norm_subset(&self, x: &[f64], subset: &[usize]) -> Result<f64> {
        self.check_signal(x)?;
        let mut total = 0.0;
        for &e in subset {
            let edge = self.edges.get(e).ok_or(Error::EdgeNotInGraph {
                edge: e,
                edge_count: self.edges.len(),
            })?;
            total += edge.sqrt_weight() * (x[edge.j] - x[edge.i]).abs();
        }
        Ok(total)
    }

    /// Canonical orientation: the smaller node id is the head.
    pub fn canonical_orientation(&self) -> Orientation {
        Orientation {
            heads: self.edges.iter().map(|e| e.i.min(e.j)).collect(),
            tails: self.edges.iter().map(|e| e.i.max(e.j)).collect(),
        }
    }

    /// Incidence matrix `D` with `+√W_e` at the head and `−√W_e` at the tail.
    pub fn incidence_matrix(&self, orientation: &Orientation) -> IncidenceMatrix {
        assert_eq!(
            orientation.heads.len(),
            self.edges.len(),
            "orientation does not belong to this graph"
        );
        let rows = self
            .edges
            .iter()
            .zip(orientation.heads.iter().zip(&orientation.tails))
            .map(|(edge, (&head, &tail))| IncidenceRow {
                head,
                tail,
                sqrt_weight: edge.sqrt_weight(),
            })
            .collect();
        IncidenceMatrix {
            node_count: self.node_count,
            rows,
        }
    }

    /// Graph Laplacian `L = Λ − W`.
    pub fn laplacian(&self) -> LaplacianMatrix {
        let mut degrees = vec![0.0; self.node_count];
        for e in &self.edges {
            degrees[e.i] += e.weight;
            degrees[e.j] += e.weight;
        }
        LaplacianMatrix {
            degrees,
            edges: self.edges.iter().map(|e| (e.i, e.j, e.weight)).collect(),
        }
    }
}

/// `‖x‖_M = sqrt((1/|M|) Σ_{i∈M} x_i²)`.
pub fn node_norm(x: &[f64], nodes: &[usize]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::EmptySet);
    }
    for &i in nodes {
        if i >= x.len() {
            return Err(Error::InvalidNode {
                node: i,
                node_count: x.len(),
            });
        }
    }
    let sum_sq: f64 = nodes.iter().map(|&i| x[i] * x[i]).sum();
    Ok((sum_sq / nodes.len() as f64).sqrt())
}

pub(crate) fn bfs_reach<F, I>(node_count: usize, start: usize, mut neighbours: F) -> Vec<bool>
where
    F: FnMut(usize) -> I,
    I: IntoIterator<Item = usize>,
{
    let mut seen = vec![false; node_count];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        for v in neighbours(u) {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Head/tail assignment per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    heads: Vec<usize>,
    tails: Vec<usize>,
}

impl Orientation {
    pub fn head(&self, e: usize) -> usize {
        self.heads[e]
    }

    pub fn tail(&self, e: usize) -> usize {
        self.tails[e]
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    /// Swaps head and tail of edge `e`.
    pub fn flip(&mut self, e: usize) {
        std::mem::swap(&mut self.heads[e], &mut self.tails[e]);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidenceRow {
    pub head: usize,
    pub tail: usize,
    pub sqrt_weight: f64,
}

/// Sparse `|E| × N` incidence matrix; each row holds exactly two nonzeros.
#[derive(Debug, Clone)]
pub struct IncidenceMatrix {
    node_count: usize,
    rows: Vec<IncidenceRow>,
}

impl IncidenceMatrix {
    pub fn rows(&self) -> &[IncidenceRow] {
        &self.rows
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.rows.len()
    }

    /// `D x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows.len()];
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, r) in out.iter_mut().zip(&self.rows) {
            *o = r.sqrt_weight * (x[r.head] - x[r.tail]);
        }
    }

    /// `Dᵀ y`.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.node_count];
        self.apply_transpose_into(y, &mut out);
        out
    }

    pub fn apply_transpose_into(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (r, &ye) in self.rows.iter().zip(y) {
            out[r.head] += r.sqrt_weight * ye;
            out[r.tail] -= r.sqrt_weight * ye;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.rows.len(), self.node_count);
        for (e, r) in self.rows.iter().enumerate() {
            d[(e, r.head)] = r.sqrt_weight;
            d[(e, r.tail)] = -r.sqrt_weight;
        }
        d
    }

    /// Largest absolute entry, `√(max_e W_e)`.
    pub fn sup_norm(&self) -> f64 {
        self.rows.iter().map(|r| r.sqrt_weight).fold(0.0, f64::max)
    }
}

/// Sparse Laplacian `L = Λ − W`.
#[derive(Debug, Clone)]
pub struct LaplacianMatrix {
    degrees: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
}

impl LaplacianMatrix {
    /// Weighted degrees `d_i = Σ_j W_ij`.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.degrees.iter().zip(x).map(|(d, v)| d * v).collect();
        for &(i, j, w) in &self.edges {
            out[i] -= w * x[j];
            out[j] -= w * x[i];
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.degrees.len();
        let mut l = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.degrees));
        for &(i, j, w) in &self.edges {
            l[(i, j)] -= w;
            l[(j, i)] -= w;
        }
        debug_assert_eq!(l.nrows(), n);
        l
    }
}
