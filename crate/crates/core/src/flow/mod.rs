//! Training-set certificates from flows with demands.
//!
//! A training set `M` resolves a partition with constants `(K, L)` when,
//! for every sign pattern `b` on the boundary edges, some flow `h` exists
//! with `h(e⁺, e⁻) = b_e L √W_e` on each boundary edge, `|h| ≤ √W` on
//! intra-cluster edges, and node demands (net outflow) bounded by `K/|M|`
//! on `M` and zero elsewhere.
//!
//! Boundary flows are fixed by `(b, L)`, so the question splits into one
//! independent feasibility problem per cluster over the signs of that
//! cluster's own boundary edges. Each (cluster, pattern) pair is a bounded
//! circulation solved by max flow.
//!
//! For clusters with many boundary edges, enumerating patterns is replaced
//! by an exact single max-flow test. By Hoffman's circulation theorem a
//! pattern is feasible iff every node subset `A` of the cluster satisfies
//! `|Σ_{u∈A} r_u| ≤ cut(A) + (K/|M|)·|M ∩ A|`, where `r_u` is the fixed
//! boundary outflow at `u`. The worst pattern for a given `A` points every
//! boundary edge at `A` outward, so all patterns are feasible iff
//! `min_A cut(A) + Σ_{u∈A} ((K/|M|)·m_u − L β_u) ≥ 0`, with `β_u` the
//! boundary `√W` incident to `u`. That is a node-weighted minimum cut.

mod maxflow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EmpiricalGraph, Partition};

pub use maxflow::{circulation_feasible, BoundedArc, FlowNetwork};

/// Relative tolerance on saturation of the required supply.
pub const SATURATION_TOL: f64 = 1e-9;

/// Clusters with at most this many boundary edges are enumerated pattern by pattern.
pub const EXHAUSTIVE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LargeClusterPolicy {
    /// Exact all-pattern test by one minimum cut.
    MinCut,
    /// Uniformly random patterns; a pass yields [`CertificateStatus::SampledOnly`].
    Sample { patterns: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertifyOptions {
    pub exhaustive_limit: usize,
    pub large_clusters: LargeClusterPolicy,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            exhaustive_limit: EXHAUSTIVE_LIMIT,
            large_clusters: LargeClusterPolicy::MinCut,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateStatus {
    Certified,
    Refuted,
    SampledOnly,
}

/// Boundary edge signs `b_e ∈ {−1, +1}`, keyed by global edge id.
/// `b_e = +1` means flow from the edge's head to its tail under the
/// canonical orientation (smaller id is the head).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPattern {
    pub signs: Vec<(usize, i8)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub cluster: usize,
    /// `[i, j, b]` per boundary edge of the cluster, `i < j`.
    pub edges: Vec<(usize, usize, i8)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvingCertificate {
    pub k: f64,
    pub l: f64,
    pub status: CertificateStatus,
    /// (cluster, pattern) pairs shown feasible or infeasible; clusters
    /// settled by the min-cut test contribute all `2^b` of their patterns.
    pub patterns_checked: u64,
    pub witness: Option<Witness>,
    pub kappa: Option<f64>,
}

impl ResolvingCertificate {
    pub fn is_certified(&self) -> bool {
        self.status == CertificateStatus::Certified
    }
}

#[derive(Debug, Clone)]
struct BoundaryArc {
    local: usize,
    edge: usize,
    /// +1 when the cluster endpoint is the head of the edge.
    orient: f64,
    sqrt_weight: f64,
}

/// Flow problem on one cluster: intra edges are free (capacity `√W`),
/// boundary edges carry fixed flow, sampled nodes may source or sink up
/// to `K/|M|`.
#[derive(Debug, Clone)]
pub struct ClusterFlow {
    pub cluster: usize,
    nodes: Vec<usize>,
    intra: Vec<(usize, usize, f64)>,
    boundary: Vec<BoundaryArc>,
    sampled: Vec<bool>,
}

impl ClusterFlow {
    pub fn build(
        graph: &EmpiricalGraph,
        partition: &Partition,
        training_set: &[usize],
        cluster: usize,
    ) -> Self {
        let nodes = partition.clusters()[cluster].clone();
        let mut local = vec![usize::MAX; graph.node_count()];
        for (k, &v) in nodes.iter().enumerate() {
            local[v] = k;
        }
        let mut intra = Vec::new();
        let mut boundary = Vec::new();
        for (e, edge) in graph.edges().iter().enumerate() {
            let (ci, cj) = (partition.cluster_of(edge.i), partition.cluster_of(edge.j));
            let head = edge.i.min(edge.j);
            if ci == cluster && cj == cluster {
                intra.push((local[edge.i], local[edge.j], edge.sqrt_weight()));
            } else if ci == cluster || cj == cluster {
                let inside = if ci == cluster { edge.i } else { edge.j };
                boundary.push(BoundaryArc {
                    local: local[inside],
                    edge: e,
                    orient: if inside == head { 1.0 } else { -1.0 },
                    sqrt_weight: edge.sqrt_weight(),
                });
            }
        }
        let mut sampled = vec![false; nodes.len()];
        for &i in training_set {
            if local[i] != usize::MAX {
                sampled[local[i]] = true;
            }
        }
        Self {
            cluster,
            nodes,
            intra,
            boundary,
            sampled,
        }
    }

    pub fn boundary_len(&self) -> usize {
        self.boundary.len()
    }

    /// Global ids of this cluster's boundary edges, in pattern bit order.
    pub fn boundary_edges(&self) -> Vec<usize> {
        self.boundary.iter().map(|b| b.edge).collect()
    }

    pub fn has_sampled_node(&self) -> bool {
        self.sampled.iter().any(|&s| s)
    }

    /// Signs for pattern index `bits`: bit `t` set means `b = −1` on the
    /// `t`-th boundary edge.
    pub fn signs_from_bits(&self, bits: u64) -> Vec<f64> {
        (0..self.boundary.len())
            .map(|t| if bits >> t & 1 == 1 { -1.0 } else { 1.0 })
            .collect()
    }

    fn boundary_outflow(&self, signs: &[f64], l: f64) -> Vec<f64> {
        let mut r = vec![0.0; self.nodes.len()];
        for (b, &s) in self.boundary.iter().zip(signs) {
            r[b.local] += b.orient * s * l * b.sqrt_weight;
        }
        r
    }

    /// Feasibility of one sign pattern (`signs[t]` for the `t`-th boundary edge).
    pub fn pattern_feasible(&self, signs: &[f64], demand_cap: f64, l: f64) -> bool {
        let n = self.nodes.len();
        let (s, t) = (n, n + 1);
        let mut arcs = Vec::with_capacity(2 * self.intra.len() + 2 * n + 1);
        for &(u, v, c) in &self.intra {
            arcs.push(BoundedArc {
                from: u,
                to: v,
                lower: 0.0,
                upper: c,
            });
            arcs.push(BoundedArc {
                from: v,
                to: u,
                lower: 0.0,
                upper: c,
            });
        }
        for (u, r) in self.boundary_outflow(signs, l).into_iter().enumerate() {
            if r > 0.0 {
                arcs.push(BoundedArc {
                    from: u,
                    to: t,
                    lower: r,
                    upper: r,
                });
            } else if r < 0.0 {
                arcs.push(BoundedArc {
                    from: s,
                    to: u,
                    lower: -r,
                    upper: -r,
                });
            }
        }
        for (u, &m) in self.sampled.iter().enumerate() {
            if m {
                arcs.push(BoundedArc {
                    from: s,
                    to: u,
                    lower: 0.0,
                    upper: demand_cap,
                });
                arcs.push(BoundedArc {
                    from: u,
                    to: t,
                    lower: 0.0,
                    upper: demand_cap,
                });
            }
        }
        arcs.push(BoundedArc {
            from: t,
            to: s,
            lower: 0.0,
            upper: f64::INFINITY,
        });
        circulation_feasible(n + 2, &arcs, SATURATION_TOL)
    }

    /// Exact test over all `2^b` patterns at once. On failure returns a
    /// refuting pattern read off the minimum cut.
    pub fn all_patterns_feasible(
        &self,
        demand_cap: f64,
        l: f64,
    ) -> std::result::Result<(), Vec<f64>> {
        let n = self.nodes.len();
        let (s, t) = (n, n + 1);
        let mut net = FlowNetwork::new(n + 2);
        let mut beta = vec![0.0; n];
        for b in &self.boundary {
            beta[b.local] += b.sqrt_weight;
        }
        let mut total_cap = 0.0;
        for &(u, v, c) in &self.intra {
            net.add_arc(u, v, c);
            net.add_arc(v, u, c);
            total_cap += 2.0 * c;
        }
        let mut required = 0.0;
        for u in 0..n {
            let supply = if self.sampled[u] { demand_cap } else { 0.0 };
            let weight = supply - l * beta[u];
            if weight > 0.0 {
                net.add_arc(u, t, weight);
                total_cap += weight;
            } else if weight < 0.0 {
                net.add_arc(s, u, -weight);
                required += -weight;
                total_cap += -weight;
            }
        }
        let eps = 1e-14 * (1.0 + total_cap);
        let flow = net.max_flow(s, t, eps);
        if flow >= required - SATURATION_TOL * required.max(1.0) {
            return Ok(());
        }
        let side = net.source_side(s, eps);
        // boundary edges at the violating set point out of the cluster
        Err(self
            .boundary
            .iter()
            .map(|b| if side[b.local] { b.orient } else { 1.0 })
            .collect())
    }

    fn witness(&self, signs: &[f64], graph: &EmpiricalGraph) -> Witness {
        Witness {
            cluster: self.cluster,
            edges: self
                .boundary
                .iter()
                .zip(signs)
                .map(|(b, &s)| {
                    let e = graph.edge(b.edge);
                    (e.i.min(e.j), e.i.max(e.j), if s > 0.0 { 1 } else { -1 })
                })
                .collect(),
        }
    }
}

struct ClusterVerdict {
    feasible: bool,
    exhaustive: bool,
    checked: u64,
    witness: Option<Vec<f64>>,
}

fn check_cluster(
    cf: &ClusterFlow,
    demand_cap: f64,
    l: f64,
    opts: &CertifyOptions,
) -> ClusterVerdict {
    let b = cf.boundary_len();
    if b == 0 {
        return ClusterVerdict {
            feasible: true,
            exhaustive: true,
            checked: 0,
            witness: None,
        };
    }
    if b <= opts.exhaustive_limit {
        let mut checked = 0;
        for bits in 0..(1u64 << b) {
            let signs = cf.signs_from_bits(bits);
            checked += 1;
            if !cf.pattern_feasible(&signs, demand_cap, l) {
                return ClusterVerdict {
                    feasible: false,
                    exhaustive: true,
                    checked,
                    witness: Some(signs),
                };
            }
        }
        return ClusterVerdict {
            feasible: true,
            exhaustive: true,
            checked,
            witness: None,
        };
    }
    match opts.large_clusters {
        LargeClusterPolicy::MinCut => {
            let all = 1u64.checked_shl(b as u32).unwrap_or(u64::MAX);
            match cf.all_patterns_feasible(demand_cap, l) {
                Ok(()) => ClusterVerdict {
                    feasible: true,
                    exhaustive: true,
                    checked: all,
                    witness: None,
                },
                Err(signs) => ClusterVerdict {
                    feasible: false,
                    exhaustive: true,
                    checked: 1,
                    witness: Some(signs),
                },
            }
        }
        LargeClusterPolicy::Sample { patterns, seed } => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(cf.cluster as u64);
            let mut checked = 0;
            for _ in 0..patterns {
                let signs: Vec<f64> = (0..b)
                    .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                    .collect();
                checked += 1;
                if !cf.pattern_feasible(&signs, demand_cap, l) {
                    return ClusterVerdict {
                        feasible: false,
                        exhaustive: false,
                        checked,
                        witness: Some(signs),
                    };
                }
            }
            ClusterVerdict {
                feasible: true,
                exhaustive: false,
                checked,
                witness: None,
            }
        }
    }
}

fn validate_inputs(graph: &EmpiricalGraph, training_set: &[usize], k: f64) -> Result<()> {
    if training_set.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    graph.check_nodes(training_set)?;
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::param("K", format!("must be positive, got {k}")));
    }
    Ok(())
}

/// Decides whether `training_set` resolves `partition` with constants `(K, L)`.
pub fn check_resolving(
    graph: &EmpiricalGraph,
    partition: &Partition,
    training_set: &[usize],
    k: f64,
    l: f64,
    opts: &CertifyOptions,
) -> Result<ResolvingCertificate> {
    validate_inputs(graph, training_set, k)?;
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::param("L", format!("must be positive, got {l}")));
    }
    let demand_cap = k / training_set.len() as f64;
    let flows: Vec<ClusterFlow> = (0..partition.len())
        .map(|c| ClusterFlow::build(graph, partition, training_set, c))
        .collect();
    let verdicts: Vec<ClusterVerdict> = flows
        .par_iter()
        .map(|cf| check_cluster(cf, demand_cap, l, opts))
        .collect();

    let patterns_checked = verdicts
        .iter()
        .fold(0u64, |acc, v| acc.saturating_add(v.checked));
    let refuted = verdicts.iter().position(|v| !v.feasible);
    let (status, witness) = match refuted {
        Some(c) => {
            let signs = verdicts[c]
                .witness
                .as_ref()
                .expect("refuted clusters carry a witness");
            (
                CertificateStatus::Refuted,
                Some(flows[c].witness(signs, graph)),
            )
        }
        None if verdicts.iter().all(|v| v.exhaustive) => (CertificateStatus::Certified, None),
        None => (CertificateStatus::SampledOnly, None),
    };
    Ok(ResolvingCertificate {
        k,
        l,
        status,
        patterns_checked,
        witness,
        kappa: condition_number(k, l).ok(),
    })
}

/// Largest `L` (to within `tol`) at which `check_resolving` does not refute.
///
/// Feasibility is monotone in `L`: the zero flow is feasible at `L = 0`
/// and each pattern's feasible set is convex. Returns `+∞` when the
/// partition has no boundary edges.
pub fn max_certifiable_l(
    graph: &EmpiricalGraph,
    partition: &Partition,
    training_set: &[usize],
    k: f64,
    tol: f64,
    opts: &CertifyOptions,
) -> Result<f64> {
    validate_inputs(graph, training_set, k)?;
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    if partition.boundary().is_empty() {
        return Ok(f64::INFINITY);
    }
    // a cluster with boundary flux but no sampled node cannot balance any L > 0
    for c in 0..partition.len() {
        let cf = ClusterFlow::build(graph, partition, training_set, c);
        if cf.boundary_len() > 0 && !cf.has_sampled_node() {
            return Err(Error::NoFeasibleL { k });
        }
    }
    let passes = |l: f64| -> Result<bool> {
        Ok(
            check_resolving(graph, partition, training_set, k, l, opts)?.status
                != CertificateStatus::Refuted,
        )
    };
    let mut hi = 1.0;
    let mut lo = 0.0;
    if passes(hi)? {
        loop {
            lo = hi;
            hi *= 2.0;
            if hi > 1e15 {
                return Ok(f64::INFINITY);
            }
            if !passes(hi)? {
                break;
            }
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo == 0.0 {
        return Err(Error::NoFeasibleL { k });
    }
    Ok(lo)
}

/// `κ = (K + 3)/(L − 3)`.
pub fn condition_number(k: f64, l: f64) -> Result<f64> {
    if !(l > 3.0) {
        return Err(Error::LTooSmall { l });
    }
    Ok((k + 3.0) / (l - 3.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NccReport {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub samples_tested: usize,
    pub violated: bool,
    /// Minimum over samples of `K‖z‖_M + ‖z‖_{∂F̄} − L‖z‖_∂F`.
    pub worst_margin: f64,
    pub note: String,
}

pub const NCC_NOTE: &str =
    "sampled falsification only: no violation is evidence, not proof; certificates come from the flow check";

/// Relative slack for rounding when comparing the two sides.
const NCC_SLACK: f64 = 1e-12;

/// Evaluates `L‖z‖_∂F ≤ K‖z‖_M + ‖z‖_{∂F̄}` on sampled signals.
///
/// Samples rotate through four families: i.i.d. Gaussian signals, cluster
/// indicators, cluster indicators with small Gaussian perturbation, and
/// random piecewise-constant signals.
pub fn ncc_sampled_check(
    graph: &EmpiricalGraph,
    partition: &Partition,
    training_set: &[usize],
    k: f64,
    l: f64,
    n_samples: usize,
    seed: u64,
) -> Result<NccReport> {
    if n_samples == 0 {
        return Err(Error::param("n_samples", "must be at least 1"));
    }
    if training_set.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    graph.check_nodes(training_set)?;
    let n = graph.node_count();
    let clusters = partition.clusters();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut z = vec![0.0; n];
    let mut worst = f64::INFINITY;
    let mut violated = false;
    for s in 0..n_samples {
        match s % 4 {
            0 => z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal)),
            1 | 2 => {
                let c = (s / 4) % clusters.len();
                z.iter_mut().for_each(|v| *v = 0.0);
                for &i in &clusters[c] {
                    z[i] = 1.0;
                }
                if s % 4 == 2 {
                    for v in z.iter_mut() {
                        *v += 0.1 * rng.sample::<f64, _>(StandardNormal);
                    }
                }
            }
            _ => {
                for cluster in clusters {
                    let a: f64 = rng.sample(StandardNormal);
                    for &i in cluster {
                        z[i] = a;
                    }
                }
            }
        }
        let lhs = l * graph.tv_norm_subset(&z, partition.boundary())?;
        let rhs = k * crate::graph::node_norm(&z, training_set)?
            + graph.tv_norm_subset(&z, partition.interior())?;
        worst = worst.min(rhs - lhs);
        if lhs > rhs + NCC_SLACK * (lhs.abs() + rhs.abs()) {
            violated = true;
        }
    }
    Ok(NccReport {
        k,
        l,
        samples_tested: n_samples,
        violated,
        worst_margin: worst,
        note: NCC_NOTE.to_string(),
    })
}
