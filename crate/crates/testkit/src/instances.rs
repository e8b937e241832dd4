//! Seeded random graphs, partitions and training sets.

use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn push_edge(
    edges: &mut Vec<(usize, usize, f64)>,
    seen: &mut HashSet<(usize, usize)>,
    i: usize,
    j: usize,
    w: f64,
) -> bool {
    let key = (i.min(j), i.max(j));
    if i == j || !seen.insert(key) {
        return false;
    }
    edges.push((key.0, key.1, w));
    true
}

/// Random spanning tree on `nodes` plus every other pair with probability `p_extra`.
fn connect(
    rng: &mut impl Rng,
    nodes: &[usize],
    p_extra: f64,
    weights: (f64, f64),
    edges: &mut Vec<(usize, usize, f64)>,
    seen: &mut HashSet<(usize, usize)>,
) {
    let mut order = nodes.to_vec();
    order.shuffle(rng);
    for k in 1..order.len() {
        let parent = order[rng.random_range(0..k)];
        let w = rng.random_range(weights.0..=weights.1);
        push_edge(edges, seen, order[k], parent, w);
    }
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            if rng.random::<f64>() < p_extra {
                let w = rng.random_range(weights.0..=weights.1);
                push_edge(edges, seen, nodes[a], nodes[b], w);
            }
        }
    }
}

/// Connected graph on `n` nodes, weights uniform in `weights`.
pub fn connected_graph(
    rng: &mut impl Rng,
    n: usize,
    p_extra: f64,
    weights: (f64, f64),
) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    let nodes: Vec<usize> = (0..n).collect();
    connect(rng, &nodes, p_extra, weights, &mut edges, &mut seen);
    edges
}

/// `k` clusters grown from random seeds; every cluster induces a connected subgraph.
pub fn connected_partition(
    rng: &mut impl Rng,
    n: usize,
    edges: &[(usize, usize, f64)],
    k: usize,
) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(i, j, _) in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut label = vec![usize::MAX; n];
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(rng);
    for (c, &s) in nodes.iter().take(k).enumerate() {
        label[s] = c;
    }
    loop {
        let frontier: Vec<(usize, usize)> = (0..n)
            .filter(|&v| label[v] == usize::MAX)
            .flat_map(|v| {
                adj[v]
                    .iter()
                    .filter(|&&u| label[u] != usize::MAX)
                    .map(move |&u| (v, u))
            })
            .collect();
        let Some(&(v, u)) = frontier.choose(rng) else {
            break;
        };
        label[v] = label[u];
    }
    let mut clusters = vec![Vec::new(); k.min(n)];
    for (v, &c) in label.iter().enumerate() {
        clusters[c].push(v);
    }
    clusters
}

/// Uniform random subset of `0..n` of the given size, sorted.
pub fn subset(rng: &mut impl Rng, n: usize, size: usize) -> Vec<usize> {
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(rng);
    nodes.truncate(size);
    nodes.sort_unstable();
    nodes
}

/// Clustered instance for flow checks.
#[derive(Debug, Clone)]
pub struct ClusteredInstance {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub clusters: Vec<Vec<usize>>,
}

/// Clusters of `1..=max_cluster` nodes joined by at most `max_boundary`
/// between-cluster edges (at least a spanning tree of clusters).
pub fn clustered_instance(
    rng: &mut impl Rng,
    num_clusters: usize,
    max_cluster: usize,
    max_boundary: usize,
    weights: (f64, f64),
) -> ClusteredInstance {
    assert!(num_clusters >= 1 && max_boundary + 1 >= num_clusters);
    let mut clusters = Vec::new();
    let mut n = 0;
    for _ in 0..num_clusters {
        let size = rng.random_range(1..=max_cluster);
        clusters.push((n..n + size).collect::<Vec<usize>>());
        n += size;
    }
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for c in &clusters {
        let p = rng.random_range(0.0..0.6);
        connect(rng, c, p, weights, &mut edges, &mut seen);
    }
    let mut boundary = 0;
    for c in 1..num_clusters {
        let other = rng.random_range(0..c);
        let i = *clusters[c].choose(rng).expect("cluster is nonempty");
        let j = *clusters[other].choose(rng).expect("cluster is nonempty");
        let w = rng.random_range(weights.0..=weights.1);
        push_edge(&mut edges, &mut seen, i, j, w);
        boundary += 1;
    }
    if num_clusters > 1 {
        let extra = rng.random_range(0..=max_boundary - boundary);
        for _ in 0..extra {
            let a = rng.random_range(0..num_clusters);
            let b = rng.random_range(0..num_clusters);
            if a == b {
                continue;
            }
            let i = *clusters[a].choose(rng).expect("cluster is nonempty");
            let j = *clusters[b].choose(rng).expect("cluster is nonempty");
            let w = rng.random_range(weights.0..=weights.1);
            push_edge(&mut edges, &mut seen, i, j, w);
        }
    }
    ClusteredInstance { n, edges, clusters }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn connected(edges: &[(usize, usize, f64)], nodes: &[usize]) -> bool {
        let inside: HashSet<usize> = nodes.iter().copied().collect();
        let mut seen = HashSet::from([nodes[0]]);
        let mut stack = vec![nodes[0]];
        while let Some(v) = stack.pop() {
            for &(i, j, _) in edges {
                for (a, b) in [(i, j), (j, i)] {
                    if a == v && inside.contains(&b) && seen.insert(b) {
                        stack.push(b);
                    }
                }
            }
        }
        seen.len() == nodes.len()
    }

    #[test]
    fn generated_structures_are_connected() {
        let mut r = rng(1);
        for _ in 0..50 {
            let n = r.random_range(1..20);
            let edges = connected_graph(&mut r, n, 0.2, (0.1, 2.0));
            let all: Vec<usize> = (0..n).collect();
            assert!(connected(&edges, &all));
            let k = r.random_range(1..=n);
            let parts = connected_partition(&mut r, n, &edges, k);
            assert_eq!(parts.iter().map(Vec::len).sum::<usize>(), n);
            assert!(parts.iter().all(|c| !c.is_empty() && connected(&edges, c)));

            let inst = clustered_instance(&mut r, 3, 5, 6, (0.5, 1.5));
            let all: Vec<usize> = (0..inst.n).collect();
            assert!(connected(&inst.edges, &all));
            assert!(inst.clusters.iter().all(|c| connected(&inst.edges, c)));
        }
    }
}
