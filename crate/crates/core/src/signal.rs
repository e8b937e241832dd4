//! Clustered ground truth, noisy labels and training-set sampling.
//!
//! # Randomness
//!
//! Every random draw comes from ChaCha20 ([`rand_chacha::ChaCha20Rng`])
//! seeded with an explicit 64-bit seed. Label noise uses one ChaCha stream
//! per node (`set_stream(node)`), so the noise on node `i` depends only on
//! `(seed, i)` and never on which other nodes are labelled or in what order.
//! Gaussian variates are produced by the ziggurat sampler of
//! `rand_distr::StandardNormal`, scaled by `σ`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EmpiricalGraph, GraphSignal, Partition};

/// Piecewise-constant signal: value `a_C` on every node of cluster `C`.
#[derive(Debug, Clone)]
pub struct ClusteredSignal {
    pub partition: Partition,
    pub values: Vec<f64>,
}

impl ClusteredSignal {
    pub fn new(partition: Partition, values: Vec<f64>) -> Result<Self> {
        if values.len() != partition.len() {
            return Err(Error::param(
                "values",
                format!(
                    "{} cluster values for {} clusters",
                    values.len(),
                    partition.len()
                ),
            ));
        }
        Ok(Self { partition, values })
    }

    /// `x_i = Σ_C a_C 𝟙_C[i]`.
    pub fn expand(&self) -> GraphSignal {
        let n: usize = self.partition.clusters().iter().map(Vec::len).sum();
        let mut x = vec![0.0; n];
        for (cluster, &a) in self.partition.clusters().iter().zip(&self.values) {
            for &i in cluster {
                x[i] = a;
            }
        }
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::param(
                "sigma",
                format!("must be finite and >= 0, got {sigma}"),
            ));
        }
        Ok(Self { sigma, seed })
    }

    /// Standard-normal draw for `node`, from its own stream.
    pub fn standard_draw(&self, node: usize) -> f64 {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(node as u64);
        rng.sample(StandardNormal)
    }
}

/// Labels `y_i` on a training set `M`, sorted by node id.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSet {
    nodes: Vec<usize>,
    values: Vec<f64>,
}

impl LabelSet {
    pub fn new(labels: BTreeMap<usize, f64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let (nodes, values) = labels.into_iter().unzip();
        Ok(Self { nodes, values })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        Self::new(pairs.into_iter().collect())
    }

    /// The training set `M`.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes.iter().copied().zip(self.values.iter().copied())
    }

    pub fn check_against(&self, graph: &EmpiricalGraph) -> Result<()> {
        graph.check_nodes(&self.nodes)
    }
}

/// `y_i = x̄_i + ε_i` for `i ∈ M`, `ε_i ~ N(0, σ²)` i.i.d.
pub fn sample_labels(
    truth: &[f64],
    training_set: &[usize],
    noise: &NoiseModel,
) -> Result<LabelSet> {
    if training_set.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut labels = BTreeMap::new();
    for &i in training_set {
        if i >= truth.len() {
            return Err(Error::InvalidNode {
                node: i,
                node_count: truth.len(),
            });
        }
        let y = if noise.sigma == 0.0 {
            truth[i]
        } else {
            truth[i] + noise.sigma * noise.standard_draw(i)
        };
        labels.insert(i, y);
    }
    LabelSet::new(labels)
}

/// Uniform sample of `size` distinct nodes, returned sorted.
///
/// The nodes are a prefix of one seeded shuffle, so for a fixed seed the
/// sets are nested: the sample of size `m` contains the sample of size `m' < m`.
pub fn sample_training_set(graph: &EmpiricalGraph, size: usize, seed: u64) -> Result<Vec<usize>> {
    let n = graph.node_count();
    if size == 0 || size > n {
        return Err(Error::SizeOutOfRange {
            size,
            node_count: n,
        });
    }
    let mut nodes: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    nodes.shuffle(&mut rng);
    nodes.truncate(size);
    nodes.sort_unstable();
    Ok(nodes)
}

/// Tail bound for a weighted Gaussian mean `y = (1/N) Σ w_i y_i`:
/// `P{|y − E y| ≥ η} ≤ 2 exp(−N²η² / (2σ² Σ w_i²))`, clipped to 1.
pub fn gaussian_tail_bound(eta: f64, sigma: f64, weights: &[f64], n: usize) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::param("eta", format!("must be positive, got {eta}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::param(
            "sigma",
            format!("must be positive, got {sigma}"),
        ));
    }
    if weights.is_empty() {
        return Err(Error::param("weights", "must be nonempty"));
    }
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    let n = n as f64;
    let bound = 2.0 * (-(n * n * eta * eta) / (2.0 * sigma * sigma * sum_sq)).exp();
    Ok(bound.min(1.0))
}

/// Mixes a base seed with a path of integers (SplitMix64 finaliser).
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    path.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}
