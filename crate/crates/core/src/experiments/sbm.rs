use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EmpiricalGraph, Partition};
use crate::signal::derive_seed;

pub const MAX_RETRIES: usize = 100;

fn one() -> f64 {
    1.0
}

/// Stochastic block model with planted clusters `0..sizes[0]`,
/// `sizes[0]..sizes[0]+sizes[1]`, and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbmSpec {
    pub sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    #[serde(default = "one")]
    pub within_weight: f64,
    #[serde(default = "one")]
    pub between_weight: f64,
}

impl SbmSpec {
    pub fn validate(&self) -> Result<()> {
        let field = |f: &str, reason: String| Error::Config {
            field: format!("graph.{f}"),
            reason,
        };
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(field(
                "sizes",
                "need at least one cluster, all sizes >= 1".into(),
            ));
        }
        for (name, p) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(field(
                    name,
                    format!("probability must lie in [0, 1], got {p}"),
                ));
            }
        }
        for (name, w) in [
            ("within_weight", self.within_weight),
            ("between_weight", self.between_weight),
        ] {
            if !(w > 0.0) || !w.is_finite() {
                return Err(field(name, format!("must be positive, got {w}")));
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut start = 0;
        self.sizes
            .iter()
            .map(|&s| {
                let c = (start..start + s).collect();
                start += s;
                c
            })
            .collect()
    }
}

/// Draws an SBM graph whose whole graph and every planted cluster are
/// connected, redrawing up to [`MAX_RETRIES`] times. Attempt `a` uses
/// the seed `derive_seed(seed, [a])`.
pub fn generate_sbm(spec: &SbmSpec, seed: u64) -> Result<(EmpiricalGraph, Partition)> {
    spec.validate()?;
    let n = spec.node_count();
    let clusters = spec.clusters();
    let mut block = vec![0; n];
    for (l, c) in clusters.iter().enumerate() {
        for &i in c {
            block[i] = l;
        }
    }
    for attempt in 0..MAX_RETRIES {
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, &[attempt as u64]));
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let same = block[i] == block[j];
                let p = if same { spec.p_in } else { spec.p_out };
                if rng.random::<f64>() < p {
                    let w = if same {
                        spec.within_weight
                    } else {
                        spec.between_weight
                    };
                    edges.push((i, j, w));
                }
            }
        }
        let Ok(graph) = EmpiricalGraph::new(n, &edges) else {
            continue;
        };
        if let Ok(partition) = Partition::new(&graph, clusters.clone()) {
            return Ok((graph, partition));
        }
    }
    Err(Error::GeneratorExhausted {
        retries: MAX_RETRIES,
    })
}
