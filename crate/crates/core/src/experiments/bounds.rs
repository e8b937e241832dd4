//! The probability bound on the TV estimation error and the two
//! deterministic inequalities behind it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::condition_number;
use crate::graph::{incidence_pseudoinverse, EmpiricalGraph, Partition};

/// Graph and partition quantities entering the bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub num_clusters: usize,
    /// Stands in for `|C_l|`, which the bound leaves unquantified.
    pub min_cluster_size: usize,
    /// `ρ_F`, smallest cluster spectral gap.
    pub rho_f: f64,
    /// `‖D‖_∞ = √(max_e W_e)`.
    pub d_sup: f64,
}

impl GraphStats {
    pub fn compute(graph: &EmpiricalGraph, partition: &Partition) -> Result<Self> {
        Ok(Self {
            num_clusters: partition.len(),
            min_cluster_size: partition.min_cluster_size(),
            rho_f: partition.spectral_gap(graph)?,
            d_sup: graph.max_weight().sqrt(),
        })
    }
}

/// Checks the hypotheses `L > 4`, `1 < K < L − 2`.
pub fn check_hypotheses(k: f64, l: f64) -> Result<()> {
    if !(l > 4.0) {
        return Err(Error::HypothesisViolated(format!(
            "need L > 4, got L = {l}"
        )));
    }
    if !(k > 1.0 && k < l - 2.0) {
        return Err(Error::HypothesisViolated(format!(
            "need K in (1, L - 2) = (1, {}), got K = {k}",
            l - 2.0
        )));
    }
    Ok(())
}

/// `P{‖x̂ − x̄‖_TV ≥ η} ≤ 2|F| exp(−|C|η²/(6300κ²σ²)) + 2M exp(−M²ρ_F²η²/(900κ²σ²‖D‖_∞²))`,
/// clipped to `[0, 1]`, with `|C|` instantiated as the smallest cluster size.
pub fn theorem1_bound(
    stats: &GraphStats,
    m: usize,
    k: f64,
    l: f64,
    sigma: f64,
    eta: f64,
) -> Result<f64> {
    Ok(theorem1_rhs(stats, m, k, l, sigma, eta)?.clamp(0.0, 1.0))
}

/// The right-hand side of [`theorem1_bound`] before clipping.
pub fn theorem1_rhs(
    stats: &GraphStats,
    m: usize,
    k: f64,
    l: f64,
    sigma: f64,
    eta: f64,
) -> Result<f64> {
    check_hypotheses(k, l)?;
    if !(sigma > 0.0) {
        return Err(Error::HypothesisViolated(format!(
            "need sigma > 0, got {sigma}"
        )));
    }
    if !(eta > 0.0) {
        return Err(Error::HypothesisViolated(format!(
            "need eta > 0, got {eta}"
        )));
    }
    if m == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    let kappa = condition_number(k, l)?;
    let ks2 = kappa * kappa * sigma * sigma;
    let m = m as f64;
    let first = 2.0
        * stats.num_clusters as f64
        * (-(stats.min_cluster_size as f64) * eta * eta / (6300.0 * ks2)).exp();
    let second = 2.0
        * m
        * (-(m * m * stats.rho_f * stats.rho_f * eta * eta)
            / (900.0 * ks2 * stats.d_sup * stats.d_sup))
            .exp();
    Ok(first + second)
}

/// Both sides of `Σ u_i v_i ≤ (1/|V|) Σ v_i Σ u_j + ‖(D†)ᵀ v‖_∞ ‖u‖_TV`.
pub fn lemma2_check(graph: &EmpiricalGraph, u: &[f64], v: &[f64]) -> Result<(f64, f64)> {
    graph.check_signal(u)?;
    graph.check_signal(v)?;
    let pinv = incidence_pseudoinverse(graph, &graph.canonical_orientation())?;
    let lhs: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let n = graph.node_count() as f64;
    let mean_term = v.iter().sum::<f64>() * u.iter().sum::<f64>() / n;
    let rhs = mean_term + pinv.transpose_apply_sup(v) * graph.tv_norm(u)?;
    Ok((lhs, rhs))
}

/// Sides of the per-cluster decomposition bound on `Σ_{i∈M} v_i u_i`.
///
/// `rhs_as_stated` is `max_l |mean_{C_l} v| Σ_{j∈M} |u_j| + max_l ‖(D_{C_l}†)ᵀ v_{C_l}‖_∞ ‖u‖_TV`.
/// It does not hold for every `(u, v)`: with a single cluster, `M = {0}`,
/// `u ≡ 1` and `v = e_0` the left side is 1 and the right side `1/N`.
///
/// `rhs_masked` is what the per-cluster projection argument proves:
/// `v` restricted to `M` and the first sum over all nodes,
/// `max_l |mean_{C_l} v𝟙_M| Σ_j |u_j| + max_l ‖(D_{C_l}†)ᵀ (v𝟙_M)_{C_l}‖_∞ ‖u‖_TV`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corollary1Sides {
    pub lhs: f64,
    pub rhs_as_stated: f64,
    pub rhs_masked: f64,
}

pub fn corollary1_check(
    graph: &EmpiricalGraph,
    partition: &Partition,
    training_set: &[usize],
    u: &[f64],
    v: &[f64],
) -> Result<Corollary1Sides> {
    graph.check_signal(u)?;
    graph.check_signal(v)?;
    graph.check_nodes(training_set)?;
    let mut in_m = vec![false; graph.node_count()];
    for &i in training_set {
        in_m[i] = true;
    }
    let masked: Vec<f64> = v
        .iter()
        .zip(&in_m)
        .map(|(&x, &m)| if m { x } else { 0.0 })
        .collect();

    let mut mean_max = 0.0f64;
    let mut mean_max_masked = 0.0f64;
    let mut sup_max = 0.0f64;
    let mut sup_max_masked = 0.0f64;
    for l in 0..partition.len() {
        let sub = partition.induced_subgraph(graph, l)?;
        let local_v: Vec<f64> = sub.nodes.iter().map(|&i| v[i]).collect();
        let local_masked: Vec<f64> = sub.nodes.iter().map(|&i| masked[i]).collect();
        let size = sub.nodes.len() as f64;
        mean_max = mean_max.max((local_v.iter().sum::<f64>() / size).abs());
        mean_max_masked = mean_max_masked.max((local_masked.iter().sum::<f64>() / size).abs());
        let pinv = incidence_pseudoinverse(&sub.graph, &sub.graph.canonical_orientation())?;
        sup_max = sup_max.max(pinv.transpose_apply_sup(&local_v));
        sup_max_masked = sup_max_masked.max(pinv.transpose_apply_sup(&local_masked));
    }
    let tv = graph.tv_norm(u)?;
    let lhs: f64 = training_set.iter().map(|&i| v[i] * u[i]).sum();
    let abs_u_m: f64 = training_set.iter().map(|&i| u[i].abs()).sum();
    let abs_u_all: f64 = u.iter().map(|x| x.abs()).sum();
    Ok(Corollary1Sides {
        lhs,
        rhs_as_stated: mean_max * abs_u_m + sup_max * tv,
        rhs_masked: mean_max_masked * abs_u_all + sup_max_masked * tv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats() -> GraphStats {
        GraphStats {
            num_clusters: 2,
            min_cluster_size: 50,
            rho_f: 3.0,
            d_sup: 1.0,
        }
    }

    #[test]
    fn hand_evaluated_bound() {
        // K = 5, L = 11 gives κ = 1
        let raw = theorem1_rhs(&stats(), 10, 5.0, 11.0, 1.0, 10.0).unwrap();
        let expected = 4.0 * (-50.0 * 100.0 / 6300.0f64).exp()
            + 20.0 * (-100.0 * 9.0 * 100.0 / 900.0f64).exp();
        assert!((raw - expected).abs() <= 1e-14 * expected);
        // the first term alone is about 1.81, so the clipped bound is 1
        assert_eq!(
            theorem1_bound(&stats(), 10, 5.0, 11.0, 1.0, 10.0).unwrap(),
            1.0
        );
        let raw = theorem1_rhs(&stats(), 10, 5.0, 11.0, 1.0, 30.0).unwrap();
        let expected = 4.0 * (-50.0 * 900.0 / 6300.0f64).exp()
            + 20.0 * (-100.0 * 9.0 * 900.0 / 900.0f64).exp();
        assert!((raw - expected).abs() <= 1e-14 * expected);
        assert_eq!(
            theorem1_bound(&stats(), 10, 5.0, 11.0, 1.0, 30.0).unwrap(),
            raw
        );
    }

    #[test]
    fn bound_limits() {
        assert_eq!(
            theorem1_bound(&stats(), 10, 5.0, 11.0, 1.0, 1e6).unwrap(),
            0.0
        );
        assert_eq!(
            theorem1_bound(&stats(), 10, 5.0, 11.0, 1e9, 10.0).unwrap(),
            1.0
        );
    }

    #[test]
    fn bound_hypotheses() {
        assert!(matches!(
            theorem1_bound(&stats(), 10, 5.0, 4.0, 1.0, 1.0),
            Err(Error::HypothesisViolated(_))
        ));
        assert!(matches!(
            theorem1_bound(&stats(), 10, 9.0, 11.0, 1.0, 1.0),
            Err(Error::HypothesisViolated(_))
        ));
        assert!(matches!(
            theorem1_bound(&stats(), 10, 1.0, 11.0, 1.0, 1.0),
            Err(Error::HypothesisViolated(_))
        ));
        assert!(theorem1_bound(&stats(), 10, 5.0, 11.0, 0.0, 1.0).is_err());
    }

    fn path4() -> EmpiricalGraph {
        EmpiricalGraph::new(4, &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5)]).unwrap()
    }

    #[test]
    fn lemma2_constant_u_is_tight() {
        let g = path4();
        let v = [0.3, -1.2, 2.0, 0.7];
        let (lhs, rhs) = lemma2_check(&g, &[2.0; 4], &v).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
        let (lhs, rhs) = lemma2_check(&g, &[1.0, -2.0, 0.5, 3.0], &[0.0; 4]).unwrap();
        assert_eq!((lhs, rhs), (0.0, 0.0));
    }

    #[test]
    fn corollary_counterexample_to_stated_form() {
        let g = path4();
        let p = Partition::trivial(&g);
        let sides = corollary1_check(&g, &p, &[0], &[1.0; 4], &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(sides.lhs, 1.0);
        assert!((sides.rhs_as_stated - 0.25).abs() < 1e-12);
        assert!(sides.lhs > sides.rhs_as_stated);
        assert!(sides.lhs <= sides.rhs_masked + 1e-12);
    }

    #[test]
    fn corollary_cluster_constant_u_has_boundary_only_tv() {
        let g = path4();
        let p = Partition::new(&g, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let u = [1.5, 1.5, -0.5, -0.5];
        let tv = g.tv_norm(&u).unwrap();
        assert_eq!(tv, g.tv_norm_subset(&u, p.boundary()).unwrap());
        let sides = corollary1_check(&g, &p, &[0, 3], &u, &[0.2, -0.4, 1.0, 0.3]).unwrap();
        assert!(sides.lhs <= sides.rhs_masked + 1e-12);
    }
}
