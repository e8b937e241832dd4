use nlasso::experiments::stats::binomial_margin;
use nlasso::graph::{EmpiricalGraph, Partition};
use nlasso::signal::{gaussian_tail_bound, sample_labels, sample_training_set, ClusteredSignal};
use nlasso::NoiseModel;

/// Monte-Carlo frequency of `|(1/N) Σ w_i ε_i| ≥ η` with draws from the
/// crate's own noise streams.
fn tail_frequency(eta: f64, sigma: f64, weights: &[f64], draws: u64) -> f64 {
    let n = weights.len() as f64;
    let mut hits = 0u64;
    for seed in 0..draws {
        let noise = NoiseModel::new(sigma, seed).unwrap();
        let mean: f64 = weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * sigma * noise.standard_draw(i))
            .sum::<f64>()
            / n;
        if mean.abs() >= eta {
            hits += 1;
        }
    }
    hits as f64 / draws as f64
}

#[test]
fn monte_carlo_tails_respect_the_bound() {
    let draws = 1_000_000;
    let unit = vec![1.0; 100];
    let mixed: Vec<f64> = (0..10).map(|i| 0.5 + 0.1 * i as f64).collect();
    for (eta, sigma, weights) in [
        (0.5, 1.0, &unit),
        (0.2, 1.0, &unit),
        (0.3, 0.5, &mixed),
        (0.6, 1.0, &mixed),
    ] {
        let bound = gaussian_tail_bound(eta, sigma, weights, weights.len()).unwrap();
        let freq = tail_frequency(eta, sigma, weights, draws);
        assert!(
            freq <= bound + binomial_margin(bound, draws as usize, 3.0),
            "eta {eta}: freq {freq} > bound {bound}"
        );
    }
}

#[test]
fn spec_point_matches_closed_form() {
    let bound = gaussian_tail_bound(0.5, 1.0, &[1.0; 100], 100).unwrap();
    assert!((bound - 2.0 * (-12.5f64).exp()).abs() < 1e-18);
}

#[test]
fn noiseless_labels_copy_the_truth() {
    let g = EmpiricalGraph::new(
        6,
        &[
            (0, 1, 1.0),
            (1, 2, 1.0),
            (2, 3, 0.1),
            (3, 4, 1.0),
            (4, 5, 1.0),
        ],
    )
    .unwrap();
    let p = Partition::new(&g, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
    let truth = ClusteredSignal::new(p.clone(), vec![0.3, -1.7])
        .unwrap()
        .expand();
    assert_eq!(g.tv_norm_subset(&truth, p.interior()).unwrap(), 0.0);
    let set = sample_training_set(&g, 4, 9).unwrap();
    let labels = sample_labels(&truth, &set, &NoiseModel::new(0.0, 3).unwrap()).unwrap();
    for (i, y) in labels.iter() {
        assert_eq!(y.to_bits(), truth[i].to_bits());
    }
}

#[test]
fn training_sets_are_nested_for_a_seed() {
    let edges: Vec<_> = (0..29).map(|i| (i, i + 1, 1.0)).collect();
    let g = EmpiricalGraph::new(30, &edges).unwrap();
    let big = sample_training_set(&g, 20, 4).unwrap();
    for m in [1, 5, 12] {
        let small = sample_training_set(&g, m, 4).unwrap();
        assert!(small.iter().all(|i| big.contains(i)));
    }
}
