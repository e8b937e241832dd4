use rand::Rng;

use nlasso::graph::EmpiricalGraph;
use nlasso::solver::{empirical_error, objective, solve, PrimalDual, SolverConfig};
use nlasso::LabelSet;
use nlasso_testkit::instances::{connected_graph, rng, subset};
use nlasso_testkit::oracles::{nlasso_admm, nlasso_objective};

fn tight(lambda: f64) -> SolverConfig {
    SolverConfig {
        max_iters: 2_000_000,
        rel_tol: 1e-12,
        snapshot_every: 10_000,
        ..SolverConfig::new(lambda)
    }
}

#[test]
fn objective_matches_admm_oracle() {
    let mut r = rng(10);
    for _ in 0..10 {
        let n = r.random_range(2..=8);
        let edges = connected_graph(&mut r, n, 0.3, (0.2, 2.0));
        let size = r.random_range(1..=n);
        let labels: Vec<(usize, f64)> = subset(&mut r, n, size)
            .into_iter()
            .map(|i| (i, r.random_range(-2.0..2.0)))
            .collect();
        let lambda = 10f64.powf(r.random_range(-2.0..0.0));
        let g = EmpiricalGraph::new(n, &edges).unwrap();
        let set = LabelSet::from_pairs(labels.iter().copied()).unwrap();
        let res = solve(&g, &set, &tight(lambda)).unwrap();
        let opt = nlasso_objective(
            &edges,
            &labels,
            lambda,
            &nlasso_admm(n, &edges, &labels, lambda),
        );
        let ours = objective(&g, &res.x_out, &set, lambda).unwrap();
        assert!(ours <= opt + 1e-4 * (1.0 + opt.abs()), "{ours} vs {opt}");
        assert!((res.final_objective - ours).abs() <= 1e-12 * (1.0 + ours));
    }
}

#[test]
fn oracle_solution_is_a_fixed_point() {
    // on a fully labelled path with well separated labels and small λ, the
    // solution has no flat edges, so the optimal dual is sign(D x*)
    let mut r = rng(11);
    for _ in 0..5 {
        let n = r.random_range(2..=6);
        let edges: Vec<(usize, usize, f64)> = (0..n - 1)
            .map(|i| (i, i + 1, r.random_range(0.5..2.0)))
            .collect();
        let labels: Vec<(usize, f64)> = (0..n)
            .map(|i| (i, 3.0 * i as f64 * if i % 2 == 0 { 1.0 } else { -1.0 }))
            .collect();
        let lambda = 0.01;
        let x_star = nlasso_admm(n, &edges, &labels, lambda);
        let g = EmpiricalGraph::new(n, &edges).unwrap();
        let dx = g
            .incidence_matrix(&g.canonical_orientation())
            .apply(&x_star);
        assert!(dx.iter().all(|v| v.abs() > 1e-3));
        let y_star: Vec<f64> = dx.iter().map(|v| v.signum()).collect();

        let set = LabelSet::from_pairs(labels.iter().copied()).unwrap();
        let mut pd = PrimalDual::warm(&g, &set, lambda, &x_star, &y_star).unwrap();
        let state = pd.step();
        let before = objective(&g, &x_star, &set, lambda).unwrap();
        let after = objective(&g, &state.x_avg, &set, lambda).unwrap();
        assert!((after - before).abs() <= 1e-8, "{after} vs {before}");
    }
}

#[test]
fn small_lambda_interpolates_labels() {
    let mut r = rng(12);
    let n = 8;
    let edges = connected_graph(&mut r, n, 0.3, (0.5, 1.5));
    let g = EmpiricalGraph::new(n, &edges).unwrap();
    let set = LabelSet::from_pairs((0..n).map(|i| (i, r.random_range(-1.0..1.0)))).unwrap();
    let mut last = f64::INFINITY;
    for lambda in [1e-2, 1e-3, 1e-4] {
        let res = solve(&g, &set, &tight(lambda)).unwrap();
        let err = empirical_error(&res.x_out, &set);
        assert!(err < last);
        last = err;
    }
    assert!(last < 1e-5, "{last}");
}

#[test]
fn large_lambda_flattens_the_estimate() {
    let mut r = rng(13);
    let n = 8;
    let edges = connected_graph(&mut r, n, 0.3, (0.5, 1.5));
    let g = EmpiricalGraph::new(n, &edges).unwrap();
    let set = LabelSet::from_pairs([(0, -1.0), (3, 2.0), (5, 0.5)]).unwrap();
    let res = solve(&g, &set, &tight(20.0)).unwrap();
    assert!(g.tv_norm(&res.x_out).unwrap() < 1e-3);
    // the constant minimiser is the label mean
    assert!(
        res.x_out.iter().all(|v| (v - 0.5).abs() < 1e-3),
        "{:?}",
        res.x_out
    );
}
