use nalgebra::DMatrix;
use rand::Rng;

use nlasso::graph::{incidence_pseudoinverse, spectral_gap, EmpiricalGraph, Partition};
use nlasso_testkit::instances::{connected_graph, connected_partition, rng};
use nlasso_testkit::oracles::{dense_laplacian, jacobi_eigenvalues};

fn corpus(seed: u64, count: usize, max_n: usize) -> Vec<(usize, Vec<(usize, usize, f64)>)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.random_range(1..=max_n);
            let p = r.random_range(0.0..0.4);
            (n, connected_graph(&mut r, n, p, (0.05, 5.0)))
        })
        .collect()
}

fn random_signal(r: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-5.0..5.0)).collect()
}

#[test]
fn constants_span_the_nullspace() {
    for (n, edges) in corpus(1, 60, 30) {
        let g = EmpiricalGraph::new(n, &edges).unwrap();
        let ones = vec![1.0; n];
        let d = g.incidence_matrix(&g.canonical_orientation());
        assert!(d.apply(&ones).iter().all(|v| v.abs() <= 1e-12));
        assert!(g.laplacian().apply(&ones).iter().all(|v| v.abs() <= 1e-12));
    }
}

#[test]
fn tv_is_orientation_independent() {
    let mut r = rng(2);
    for (n, edges) in corpus(2, 60, 30) {
        let g = EmpiricalGraph::new(n, &edges).unwrap();
        let x = random_signal(&mut r, n);
        let canonical = g.incidence_matrix(&g.canonical_orientation()).apply(&x);
        let mut o = g.canonical_orientation();
        for e in 0..o.len() {
            if r.random::<bool>() {
                o.flip(e);
            }
        }
        let flipped = g.incidence_matrix(&o).apply(&x);
        let l1 = |v: &[f64]| v.iter().map(|a| a.abs()).sum::<f64>();
        assert_eq!(l1(&canonical), l1(&flipped));
        assert!((g.tv_norm(&x).unwrap() - l1(&flipped)).abs() <= 1e-10 * (1.0 + l1(&flipped)));
        for (a, b) in canonical.iter().zip(&flipped) {
            assert_eq!(a.abs(), b.abs());
        }
    }
}

#[test]
fn tv_splits_over_boundary_and_interior() {
    let mut r = rng(3);
    for (n, edges) in corpus(3, 60, 30) {
        let g = EmpiricalGraph::new(n, &edges).unwrap();
        let k = r.random_range(1..=n);
        let p = Partition::new(&g, connected_partition(&mut r, n, &edges, k)).unwrap();
        let x = random_signal(&mut r, n);
        let split = g.tv_norm_subset(&x, p.boundary()).unwrap()
            + g.tv_norm_subset(&x, p.interior()).unwrap();
        let total = g.tv_norm(&x).unwrap();
        assert!((split - total).abs() <= 1e-12 * (1.0 + total));
        assert_eq!(p.boundary().len() + p.interior().len(), g.edge_count());
    }
}

#[test]
fn laplacian_matches_independent_construction() {
    for (n, edges) in corpus(4, 60, 30) {
        let g = EmpiricalGraph::new(n, &edges).unwrap();
        let reference = dense_laplacian(n, &edges);
        let l = DMatrix::from_fn(n, n, |i, j| reference[i][j]);
        let gap = (&l - g.laplacian().to_dense()).norm();
        assert!(gap <= 1e-12 * (1.0 + l.norm()));
    }
}

#[test]
fn spectral_gaps_match_jacobi() {
    let mut r = rng(5);
    for (n, edges) in corpus(5, 60, 25) {
        let g = EmpiricalGraph::new(n, &edges).unwrap();
        let ev = jacobi_eigenvalues(dense_laplacian(n, &edges));
        let gap = spectral_gap(&g).unwrap();
        if n == 1 {
            assert!(gap.is_infinite());
            continue;
        }
        assert!((gap - ev[1]).abs() <= 1e-9 * ev[n - 1]);

        let k = r.random_range(1..=n);
        let p = Partition::new(&g, connected_partition(&mut r, n, &edges, k)).unwrap();
        let mut expected = f64::INFINITY;
        for l in 0..p.len() {
            let sub = p.induced_subgraph(&g, l).unwrap();
            if sub.nodes.len() > 1 {
                let sub_edges: Vec<_> = sub
                    .graph
                    .edges()
                    .iter()
                    .map(|e| (e.i, e.j, e.weight))
                    .collect();
                expected = expected
                    .min(jacobi_eigenvalues(dense_laplacian(sub.nodes.len(), &sub_edges))[1]);
            }
        }
        let got = p.spectral_gap(&g).unwrap();
        if expected.is_infinite() {
            assert!(got.is_infinite());
        } else {
            assert!((got - expected).abs() <= 1e-9 * (1.0 + expected));
        }
    }
}

#[test]
fn pseudoinverse_is_moore_penrose() {
    for (n, edges) in corpus(6, 60, 30) {
        let g = EmpiricalGraph::new(n, &edges).unwrap();
        let o = g.canonical_orientation();
        let d = g.incidence_matrix(&o).to_dense();
        let p = incidence_pseudoinverse(&g, &o).unwrap();
        assert!((&d * &p.matrix * &d - &d).amax() <= 1e-9);
        assert!((&p.matrix * &d * &p.matrix - &p.matrix).amax() <= 1e-9);
        let dp = &d * &p.matrix;
        let pd = &p.matrix * &d;
        assert!((&dp - dp.transpose()).amax() <= 1e-9);
        assert!((&pd - pd.transpose()).amax() <= 1e-9);
        assert!(p.max_column_norm() <= p.column_bound * (1.0 + 1e-9));
    }
}
