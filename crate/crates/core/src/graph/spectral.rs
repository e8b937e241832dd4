use nalgebra::{DMatrix, SymmetricEigen};

use super::{EmpiricalGraph, Orientation};
use crate::error::{Error, Result};

/// Eigenvalues below this fraction of `λ_max` count as zero.
const ZERO_EIGEN_RTOL: f64 = 1e-9;

/// Ascending Laplacian spectrum from a dense symmetric eigensolve.
pub(crate) fn laplacian_spectrum(graph: &EmpiricalGraph) -> Vec<f64> {
    let l = graph.laplacian().to_dense();
    let mut eig: Vec<f64> = SymmetricEigen::new(l).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// `ρ(G) = λ₂(L)`. The single-node graph has no `λ₂`; it reports `+∞`.
pub fn spectral_gap(graph: &EmpiricalGraph) -> Result<f64> {
    if graph.node_count() == 1 {
        return Ok(f64::INFINITY);
    }
    let eig = laplacian_spectrum(graph);
    let lambda_max = eig[eig.len() - 1];
    let gap = eig[1];
    if gap <= ZERO_EIGEN_RTOL * lambda_max {
        // construction already rejects disconnected graphs; reaching this is a bug
        return Err(Error::Disconnected {
            unreachable: usize::MAX,
        });
    }
    Ok(gap)
}

/// Moore–Penrose pseudo-inverse `D†` (`N × |E|`) of an incidence matrix.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub matrix: DMatrix<f64>,
    /// `√(2‖W‖_∞) / ρ(G)`, the column-norm bound every column satisfies.
    pub column_bound: f64,
}

impl PseudoInverse {
    pub fn max_column_norm(&self) -> f64 {
        self.matrix
            .column_iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// `‖(D†)ᵀ v‖_∞`.
    pub fn transpose_apply_sup(&self, v: &[f64]) -> f64 {
        self.matrix
            .column_iter()
            .map(|c| c.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}

/// Pseudo-inverse of the incidence matrix, `D† = L† Dᵀ` with
/// `L† = (L + 𝟙𝟙ᵀ/N)⁻¹ − 𝟙𝟙ᵀ/N`.
///
/// This is the same matrix the SVD of `D` yields. The numerical rank of
/// `L` must be exactly `N − 1` (the constants span the nullspace). The
/// column bound `‖s_j‖ ≤ √(2‖W‖_∞)/ρ(G)` is verified on the result.
pub fn incidence_pseudoinverse(
    graph: &EmpiricalGraph,
    orientation: &Orientation,
) -> Result<PseudoInverse> {
    let n = graph.node_count();
    let e = graph.edge_count();
    if e == 0 {
        return Ok(PseudoInverse {
            matrix: DMatrix::zeros(n, 0),
            column_bound: 0.0,
        });
    }
    let eig = laplacian_spectrum(graph);
    let tol = ZERO_EIGEN_RTOL * eig[n - 1];
    let rank = eig.iter().filter(|&&v| v > tol).count();
    if rank != n - 1 {
        return Err(Error::NumericalRankDeficiency {
            rank,
            expected: n - 1,
        });
    }
    let d = graph.incidence_matrix(orientation).to_dense();
    let j = DMatrix::from_element(n, n, 1.0 / n as f64);
    let shifted = graph.laplacian().to_dense() + &j;
    let inverse = shifted
        .cholesky()
        .ok_or(Error::NumericalRankDeficiency {
            rank: n - 1,
            expected: n - 1,
        })?
        .inverse();
    let matrix = (inverse - j) * d.transpose();

    let rho = spectral_gap(graph)?;
    let column_bound = (2.0 * graph.max_weight()).sqrt() / rho;
    let pinv = PseudoInverse {
        matrix,
        column_bound,
    };
    for (j, col) in pinv.matrix.column_iter().enumerate() {
        let norm = col.norm();
        if norm > column_bound * (1.0 + 1e-9) {
            return Err(Error::ColumnBoundViolated {
                column: j,
                norm,
                bound: column_bound,
            });
        }
    }
    Ok(pinv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> EmpiricalGraph {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j, 1.0));
            }
        }
        EmpiricalGraph::new(n, &edges).unwrap()
    }

    #[test]
    fn complete_graph_gap_is_n() {
        for n in [2, 3, 5, 8] {
            assert!((spectral_gap(&complete(n)).unwrap() - n as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn two_node_pseudoinverse_is_half_transpose() {
        let g = EmpiricalGraph::new(2, &[(0, 1, 1.0)]).unwrap();
        let p = incidence_pseudoinverse(&g, &g.canonical_orientation()).unwrap();
        assert!((p.matrix[(0, 0)] - 0.5).abs() < 1e-12);
        assert!((p.matrix[(1, 0)] + 0.5).abs() < 1e-12);
        assert!((p.max_column_norm() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((p.column_bound - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn nonzero_spectra_of_ddt_and_laplacian_agree() {
        let g = EmpiricalGraph::new(
            5,
            &[
                (0, 1, 1.0),
                (1, 2, 2.0),
                (2, 3, 0.5),
                (3, 4, 1.5),
                (4, 0, 3.0),
                (1, 3, 0.7),
            ],
        )
        .unwrap();
        let d = g.incidence_matrix(&g.canonical_orientation()).to_dense();
        let mut ddt: Vec<f64> = SymmetricEigen::new(&d * d.transpose())
            .eigenvalues
            .iter()
            .copied()
            .filter(|v| v.abs() > 1e-9)
            .collect();
        ddt.sort_by(f64::total_cmp);
        let lap: Vec<f64> = laplacian_spectrum(&g)
            .into_iter()
            .filter(|v| v.abs() > 1e-9)
            .collect();
        assert_eq!(ddt.len(), lap.len());
        for (a, b) in ddt.iter().zip(&lap) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
