//! Reference solvers on plain edge lists and dense matrices.

use nalgebra::{DMatrix, DVector};

use crate::EdgeList;

/// `L = diag(Σ_j W_ij) − W` built entry by entry.
pub fn dense_laplacian(n: usize, edges: &EdgeList) -> Vec<Vec<f64>> {
    let mut l = vec![vec![0.0; n]; n];
    for &(i, j, w) in edges {
        l[i][j] -= w;
        l[j][i] -= w;
        l[i][i] += w;
        l[j][j] += w;
    }
    l
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        let scale: f64 = (0..n).map(|p| a[p][p] * a[p][p]).sum::<f64>() + off;
        if off <= 1e-30 * scale.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `(1/|M|) Σ_{i∈M} (y_i − x_i)² + λ Σ_e √W_e |x_i − x_j|`.
pub fn nlasso_objective(edges: &EdgeList, labels: &[(usize, f64)], lambda: f64, x: &[f64]) -> f64 {
    let fit: f64 =
        labels.iter().map(|&(i, y)| (y - x[i]).powi(2)).sum::<f64>() / labels.len() as f64;
    let tv: f64 = edges
        .iter()
        .map(|&(i, j, w)| w.sqrt() * (x[i] - x[j]).abs())
        .sum();
    fit + lambda * tv
}

/// Minimiser of [`nlasso_objective`] by ADMM on the split `z = Bx`, with
/// `B` the unweighted edge-difference matrix. The graph must be connected
/// and `labels` nonempty, so the x-update system is positive definite.
pub fn nlasso_admm(n: usize, edges: &EdgeList, labels: &[(usize, f64)], lambda: f64) -> Vec<f64> {
    let m = labels.len() as f64;
    let rho = 1.0;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut py = DVector::<f64>::zeros(n);
    for &(i, y) in labels {
        a[(i, i)] += 2.0 / m;
        py[i] += 2.0 * y / m;
    }
    for &(i, j, _) in edges {
        a[(i, i)] += rho;
        a[(j, j)] += rho;
        a[(i, j)] -= rho;
        a[(j, i)] -= rho;
    }
    let chol = a.cholesky().expect("x-update system is positive definite");
    let ne = edges.len();
    let mut x = DVector::<f64>::zeros(n);
    let mut z = vec![0.0; ne];
    let mut u = vec![0.0; ne];
    let scale = 1.0 + labels.iter().map(|l| l.1.abs()).fold(0.0, f64::max);
    for _ in 0..2_000_000 {
        let mut rhs = py.clone();
        for (e, &(i, j, _)) in edges.iter().enumerate() {
            let v = rho * (z[e] - u[e]);
            rhs[i] += v;
            rhs[j] -= v;
        }
        x = chol.solve(&rhs);
        let mut primal = 0.0f64;
        let mut dual = 0.0f64;
        for (e, &(i, j, w)) in edges.iter().enumerate() {
            let bx = x[i] - x[j];
            let v = bx + u[e];
            let thr = lambda * w.sqrt() / rho;
            let znew = v.signum() * (v.abs() - thr).max(0.0);
            dual = dual.max(rho * (znew - z[e]).abs());
            z[e] = znew;
            u[e] += bx - znew;
            primal = primal.max((bx - znew).abs());
        }
        if primal < 1e-13 * scale && dual < 1e-13 * scale {
            break;
        }
    }
    x.iter().copied().collect()
}

/// Feasibility of `{v : A v = b, lo ≤ v ≤ hi}` by a dense phase-one
/// simplex with Bland's rule. `hi` may be `+∞`; `lo` must be finite.
pub fn lp_feasible(a: &[Vec<f64>], b: &[f64], lo: &[f64], hi: &[f64]) -> bool {
    let nv = lo.len();
    // shift to v' = v − lo ≥ 0 and add rows v'_k + s_k = hi_k − lo_k
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let bounded: Vec<usize> = (0..nv).filter(|&k| hi[k].is_finite()).collect();
    let ncols = nv + bounded.len();
    for (r, row) in a.iter().enumerate() {
        let mut coeffs = vec![0.0; ncols];
        coeffs[..nv].copy_from_slice(row);
        let rhs = b[r] - row.iter().zip(lo).map(|(c, l)| c * l).sum::<f64>();
        rows.push((coeffs, rhs));
    }
    for (s, &k) in bounded.iter().enumerate() {
        let mut coeffs = vec![0.0; ncols];
        coeffs[k] = 1.0;
        coeffs[nv + s] = 1.0;
        rows.push((coeffs, hi[k] - lo[k]));
    }
    let nr = rows.len();
    let width = ncols + nr + 1;
    let mut t = vec![vec![0.0; width]; nr + 1];
    for (r, (coeffs, rhs)) in rows.iter().enumerate() {
        let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
        for c in 0..ncols {
            t[r][c] = sign * coeffs[c];
        }
        t[r][ncols + r] = 1.0;
        t[r][width - 1] = sign * rhs;
    }
    for c in 0..width {
        if c >= ncols && c < ncols + nr {
            continue;
        }
        t[nr][c] = -(0..nr).map(|r| t[r][c]).sum::<f64>();
    }
    let mut basis: Vec<usize> = (ncols..ncols + nr).collect();
    let rhs_scale = 1.0 + rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
    let eps = 1e-12 * rhs_scale;
    for _ in 0..100_000 {
        let Some(enter) = (0..ncols + nr).find(|&c| t[nr][c] < -1e-12) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in 0..nr {
            if t[r][enter] > 1e-12 {
                let ratio = t[r][width - 1] / t[r][enter];
                let better = ratio < best - 1e-15
                    || (ratio <= best + 1e-15 && leave.is_some_and(|l| basis[r] < basis[l]));
                if leave.is_none() || better {
                    best = ratio;
                    leave = Some(r);
                }
            }
        }
        let Some(p) = leave else {
            break;
        };
        let piv = t[p][enter];
        for c in 0..width {
            t[p][c] /= piv;
        }
        for r in 0..=nr {
            if r != p && t[r][enter] != 0.0 {
                let f = t[r][enter];
                for c in 0..width {
                    t[r][c] -= f * t[p][c];
                }
            }
        }
        basis[p] = enter;
    }
    let infeasibility = -t[nr][width - 1];
    infeasibility <= 1e-9 * rhs_scale.max(eps)
}
