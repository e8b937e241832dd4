//! Network Lasso: `min_x (1/|M|) Σ_{i∈M} (y_i − x_i)² + λ ‖x‖_TV`.
//!
//! Solved with the diagonally preconditioned primal-dual iteration on the
//! saddle form `max_{‖u‖_∞ ≤ 1} Ê(x)/λ + uᵀ D x`. Each step is a full pass
//! over edges or nodes; steps run strictly in sequence.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EmpiricalGraph, GraphSignal, IncidenceMatrix};
use crate::signal::LabelSet;

/// `Ê(x) = (1/|M|) Σ_{i∈M} (y_i − x_i)²`.
pub fn empirical_error(x: &[f64], labels: &LabelSet) -> f64 {
    let sum: f64 = labels.iter().map(|(i, y)| (y - x[i]).powi(2)).sum();
    sum / labels.len() as f64
}

/// `Ê(x) + λ ‖x‖_TV`.
pub fn objective(graph: &EmpiricalGraph, x: &[f64], labels: &LabelSet, lambda: f64) -> Result<f64> {
    Ok(empirical_error(x, labels) + lambda * graph.tv_norm(x)?)
}

/// `‖x_out − x̄‖_TV`.
pub fn estimation_error_tv(graph: &EmpiricalGraph, x_out: &[f64], truth: &[f64]) -> Result<f64> {
    graph.check_signal(truth)?;
    let diff: Vec<f64> = x_out.iter().zip(truth).map(|(a, b)| a - b).collect();
    graph.tv_norm(&diff)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub lambda: f64,
    pub max_iters: usize,
    /// Relative sup-norm change of the averaged iterate over `window` steps.
    pub rel_tol: f64,
    pub window: usize,
    /// Objective is logged every this many iterations.
    pub snapshot_every: usize,
}

impl SolverConfig {
    pub const DEFAULT_REL_TOL: f64 = 1e-7;

    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            max_iters: 100_000,
            rel_tol: Self::DEFAULT_REL_TOL,
            window: 10,
            snapshot_every: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::param(
                "lambda",
                format!("must be positive, got {}", self.lambda),
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be at least 1"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::param(
                "rel_tol",
                format!("must be positive, got {}", self.rel_tol),
            ));
        }
        if self.window == 0 || self.snapshot_every == 0 {
            return Err(Error::param(
                "window",
                "window and snapshot_every must be at least 1",
            ));
        }
        Ok(())
    }
}

/// Diagonal step sizes. `edge_steps` is the per-edge dual scaling; it is
/// unrelated to the Laplacian degree matrix.
#[derive(Debug, Clone)]
pub struct StepScalings {
    /// `ν = 1/(λ|M|)`.
    pub nu: f64,
    /// `γ_i = Σ_j √W_ij`; the primal step on node `i` is `1/γ_i`.
    pub gamma: Vec<f64>,
    /// `1/(2√W_e)`.
    pub edge_steps: Vec<f64>,
}

impl StepScalings {
    pub fn new(graph: &EmpiricalGraph, labelled: usize, lambda: f64) -> Self {
        let gamma = (0..graph.node_count())
            .map(|i| {
                graph
                    .neighbors(i)
                    .iter()
                    .map(|&(_, e)| graph.edge(e).sqrt_weight())
                    .sum()
            })
            .collect();
        let edge_steps = graph
            .edges()
            .iter()
            .map(|e| 1.0 / (2.0 * e.sqrt_weight()))
            .collect();
        Self {
            nu: 1.0 / (lambda * labelled as f64),
            gamma,
            edge_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// `x̂⁽ᵏ⁾`
    pub x_hat: GraphSignal,
    /// `x̂⁽ᵏ⁻¹⁾`
    pub x_prev: GraphSignal,
    /// `ŷ⁽ᵏ⁾`, one entry per edge.
    pub y_dual: Vec<f64>,
    /// `x̄⁽ᵏ⁾`, running average of `x̂⁽¹⁾..x̂⁽ᵏ⁾`.
    pub x_avg: GraphSignal,
    pub k: usize,
}

impl SolverState {
    pub fn zeros(node_count: usize, edge_count: usize) -> Self {
        Self {
            x_hat: vec![0.0; node_count],
            x_prev: vec![0.0; node_count],
            y_dual: vec![0.0; edge_count],
            x_avg: vec![0.0; node_count],
            k: 0,
        }
    }
}

/// Stepwise primal-dual iteration over a fixed problem instance.
#[derive(Debug, Clone)]
pub struct PrimalDual<'a> {
    labels: &'a LabelSet,
    incidence: IncidenceMatrix,
    scalings: StepScalings,
    state: SolverState,
    x_ext: Vec<f64>,
    dx: Vec<f64>,
    dty: Vec<f64>,
}

impl<'a> PrimalDual<'a> {
    pub fn new(graph: &EmpiricalGraph, labels: &'a LabelSet, lambda: f64) -> Result<Self> {
        let state = SolverState::zeros(graph.node_count(), graph.edge_count());
        Self::with_state(graph, labels, lambda, state)
    }

    /// Starts from `x̂⁽⁰⁾ = x̂⁽⁻¹⁾ = x0`, `ŷ⁽⁰⁾ = y0`.
    pub fn warm(
        graph: &EmpiricalGraph,
        labels: &'a LabelSet,
        lambda: f64,
        x0: &[f64],
        y0: &[f64],
    ) -> Result<Self> {
        graph.check_signal(x0)?;
        if y0.len() != graph.edge_count() {
            return Err(Error::LengthMismatch {
                expected: graph.edge_count(),
                got: y0.len(),
            });
        }
        let state = SolverState {
            x_hat: x0.to_vec(),
            x_prev: x0.to_vec(),
            y_dual: y0.to_vec(),
            x_avg: vec![0.0; x0.len()],
            k: 0,
        };
        Self::with_state(graph, labels, lambda, state)
    }

    fn with_state(
        graph: &EmpiricalGraph,
        labels: &'a LabelSet,
        lambda: f64,
        state: SolverState,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        labels.check_against(graph)?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::param(
                "lambda",
                format!("must be positive, got {lambda}"),
            ));
        }
        let n = graph.node_count();
        let m = graph.edge_count();
        Ok(Self {
            labels,
            incidence: graph.incidence_matrix(&graph.canonical_orientation()),
            scalings: StepScalings::new(graph, labels.len(), lambda),
            state,
            x_ext: vec![0.0; n],
            dx: vec![0.0; m],
            dty: vec![0.0; n],
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn scalings(&self) -> &StepScalings {
        &self.scalings
    }

    /// One pass of the seven-step iteration.
    pub fn step(&mut self) -> &SolverState {
        let s = &mut self.state;
        let sc = &self.scalings;

        // 1: extrapolation
        for ((xe, &xh), &xp) in self.x_ext.iter_mut().zip(&s.x_hat).zip(&s.x_prev) {
            *xe = 2.0 * xh - xp;
        }
        // 2-3: dual ascent, then projection onto [-1, 1]
        self.incidence.apply_into(&self.x_ext, &mut self.dx);
        for ((y, &step), &dx) in s.y_dual.iter_mut().zip(&sc.edge_steps).zip(&self.dx) {
            let z = *y + step * dx;
            *y = z / z.abs().max(1.0);
        }
        // 4: primal descent
        self.incidence
            .apply_transpose_into(&s.y_dual, &mut self.dty);
        std::mem::swap(&mut s.x_prev, &mut s.x_hat);
        for (((xn, &xo), &g), &d) in s
            .x_hat
            .iter_mut()
            .zip(&s.x_prev)
            .zip(&sc.gamma)
            .zip(&self.dty)
        {
            *xn = xo - d / g;
        }
        // 5: proximal step of the data term on labelled nodes
        for (i, y) in self.labels.iter() {
            let g = sc.gamma[i];
            s.x_hat[i] = (2.0 * sc.nu * y + g * s.x_hat[i]) / (2.0 * sc.nu + g);
        }
        // 6-7: ergodic average
        s.k += 1;
        let w = 1.0 / s.k as f64;
        for (a, &x) in s.x_avg.iter_mut().zip(&s.x_hat) {
            *a = (1.0 - w) * *a + w * x;
        }
        &self.state
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxItersReached,
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    /// Averaged iterate at termination.
    pub x_out: GraphSignal,
    pub iters_run: usize,
    pub final_objective: f64,
    pub objective_trace: Vec<(usize, f64)>,
    pub status: SolveStatus,
}

/// Runs the iteration until the windowed stopping rule fires or
/// `max_iters` is hit. Hitting the cap is reported through `status`.
pub fn solve(
    graph: &EmpiricalGraph,
    labels: &LabelSet,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    cfg.validate()?;
    let mut pd = PrimalDual::new(graph, labels, cfg.lambda)?;
    run(graph, labels, cfg, &mut pd, |_| {})
}

/// [`solve`] with a hook called after every iteration.
pub fn solve_observed<F>(
    graph: &EmpiricalGraph,
    labels: &LabelSet,
    cfg: &SolverConfig,
    observe: F,
) -> Result<SolverResult>
where
    F: FnMut(&SolverState),
{
    cfg.validate()?;
    let mut pd = PrimalDual::new(graph, labels, cfg.lambda)?;
    run(graph, labels, cfg, &mut pd, observe)
}

fn run<F>(
    graph: &EmpiricalGraph,
    labels: &LabelSet,
    cfg: &SolverConfig,
    pd: &mut PrimalDual<'_>,
    mut observe: F,
) -> Result<SolverResult>
where
    F: FnMut(&SolverState),
{
    let mut history: VecDeque<GraphSignal> = VecDeque::with_capacity(cfg.window + 1);
    let mut trace = Vec::new();
    let mut status = SolveStatus::MaxItersReached;
    while pd.state.k < cfg.max_iters {
        let state = pd.step();
        observe(state);
        let k = state.k;
        if state.x_avg.iter().any(|v| !v.is_finite()) || state.x_hat.iter().any(|v| !v.is_finite())
        {
            return Err(Error::NonFiniteIterate { iteration: k });
        }
        if k.is_multiple_of(cfg.snapshot_every) {
            trace.push((k, objective(graph, &state.x_avg, labels, cfg.lambda)?));
        }
        history.push_back(state.x_avg.clone());
        if history.len() > cfg.window {
            let old = history.pop_front().expect("window is nonempty");
            let change = sup_dist(&state.x_avg, &old);
            let scale = 1.0 + state.x_avg.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if change / scale < cfg.rel_tol {
                status = SolveStatus::Converged;
                break;
            }
        }
    }
    let x_out = pd.state.x_avg.clone();
    let final_objective = objective(graph, &x_out, labels, cfg.lambda)?;
    if trace.last().map(|&(k, _)| k) != Some(pd.state.k) {
        trace.push((pd.state.k, final_objective));
    }
    Ok(SolverResult {
        x_out,
        iters_run: pd.state.k,
        final_objective,
        objective_trace: trace,
        status,
    })
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
