//! Semi-supervised regression on empirical graphs with the network Lasso.
//!
//! - [`graph`]: weighted graphs, incidence and Laplacian matrices, total
//!   variation, spectral gaps and the incidence pseudo-inverse.
//! - [`signal`]: clustered ground truth, Gaussian label noise, training sets.
//! - [`solver`]: the primal-dual network Lasso solver.
//! - [`flow`]: flow-with-demands certificates for training sets and the
//!   sampled compatibility-condition check.
//! - [`experiments`]: stochastic block model generator, Monte-Carlo trials,
//!   the probability bound on the TV error and CSV output.
//! - [`io`]: JSON file formats shared with the command line tool.

pub mod error;
pub mod experiments;
pub mod flow;
pub mod graph;
pub mod io;
pub mod signal;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{EmpiricalGraph, GraphSignal, Partition};
pub use signal::{LabelSet, NoiseModel};
pub use solver::{solve, SolverConfig, SolverResult};
