//! Test support for the nlasso workspace: reference solvers that share no
//! code with the crate under test, and seeded random instances.
//!
//! Graphs are plain edge lists `(i, j, w)` with `i < j`.

pub mod instances;
pub mod oracles;

pub type EdgeList = [(usize, usize, f64)];
