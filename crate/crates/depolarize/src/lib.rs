//! Opinion-dynamics equilibria on weighted graphs and greedy edge-weight
//! interventions that reduce polarization.
//!
//! The library computes Friedkin-Johnsen expressed opinions z = (I+L)^{-1} s,
//! their polarization and disagreement, spectral and Cheeger-style bounds on
//! both, exact rank-one formulas for the effect of single-edge weight
//! additions, and a budgeted greedy planner with four selection heuristics
//! (random, disagreement-seeking, coordinate descent, Fiedler difference).
//! Synthetic graph generators and file formats round out a reproducible
//! experiment pipeline; the `depolarize` binary drives it.
//!
//! Candidate scoring fans out across threads by default; disable the
//! `parallel` feature for a fully sequential build.

pub mod dynamics;
pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod perturbation;
pub mod planner;
pub mod spectral;

pub use dynamics::{Factorized, OpinionProfile};
pub use error::{Error, Result};
pub use graph::{Graph, HMode, VertexSubset};
pub use perturbation::EdgePerturbation;
pub use planner::{CandidateMode, Heuristic, InterventionStep};
