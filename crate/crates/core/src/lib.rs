//! Compact finite difference solvers for the two-term time-fractional
//! subdiffusion equation
//!
//! ```text
//! u_t = (𝒜 D^{1-α} + ℬ D^{1-β}) u_xx + f(x, t),   0 < x < L,  0 < t ≤ T,
//! ```
//!
//! with Riemann-Liouville time derivatives and Dirichlet data. Time is
//! discretized by Crank-Nicolson with shifted Grünwald-Letnikov weights
//! (second order); space by compact sixth- or eighth-order stencils.

// `!(x > 0.0)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod banded;
pub mod cli;
pub mod error;
pub mod expr;
pub mod fracweights;
pub mod harness;
pub mod operators;
pub mod problem;
pub mod solver;

pub use analysis::{
    amplification_sweep, circulant_eigenvalues, max_error, spatial_order, stability_condition,
    stability_report, temporal_order, StabilityReport, SymbolPair,
};
pub use error::{Error, Result};
pub use fracweights::{combined_weights, gl_weights, shifted_weights, CombinedWeights, WeightTable};
pub use operators::{CompactPair, CompactStencil};
pub use problem::{validate, ProblemFile, ProblemSpec};
pub use solver::{solve, SchemeKind, SolutionHistory, Solver};
