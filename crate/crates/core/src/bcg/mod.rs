//! Blended conditional gradients for
//! `min (1/n) Σ_i (y_i − ψ_{x_i})²  s.t.  ‖ψ‖ ≤ λ`, run over the observed
//! unique indices only.

mod active;
mod objective;
mod solver;

pub use active::{ActiveSet, ActiveVertex, WEIGHT_FLOOR};
pub use objective::{gradient, line_search, objective};
pub use solver::{
    local_gap, local_step, solve, solve_with_clock, Diagnostics, Phase, SolveOutcome, SolveStatus,
    SolverConfig, SolverState, TraceRecord,
};
