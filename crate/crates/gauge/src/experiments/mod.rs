//! Synthetic ground truth, observation sampling, NMSE evaluation, the ALS
//! baseline and replicated benchmark runs.

mod als;
mod bench;
mod truth;

pub use als::{als_baseline, AlsConfig, CpModel};
pub use bench::{
    aggregate, run_benchmark, AggregateRow, BenchOptions, BenchReport, BenchSpec, Method, SolverSpec, TrialRow,
};
pub use truth::{generate_truth, naive_model, nmse, sample_observations, Rank1};
pub(crate) use bench::stream;
