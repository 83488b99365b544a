//! Drivers behind the `colony` command: datasets, training, colony runs
//! and the desk-scale experiment protocols, all writing CSV.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod spec;
pub mod stats;

pub use error::{BenchError, Result};
pub use experiments::{
    bench, generate, grid, instances, load_models, sampling_compare, solve, train, BenchReport, GridReport, Models,
    SamplingReport,
};
pub use spec::{Method, RunSpec};
