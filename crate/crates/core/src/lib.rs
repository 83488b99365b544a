//! Neural-guided ant colony optimization.
//!
//! A graph neural network (or, for item-based pheromone models, an attention
//! encoder) maps a problem instance to per-component heuristic measures. The
//! network is trained with REINFORCE on ant-constructed solutions and its
//! output then biases Ant System / Elitist AS / MAX-MIN AS construction and
//! a local search that alternates 2-opt refinement with heuristic-guided
//! perturbation.

pub mod aco;
pub mod autodiff;
pub mod error;
pub mod learner;
pub mod local_search;
pub mod problem;
pub mod scalar;
pub mod train;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Tensor over the default 64-bit scalar.
pub type Tensor = autodiff::Tensor<f64>;
pub type Tape = autodiff::Tape<f64>;
pub type ParamStore = autodiff::ParamStore<f64>;
