//! Bayesian optimisation that treats the choice between exploring and
//! exploiting as a two-objective problem over the GP posterior `(μ, σ)`.
//!
//! The numerical core is generic over the scalar type ([`Scalar`], f32 or
//! f64); the aliases at the crate root fix it to `f64`, which is what the
//! harness uses.

pub mod acquisition;
pub mod benchmarks;
pub mod error;
pub mod gp;
pub mod harness;
pub mod linalg;
pub mod normal;
pub mod optim;
pub mod pareto;
pub mod sampling;
pub mod scalar;
pub mod stats;
pub mod strategies;

pub use error::{Error, Result};
pub use gp::{GpConfig, Sense};
pub use scalar::Scalar;
pub use strategies::Strategy;

pub type Dataset = gp::Dataset<f64>;
pub type GpModel = gp::GpModel<f64>;
pub type Hyperparams = gp::Hyperparams<f64>;
pub type Prediction = gp::Prediction<f64>;
pub type Objectives = pareto::Objectives<f64>;
pub type ParetoArchive = pareto::ParetoArchive<f64>;
pub type Design = sampling::Design<f64>;
