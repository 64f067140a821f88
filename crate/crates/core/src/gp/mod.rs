//! Gaussian-process regression with an ARD Matérn 5/2 kernel.
//!
//! Inputs live in the unit cube, targets are standardized on every refit
//! (larger is better), and hyperparameters are chosen by restarted maximum
//! likelihood in log space. A fixed diagonal jitter keeps the noiseless
//! covariance factorizable.

mod dataset;
mod kernel;
mod model;

pub use dataset::{Dataset, Sense};
pub use kernel::{matern52, scaled_distance};
pub use model::{
    log_marginal_likelihood, log_marginal_likelihood_gradient, GpConfig, GpModel, Hyperparams,
    Prediction,
};
