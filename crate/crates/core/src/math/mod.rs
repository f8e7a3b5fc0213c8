//! Dense model kernels, losses, closed-form gradients and seeded full-batch
//! optimizers.
//!
//! Everything here is plain `f64` arithmetic: forward passes, per-example
//! losses, hand-derived backprop for the fixed architecture set, a central
//! finite-difference checker, and deterministic gradient-descent / Adam
//! loops. No autodiff, no threading; repeated calls with identical inputs
//! return identical outputs.

mod gradcheck;
mod loss;
mod model;
mod optim;

pub use gradcheck::{central_difference_gradient, finite_diff_check};
pub use loss::{dloss_doutput, per_example_loss, LossKind};
pub use model::{Activation, DenseLayer, ForwardCache, Gradients, Model, ModelSpec, Task};
pub use optim::{optimize, OptimMethod, OptimRun, OptimizerConfig};

use thiserror::Error;

/// Errors from model evaluation, loss computation and optimization.
#[derive(Debug, Error)]
pub enum MathError {
    #[error("dimension mismatch: model expects {expected} input features, batch has {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("length mismatch: {outputs} outputs vs {labels} labels")]
    LengthMismatch { outputs: usize, labels: usize },
    #[error("binary cross-entropy labels must be 0 or 1, found {value} at row {index}")]
    InvalidLabel { value: f64, index: usize },
    #[error("optimization diverged at step {step}: objective or parameters not finite")]
    Diverged { step: usize },
    #[error("objective is not finite at the evaluation point")]
    NonFiniteObjective,
    #[error("invalid optimizer config: {0}")]
    InvalidConfig(String),
}
