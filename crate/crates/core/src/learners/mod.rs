//! Online base learner and the bagging ensembles built on it.

mod ensemble;
mod mlp;
mod poisson;

use crate::error::Result;
use crate::stream::Label;
use crate::Scalar;

pub use ensemble::{
    ensemble_predict, member_seed, EnsembleModel, Prediction, Sampling, DEFAULT_ENSEMBLE_SIZE,
};
pub use mlp::{hidden_size, MlpModel, DEFAULT_LEARNING_RATE};
pub use poisson::poisson_k;

/// A classifier updated one example at a time.
pub trait OnlineModel<T: Scalar> {
    fn train_one(&mut self, x: &[T], label: Label) -> Result<()>;

    /// Class probabilities `[P(+1), P(-1)]`, summing to one.
    fn predict(&self, x: &[T]) -> Result<[T; 2]>;

    /// Re-draws the initial parameters from `seed`.
    fn reset(&mut self, seed: u64);
}
