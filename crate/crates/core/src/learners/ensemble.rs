use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{poisson_k, MlpModel, OnlineModel};
use crate::error::Result;
use crate::imbalance::ClassSizeTracker;
use crate::stream::{Example, Label};
use crate::Scalar;

pub const DEFAULT_ENSEMBLE_SIZE: usize = 15;

/// How many copies of each example a member trains on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Online Bagging: `k ~ Poisson(1)`.
    Ob,
    /// Oversampling: `lambda = w_max / w_y`.
    Oob,
    /// Undersampling: `lambda = w_min / w_y`.
    Uob,
}

impl Sampling {
    /// Poisson rate for an example of class `label` given current class
    /// sizes. A balanced tracker falls back to plain bagging.
    pub fn rate<T: Scalar>(self, label: Label, tracker: &ClassSizeTracker<T>) -> f64 {
        if self == Sampling::Ob || tracker.status().is_balanced() {
            return 1.0;
        }
        let w = tracker.size(label).to_f64_lossy();
        let reference = match self {
            Sampling::Oob => tracker.w_max(),
            _ => tracker.w_min(),
        }
        .to_f64_lossy();
        if w > 0.0 {
            reference / w
        } else {
            1.0
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sampling::Ob => "OB",
            Sampling::Oob => "OOB",
            Sampling::Uob => "UOB",
        }
    }
}

impl std::str::FromStr for Sampling {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ob" => Ok(Sampling::Ob),
            "oob" => Ok(Sampling::Oob),
            "uob" => Ok(Sampling::Uob),
            other => Err(crate::Error::Config(format!("unknown learner {other:?}"))),
        }
    }
}

/// SplitMix64 finaliser over the run seed, reset generation and member.
pub fn member_seed(run_seed: u64, generation: u64, member: usize) -> u64 {
    let mut z = run_seed
        ^ generation.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (member as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    pub label: Label,
    /// Mean positive-class probability across members.
    pub score: T,
}

/// Bag of MLPs resampled by Poisson draws.
///
/// Class sizes are read from a tracker owned by the caller, so a
/// [`EnsembleModel::reset`] leaves them untouched.
#[derive(Debug, Clone)]
pub struct EnsembleModel<T> {
    members: Vec<MlpModel<T>>,
    sampling: Sampling,
    seed: u64,
    generation: u64,
    rng: ChaCha8Rng,
}

impl<T: Scalar> EnsembleModel<T> {
    pub fn new(
        sampling: Sampling,
        size: usize,
        n_attributes: usize,
        learning_rate: T,
        seed: u64,
    ) -> Self {
        assert!(size > 0, "ensemble needs at least one member");
        let members = (0..size)
            .map(|i| MlpModel::new(n_attributes, learning_rate, member_seed(seed, 0, i)))
            .collect();
        EnsembleModel {
            members,
            sampling,
            seed,
            generation: 0,
            rng: ChaCha8Rng::seed_from_u64(member_seed(seed, u64::MAX, usize::MAX)),
        }
    }

    pub fn members(&self) -> &[MlpModel<T>] {
        &self.members
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    /// Number of resets so far.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Trains every member `k ~ Poisson(lambda)` times on `ex`. The tracker
    /// must already include `ex.label`.
    pub fn train_one(&mut self, ex: &Example<T>, tracker: &ClassSizeTracker<T>) -> Result<()> {
        let lambda = self.sampling.rate(ex.label, tracker);
        for m in &mut self.members {
            let k = poisson_k(lambda, &mut self.rng);
            for _ in 0..k {
                m.train_one(&ex.features, ex.label)?;
            }
        }
        Ok(())
    }

    pub fn predict(&self, x: &[T]) -> Result<Prediction<T>> {
        let mut total = T::zero();
        for m in &self.members {
            total = total + m.predict(x)?[0];
        }
        let score = total / T::of(self.members.len() as f64);
        let label = if score >= T::of(0.5) {
            Label::Pos
        } else {
            Label::Neg
        };
        Ok(Prediction { label, score })
    }

    /// Re-initialises every member from seeds derived from the run seed and
    /// the new reset generation.
    pub fn reset(&mut self) {
        self.generation += 1;
        for (i, m) in self.members.iter_mut().enumerate() {
            m.reset(member_seed(self.seed, self.generation, i));
        }
    }
}

pub fn ensemble_predict<T: Scalar>(e: &EnsembleModel<T>, x: &[T]) -> Result<Prediction<T>> {
    e.predict(x)
}
