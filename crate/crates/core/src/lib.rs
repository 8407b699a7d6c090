//! Online learning from class-imbalanced, concept-drifting data streams.
//!
//! The crate is organised around a prequential pipeline:
//!
//! * [`stream`] generates SINE1/SEA streams with prior, class-conditional and
//!   posterior drift, or loads labelled streams from delimited files.
//! * [`imbalance`] tracks time-decayed class sizes and designates the
//!   current minority/majority class.
//! * [`learners`] holds an online MLP and the OB/OOB/UOB bagging ensembles.
//! * [`detect`] provides the DDM-OCI, LFR and PAUC-PH drift detectors and
//!   TDR/FA/DoD scoring of their alarm logs.
//! * [`metrics`] computes the imbalance-aware measures, their fading-factor
//!   variants, windowed prequential AUC and the Wilcoxon signed-rank test.
//! * [`harness`] composes all of the above into repeatable experiments.
//!
//! Numeric state is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the experiment harness uses.

pub mod detect;
pub mod error;
pub mod harness;
pub mod imbalance;
pub mod learners;
pub mod metrics;
mod scalar;
pub mod stream;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use stream::Label;

pub type Example = stream::Example<f64>;
pub type ConfusionCounts = metrics::ConfusionCounts<f64>;
pub type DecayedConfusion = metrics::DecayedConfusion<f64>;
pub type ScoreWindow = metrics::ScoreWindow<f64>;
pub type ClassSizeTracker = imbalance::ClassSizeTracker<f64>;
pub type MlpModel = learners::MlpModel<f64>;
pub type EnsembleModel = learners::EnsembleModel<f64>;
pub type DdmOci = detect::DdmOci<f64>;
pub type Lfr = detect::Lfr<f64>;
pub type PaucPh = detect::PaucPh<f64>;
pub type Detector = detect::Detector<f64>;
