//! Active drift detectors for imbalanced streams and scoring of their
//! alarm logs against known drift times.

mod ddm_oci;
mod lfr;
mod pauc_ph;
mod scoring;

use serde::{Deserialize, Serialize};

use crate::stream::Label;
use crate::Scalar;

pub use ddm_oci::{DdmOci, DdmOciConfig};
pub use lfr::{BoundKind, BoundTable, Lfr, LfrConfig, Rate};
pub use pauc_ph::{PaucPh, PaucPhConfig};
pub use scoring::{score_detections, DetectionLog, DetectorScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Normal,
    Warning,
    Drift,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Normal => "normal",
            Verdict::Warning => "warning",
            Verdict::Drift => "drift",
        }
    }
}

/// Everything a detector may look at for one prequential step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation<T> {
    pub truth: Label,
    pub predicted: Label,
    /// Ensemble positive-class score in `[0,1]`.
    pub score: T,
    /// Current minority class, if the stream is imbalanced.
    pub minority: Option<Label>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    None,
    DdmOci,
    Lfr,
    PaucPh,
}

impl DetectorKind {
    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::None => "none",
            DetectorKind::DdmOci => "DDM-OCI",
            DetectorKind::Lfr => "LFR",
            DetectorKind::PaucPh => "PAUC-PH",
        }
    }
}

impl std::str::FromStr for DetectorKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "none" => Ok(DetectorKind::None),
            "ddm-oci" | "ddmoci" => Ok(DetectorKind::DdmOci),
            "lfr" => Ok(DetectorKind::Lfr),
            "pauc-ph" | "pauc" => Ok(DetectorKind::PaucPh),
            other => Err(crate::Error::Config(format!("unknown detector {other:?}"))),
        }
    }
}

/// Parameters for every detector kind; only the selected one is used.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorParams {
    pub ddm_oci: DdmOciConfig,
    pub lfr: LfrConfig,
    pub pauc_ph: PaucPhConfig,
}

/// One detector behind a common step/reset interface.
#[derive(Debug, Clone)]
pub enum Detector<T> {
    None,
    DdmOci(DdmOci<T>),
    Lfr(Lfr<T>),
    PaucPh(PaucPh<T>),
}

impl<T: Scalar> Detector<T> {
    pub fn new(kind: DetectorKind, params: &DetectorParams) -> Self {
        match kind {
            DetectorKind::None => Detector::None,
            DetectorKind::DdmOci => Detector::DdmOci(DdmOci::new(params.ddm_oci)),
            DetectorKind::Lfr => Detector::Lfr(Lfr::new(params.lfr)),
            DetectorKind::PaucPh => Detector::PaucPh(PaucPh::new(params.pauc_ph)),
        }
    }

    pub fn step(&mut self, obs: &Observation<T>) -> Verdict {
        match self {
            Detector::None => Verdict::Normal,
            // Without a designated minority the positive class is monitored.
            Detector::DdmOci(d) => {
                d.step(obs.truth, obs.predicted, obs.minority.unwrap_or(Label::Pos))
            }
            Detector::Lfr(d) => d.step(obs.truth, obs.predicted),
            Detector::PaucPh(d) => d.step(obs.score, obs.truth),
        }
    }

    pub fn reset(&mut self) {
        match self {
            Detector::None => {}
            Detector::DdmOci(d) => d.reset(),
            Detector::Lfr(d) => d.reset(),
            Detector::PaucPh(d) => d.reset(),
        }
    }
}
