use serde::{Deserialize, Serialize};

use super::{ConceptSpec, DriftSchedule, Generator};
use crate::error::{Error, Result};

pub const DRIFT_START: u64 = 1501;
pub const GRADUAL_DURATION: u64 = 500;
pub const TOTAL_STEPS: u64 = 3000;

/// What the drift changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriftKind {
    /// Class prior P(y).
    Prior,
    /// Class-conditional density p(x|y) of the negative class.
    ClassConditional,
    /// Posterior P(y|x), i.e. the decision boundary.
    Posterior,
}

pub const PRESET_NAMES: [&str; 12] = [
    "sine1-py",
    "sine1g-py",
    "sea-py",
    "seag-py",
    "sine1-pxy",
    "sine1g-pxy",
    "sea-pxy",
    "seag-pxy",
    "sine1-pyx",
    "sine1g-pyx",
    "sea-pyx",
    "seag-pyx",
];

fn sine1(prior: f64) -> ConceptSpec {
    ConceptSpec {
        generator: Generator::Sine1 { inverted: false },
        positive_prior: prior,
        negative_skew: None,
    }
}

fn sea(threshold: f64, prior: f64) -> ConceptSpec {
    ConceptSpec {
        generator: Generator::Sea { threshold },
        positive_prior: prior,
        negative_skew: None,
    }
}

fn concepts(is_sine: bool, kind: DriftKind) -> (ConceptSpec, ConceptSpec) {
    match (is_sine, kind) {
        (true, DriftKind::Prior) => (sine1(0.1), sine1(0.9)),
        (false, DriftKind::Prior) => (sea(7.0, 0.5), sea(7.0, 0.1)),
        (true, DriftKind::ClassConditional) => (
            ConceptSpec {
                negative_skew: Some(0.9),
                ..sine1(0.1)
            },
            ConceptSpec {
                negative_skew: Some(0.1),
                ..sine1(0.1)
            },
        ),
        (false, DriftKind::ClassConditional) => (
            ConceptSpec {
                negative_skew: Some(0.9),
                ..sea(7.0, 0.1)
            },
            ConceptSpec {
                negative_skew: Some(0.1),
                ..sea(7.0, 0.1)
            },
        ),
        (true, DriftKind::Posterior) => (
            sine1(0.1),
            ConceptSpec {
                generator: Generator::Sine1 { inverted: true },
                ..sine1(0.1)
            },
        ),
        (false, DriftKind::Posterior) => (sea(7.0, 0.1), sea(13.0, 0.1)),
    }
}

/// Resolves a named artificial stream, e.g. `sine1g-pxy`.
///
/// The prefix picks the generator and speed (`sine1`, `sine1g`, `sea`,
/// `seag`), the suffix the drift kind (`py`, `pxy`, `pyx`).
pub fn preset(name: &str) -> Result<DriftSchedule> {
    let unknown = || Error::Config(format!("unknown stream preset {name:?}"));
    let (base, kind) = name.rsplit_once('-').ok_or_else(unknown)?;
    let kind = match kind {
        "py" => DriftKind::Prior,
        "pxy" => DriftKind::ClassConditional,
        "pyx" => DriftKind::Posterior,
        _ => return Err(unknown()),
    };
    let (is_sine, gradual) = match base {
        "sine1" => (true, false),
        "sine1g" => (true, true),
        "sea" => (false, false),
        "seag" => (false, true),
        _ => return Err(unknown()),
    };
    let (old, new) = concepts(is_sine, kind);
    Ok(DriftSchedule {
        old,
        new,
        drift_start: DRIFT_START,
        drift_duration: if gradual { GRADUAL_DURATION } else { 0 },
        total_steps: TOTAL_STEPS,
    })
}
