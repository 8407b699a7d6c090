//! Synthetic drifting streams and external stream ingestion.

mod csv_io;
mod presets;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

pub use csv_io::{load_csv_stream, write_stream_csv, Column, CsvSchema, Scaling};
pub use presets::{preset, DriftKind, PRESET_NAMES};

/// Maximum rejection-sampling attempts per example.
pub const MAX_ATTEMPTS: usize = 10_000;

/// Binary class label, `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "-1")]
    Neg,
    #[serde(rename = "+1")]
    Pos,
}

impl Label {
    pub fn from_sign(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Label::Pos),
            -1 => Ok(Label::Neg),
            other => Err(Error::UnknownClass(other)),
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }

    /// Index into two-slot per-class arrays: `Pos` is 0, `Neg` is 1.
    pub fn index(self) -> usize {
        match self {
            Label::Pos => 0,
            Label::Neg => 1,
        }
    }

    pub const BOTH: [Label; 2] = [Label::Pos, Label::Neg];
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.sign())
    }
}

/// One timestamped labelled observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Example<T> {
    pub t: u64,
    pub features: Vec<T>,
    pub label: Label,
}

impl Example<f64> {
    pub fn cast<T: Scalar>(&self) -> Example<T> {
        Example {
            t: self.t,
            features: self.features.iter().map(|&v| T::of(v)).collect(),
            label: self.label,
        }
    }
}

/// +1 iff the point lies strictly below `y = sin(x)`.
pub fn sine1_label(x: f64, y: f64) -> Label {
    if y < x.sin() {
        Label::Pos
    } else {
        Label::Neg
    }
}

/// +1 iff `x1 + x2 <= threshold`.
pub fn sea_label(x1: f64, x2: f64, threshold: f64) -> Label {
    if x1 + x2 <= threshold {
        Label::Pos
    } else {
        Label::Neg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Generator {
    /// Two attributes on `[0,1]`. `inverted` swaps which side of the curve
    /// is positive.
    Sine1 {
        #[serde(default)]
        inverted: bool,
    },
    /// Three attributes on `[0,10]`, the third is irrelevant.
    Sea { threshold: f64 },
}

impl Generator {
    pub fn n_features(&self) -> usize {
        match self {
            Generator::Sine1 { .. } => 2,
            Generator::Sea { .. } => 3,
        }
    }

    /// Upper bound of every attribute's range (lower bound is 0).
    fn range(&self) -> f64 {
        match self {
            Generator::Sine1 { .. } => 1.0,
            Generator::Sea { .. } => 10.0,
        }
    }

    /// The value of the skew-predicate coordinate splitting its range in half:
    /// `x < 0.5` for SINE1, `x1 < 5` for SEA. Both use the first attribute.
    fn skew_split(&self) -> f64 {
        self.range() / 2.0
    }

    pub fn label(&self, features: &[f64]) -> Label {
        match *self {
            Generator::Sine1 { inverted } => {
                let l = sine1_label(features[0], features[1]);
                if inverted {
                    l.other()
                } else {
                    l
                }
            }
            Generator::Sea { threshold } => sea_label(features[0], features[1], threshold),
        }
    }
}

/// One stationary concept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConceptSpec {
    pub generator: Generator,
    /// P(y = +1).
    pub positive_prior: f64,
    /// Probability that a negative example satisfies the generator's skew
    /// predicate (`x < 0.5` for SINE1, `x1 < 5` for SEA). `None` leaves
    /// negatives uniform over their region.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative_skew: Option<f64>,
}

impl ConceptSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.positive_prior > 0.0 && self.positive_prior < 1.0) {
            return Err(Error::Config(format!(
                "positive prior {} outside (0,1)",
                self.positive_prior
            )));
        }
        if let Generator::Sea { threshold } = self.generator {
            if !(threshold > 0.0 && threshold < 20.0) {
                return Err(Error::Config(format!(
                    "SEA threshold {threshold} outside the reachable range (0,20)"
                )));
            }
        }
        if let Some(p) = self.negative_skew {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("skew probability {p} outside [0,1]")));
            }
        }
        Ok(())
    }

    /// Label-first sampling: draw y from the prior, then rejection-sample
    /// features until the label rule (and skew side, for negatives) holds.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Vec<f64>, Label)> {
        let label = if rng.random::<f64>() < self.positive_prior {
            Label::Pos
        } else {
            Label::Neg
        };
        let range = self.generator.range();
        let n = self.generator.n_features();
        // Restricts the first coordinate to one half of its range.
        let first_side = match (label, self.negative_skew) {
            (Label::Neg, Some(p)) => {
                let split = self.generator.skew_split();
                if rng.random::<f64>() < p {
                    Some((0.0, split))
                } else {
                    Some((split, range))
                }
            }
            _ => None,
        };
        let mut features = vec![0.0; n];
        for _ in 0..MAX_ATTEMPTS {
            for (i, f) in features.iter_mut().enumerate() {
                *f = match (i, first_side) {
                    (0, Some((lo, hi))) => lo + (hi - lo) * rng.random::<f64>(),
                    _ => range * rng.random::<f64>(),
                };
            }
            if self.generator.label(&features) == label {
                return Ok((features, label));
            }
        }
        Err(Error::Infeasible {
            attempts: MAX_ATTEMPTS,
        })
    }
}

/// Old and new concept plus the timing of the switch between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSchedule {
    pub old: ConceptSpec,
    pub new: ConceptSpec,
    pub drift_start: u64,
    /// 0 for abrupt drift.
    pub drift_duration: u64,
    pub total_steps: u64,
}

impl DriftSchedule {
    pub fn validate(&self) -> Result<()> {
        self.old.validate()?;
        self.new.validate()?;
        if self.old.generator.n_features() != self.new.generator.n_features() {
            return Err(Error::Config(
                "old and new concepts have different feature counts".into(),
            ));
        }
        if self.drift_start < 1 {
            return Err(Error::Config("drift_start must be >= 1".into()));
        }
        if self.drift_start + self.drift_duration > self.total_steps + 1 {
            return Err(Error::Config(format!(
                "drift_start + drift_duration = {} exceeds total_steps + 1 = {}",
                self.drift_start + self.drift_duration,
                self.total_steps + 1
            )));
        }
        Ok(())
    }

    /// First step at which only the new concept is sampled.
    pub fn drift_end(&self) -> u64 {
        self.drift_start + self.drift_duration
    }

    pub fn n_features(&self) -> usize {
        self.old.generator.n_features()
    }
}

/// Probability of drawing from the new concept at step `t`.
pub fn mixture_weight(t: u64, schedule: &DriftSchedule) -> f64 {
    if t < schedule.drift_start {
        0.0
    } else if t >= schedule.drift_end() {
        1.0
    } else {
        (t - schedule.drift_start) as f64 / schedule.drift_duration as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConceptId {
    Old,
    New,
}

/// Seeded generator state for one stream.
#[derive(Debug, Clone)]
pub struct Stream {
    schedule: DriftSchedule,
    rng: ChaCha8Rng,
    t: u64,
}

impl Stream {
    pub fn new(schedule: DriftSchedule, seed: u64) -> Result<Self> {
        schedule.validate()?;
        Ok(Stream {
            schedule,
            rng: ChaCha8Rng::seed_from_u64(seed),
            t: 0,
        })
    }

    pub fn schedule(&self) -> &DriftSchedule {
        &self.schedule
    }

    /// Step of the most recently emitted example (0 before the first).
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn next_example(&mut self) -> Result<Example<f64>> {
        self.next_tagged().map(|(ex, _)| ex)
    }

    /// Like [`Stream::next_example`], also reporting the concept drawn from.
    pub fn next_tagged(&mut self) -> Result<(Example<f64>, ConceptId)> {
        if self.t >= self.schedule.total_steps {
            return Err(Error::StreamExhausted(self.schedule.total_steps));
        }
        let t = self.t + 1;
        let w = mixture_weight(t, &self.schedule);
        let (id, concept) = if self.rng.random::<f64>() < w {
            (ConceptId::New, self.schedule.new)
        } else {
            (ConceptId::Old, self.schedule.old)
        };
        let (features, label) = concept.sample(&mut self.rng)?;
        self.t = t;
        Ok((Example { t, features, label }, id))
    }
}

impl Iterator for Stream {
    type Item = Result<Example<f64>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.t >= self.schedule.total_steps {
            None
        } else {
            Some(self.next_example())
        }
    }
}
