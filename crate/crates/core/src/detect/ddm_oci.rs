use serde::{Deserialize, Serialize};

use super::Verdict;
use crate::stream::Label;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DdmOciConfig {
    /// Fading factor of the monitored recall.
    pub eta: f64,
    /// Minority examples required before testing.
    pub min_samples: u64,
    pub warn_sigmas: f64,
    pub drift_sigmas: f64,
}

impl Default for DdmOciConfig {
    fn default() -> Self {
        DdmOciConfig {
            eta: 0.99,
            min_samples: 30,
            warn_sigmas: 2.0,
            drift_sigmas: 3.0,
        }
    }
}

/// Decayed recall of one class with its best observed level.
#[derive(Debug, Clone, PartialEq)]
struct ClassRecall<T> {
    hits: T,
    weight: T,
    n: u64,
    best_recall: T,
    best_sd: T,
    best_level: T,
}

impl<T: Scalar> ClassRecall<T> {
    fn new() -> Self {
        ClassRecall {
            hits: T::zero(),
            weight: T::zero(),
            n: 0,
            best_recall: T::zero(),
            best_sd: T::zero(),
            best_level: T::neg_infinity(),
        }
    }

    fn recall(&self) -> T {
        if self.weight > T::zero() {
            self.hits / self.weight
        } else {
            T::zero()
        }
    }

    fn dispersion(&self) -> T {
        if self.weight <= T::zero() {
            return T::zero();
        }
        let smoothed = (self.hits + T::one()) / (self.weight + T::of(2.0));
        (smoothed * (T::one() - smoothed) / self.weight).sqrt()
    }
}

/// Monitors the time-decayed recall of the minority class and reports a
/// drift when it falls `drift_sigmas` dispersions below its best level.
///
/// The recall is the normalised decayed average `S/N` with
/// `S <- eta S + [correct]` and `N <- eta N + 1`; `N` is the effective
/// sample count and the dispersion is `sqrt(R'(1-R')/N)` with the
/// add-one smoothed `R' = (S+1)/(N+2)`.
///
/// Both class recalls are maintained, and the test runs on whichever class
/// is the minority when its example arrives. When the minority designation
/// flips, the new minority is judged against the level it reached as the
/// majority, which is what makes a prior swap visible.
#[derive(Debug, Clone, PartialEq)]
pub struct DdmOci<T> {
    cfg: DdmOciConfig,
    classes: [ClassRecall<T>; 2],
    minority: Label,
}

impl<T: Scalar> DdmOci<T> {
    pub fn new(cfg: DdmOciConfig) -> Self {
        DdmOci {
            cfg,
            classes: [ClassRecall::new(), ClassRecall::new()],
            minority: Label::Pos,
        }
    }

    pub fn config(&self) -> &DdmOciConfig {
        &self.cfg
    }

    /// The class tested most recently.
    pub fn monitored(&self) -> Label {
        self.minority
    }

    /// Decayed recall of the monitored class, 0 before any of its examples.
    pub fn recall(&self) -> T {
        self.class(self.minority).recall()
    }

    pub fn recall_of(&self, label: Label) -> T {
        self.class(label).recall()
    }

    pub fn samples(&self) -> u64 {
        self.class(self.minority).n
    }

    pub fn dispersion(&self) -> T {
        self.class(self.minority).dispersion()
    }

    /// Best `(recall, dispersion)` pair of the monitored class.
    pub fn best(&self) -> (T, T) {
        let c = self.class(self.minority);
        (c.best_recall, c.best_sd)
    }

    fn class(&self, label: Label) -> &ClassRecall<T> {
        &self.classes[label.index()]
    }

    /// Clears all statistics; the monitored class is kept.
    pub fn reset(&mut self) {
        let minority = self.minority;
        *self = DdmOci::new(self.cfg);
        self.minority = minority;
    }

    pub fn step(&mut self, truth: Label, predicted: Label, minority: Label) -> Verdict {
        let eta = T::of(self.cfg.eta);
        let c = &mut self.classes[truth.index()];
        let hit = if predicted == truth {
            T::one()
        } else {
            T::zero()
        };
        c.hits = eta * c.hits + hit;
        c.weight = eta * c.weight + T::one();
        c.n += 1;
        if c.n < self.cfg.min_samples {
            return Verdict::Normal;
        }

        let r = c.recall();
        let s = c.dispersion();
        if r - s > c.best_level {
            c.best_level = r - s;
            c.best_recall = r;
            c.best_sd = s;
        }
        if truth != minority {
            return Verdict::Normal;
        }
        self.minority = minority;
        if r < c.best_recall - T::of(self.cfg.drift_sigmas) * c.best_sd {
            self.reset();
            Verdict::Drift
        } else if r < c.best_recall - T::of(self.cfg.warn_sigmas) * c.best_sd {
            Verdict::Warning
        } else {
            Verdict::Normal
        }
    }
}
