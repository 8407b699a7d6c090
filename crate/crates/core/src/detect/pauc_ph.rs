use serde::{Deserialize, Serialize};

use super::Verdict;
use crate::metrics::{ScoreWindow, DEFAULT_AUC_WINDOW};
use crate::stream::Label;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PaucPhConfig {
    pub window: usize,
    /// Magnitude of change tolerated per step.
    pub delta: f64,
    /// Alarm threshold on `m_t - M_t`.
    pub lambda: f64,
    /// Window fill required before the test starts.
    pub min_instances: usize,
}

impl Default for PaucPhConfig {
    fn default() -> Self {
        PaucPhConfig {
            window: DEFAULT_AUC_WINDOW,
            delta: 0.005,
            lambda: 50.0,
            min_instances: 100,
        }
    }
}

/// Page-Hinkley test for decreases of the prequential AUC.
#[derive(Debug, Clone, PartialEq)]
pub struct PaucPh<T> {
    cfg: PaucPhConfig,
    window: ScoreWindow<T>,
    n: u64,
    mean: T,
    m: T,
    m_min: T,
}

impl<T: Scalar> PaucPh<T> {
    pub fn new(cfg: PaucPhConfig) -> Self {
        PaucPh {
            cfg,
            window: ScoreWindow::new(cfg.window),
            n: 0,
            mean: T::zero(),
            m: T::zero(),
            m_min: T::zero(),
        }
    }

    pub fn config(&self) -> &PaucPhConfig {
        &self.cfg
    }

    /// `m_t - M_t`, never negative.
    pub fn statistic(&self) -> T {
        self.m - self.m_min
    }

    pub fn auc_mean(&self) -> T {
        self.mean
    }

    pub fn reset(&mut self) {
        *self = PaucPh::new(self.cfg);
    }

    pub fn step(&mut self, score: T, truth: Label) -> Verdict {
        self.window.push(score, truth);
        if self.window.len() < self.cfg.min_instances {
            return Verdict::Normal;
        }
        let a = self.window.auc();
        self.observe(a)
    }

    /// Page-Hinkley update with an already computed AUC value.
    pub fn observe(&mut self, auc: T) -> Verdict {
        self.n += 1;
        self.mean = self.mean + (auc - self.mean) / T::of(self.n as f64);
        self.m = self.m + self.mean - auc - T::of(self.cfg.delta);
        if self.m < self.m_min {
            self.m_min = self.m;
        }
        let stat = self.statistic();
        let lambda = T::of(self.cfg.lambda);
        if stat > lambda {
            self.reset();
            Verdict::Drift
        } else if stat > lambda / T::of(2.0) {
            Verdict::Warning
        } else {
            Verdict::Normal
        }
    }
}
