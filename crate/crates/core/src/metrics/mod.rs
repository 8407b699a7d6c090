//! Imbalance-aware performance measures computed from a two-class
//! confusion matrix, their fading-factor prequential variants, windowed
//! prequential AUC and the paired signed-rank test.
//!
//! Every ratio with a zero denominator evaluates to 0.

mod auc;
mod wilcoxon;

use crate::stream::Label;
use crate::Scalar;

pub use auc::{prequential_auc, ScoreWindow, DEFAULT_AUC_WINDOW};
pub use wilcoxon::{wilcoxon_signed_rank, SignedRank, EXACT_LIMIT, MIN_PAIRS};

fn ratio<T: Scalar>(num: T, den: T) -> T {
    if den > T::zero() {
        num / den
    } else {
        T::zero()
    }
}

/// Confusion matrix cells. Cells are real-valued so decayed counts fit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConfusionCounts<T> {
    pub tp: T,
    pub fn_: T,
    pub fp: T,
    pub tn: T,
}

impl<T: Scalar> ConfusionCounts<T> {
    pub fn new(tp: T, fn_: T, fp: T, tn: T) -> Self {
        ConfusionCounts { tp, fn_, fp, tn }
    }

    fn cell_mut(&mut self, truth: Label, predicted: Label) -> &mut T {
        match (truth, predicted) {
            (Label::Pos, Label::Pos) => &mut self.tp,
            (Label::Pos, Label::Neg) => &mut self.fn_,
            (Label::Neg, Label::Pos) => &mut self.fp,
            (Label::Neg, Label::Neg) => &mut self.tn,
        }
    }

    /// Adds one unit to the cell for `(truth, predicted)`.
    pub fn update(&mut self, truth: Label, predicted: Label) {
        *self.cell_mut(truth, predicted) = *self.cell_mut(truth, predicted) + T::one();
    }

    pub fn scale(&mut self, factor: T) {
        self.tp = self.tp * factor;
        self.fn_ = self.fn_ * factor;
        self.fp = self.fp * factor;
        self.tn = self.tn * factor;
    }

    pub fn total(&self) -> T {
        self.tp + self.fn_ + self.fp + self.tn
    }

    /// TP / (TP + FN).
    pub fn recall(&self) -> T {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// TP / (TP + FP).
    pub fn precision(&self) -> T {
        ratio(self.tp, self.tp + self.fp)
    }

    /// `(1 + b²) R P / (b² P + R)`.
    pub fn f_measure(&self, beta: T) -> T {
        let (r, p) = (self.recall(), self.precision());
        let b2 = beta * beta;
        ratio((T::one() + b2) * r * p, b2 * p + r)
    }

    /// `sqrt(TPR * TNR)`.
    pub fn g_mean(&self) -> T {
        let (rp, rn) = self.per_class_recall();
        (rp * rn).sqrt()
    }

    /// `(TP/(TP+FN), TN/(TN+FP))`.
    pub fn per_class_recall(&self) -> (T, T) {
        (
            ratio(self.tp, self.tp + self.fn_),
            ratio(self.tn, self.tn + self.fp),
        )
    }

    /// Recall of one class: TPR for `Pos`, TNR for `Neg`.
    pub fn class_recall(&self, class: Label) -> T {
        let (rp, rn) = self.per_class_recall();
        match class {
            Label::Pos => rp,
            Label::Neg => rn,
        }
    }
}

/// Returns a copy of `c` with the `(truth, predicted)` cell incremented.
pub fn update_confusion<T: Scalar>(
    c: ConfusionCounts<T>,
    truth: Label,
    predicted: Label,
) -> ConfusionCounts<T> {
    let mut c = c;
    c.update(truth, predicted);
    c
}

/// Fading-factor confusion counts: every update multiplies all cells by
/// `eta` before adding one unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayedConfusion<T> {
    pub counts: ConfusionCounts<T>,
    pub eta: T,
}

impl<T: Scalar> DecayedConfusion<T> {
    pub fn new(eta: T) -> Self {
        DecayedConfusion {
            counts: ConfusionCounts::default(),
            eta,
        }
    }

    pub fn update(&mut self, truth: Label, predicted: Label) {
        self.counts.scale(self.eta);
        self.counts.update(truth, predicted);
    }

    pub fn reset(&mut self) {
        self.counts = ConfusionCounts::default();
    }
}
