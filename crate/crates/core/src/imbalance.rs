//! Class imbalance detection: time-decayed class sizes and the resulting
//! minority/majority designation.
//!
//! After each label `y`, every class size moves toward the indicator of
//! `y`: `w_k <- theta * w_k + (1 - theta) * [y == c_k]`. The sizes start
//! uniform, so they always sum to one.

use crate::error::Result;
use crate::stream::Label;
use crate::Scalar;

pub const DEFAULT_THETA: f64 = 0.9;
/// `w_max / w_min` above which a minority and majority class are declared.
pub const DEFAULT_DESIGNATION_RATIO: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImbalanceRatio<T> {
    Bounded(T),
    /// The smallest class size is exactly zero.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImbalanceStatus<T> {
    pub minority: Option<Label>,
    pub majority: Option<Label>,
    pub ratio: ImbalanceRatio<T>,
}

impl<T> ImbalanceStatus<T> {
    pub fn is_balanced(&self) -> bool {
        self.minority.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassSizeTracker<T> {
    /// Indexed by [`Label::index`].
    w: [T; 2],
    theta: T,
    designation_ratio: T,
    updates: u64,
}

impl<T: Scalar> Default for ClassSizeTracker<T> {
    fn default() -> Self {
        Self::new(T::of(DEFAULT_THETA))
    }
}

impl<T: Scalar> ClassSizeTracker<T> {
    pub fn new(theta: T) -> Self {
        let half = T::of(0.5);
        ClassSizeTracker {
            w: [half, half],
            theta,
            designation_ratio: T::of(DEFAULT_DESIGNATION_RATIO),
            updates: 0,
        }
    }

    pub fn with_designation_ratio(mut self, ratio: T) -> Self {
        self.designation_ratio = ratio;
        self
    }

    /// Starts from explicit sizes instead of the uniform prior.
    pub fn with_sizes(mut self, w_pos: T, w_neg: T) -> Self {
        self.w = [w_pos, w_neg];
        self
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn size(&self, class: Label) -> T {
        self.w[class.index()]
    }

    pub fn update(&mut self, label: Label) {
        let keep = self.theta;
        let gain = T::one() - keep;
        for class in Label::BOTH {
            let hit = if class == label { T::one() } else { T::zero() };
            self.w[class.index()] = keep * self.w[class.index()] + gain * hit;
        }
        self.updates += 1;
    }

    /// Update from a raw `+1`/`-1` class identifier.
    pub fn update_class(&mut self, class: i64) -> Result<()> {
        let label = Label::from_sign(class)?;
        self.update(label);
        Ok(())
    }

    pub fn w_min(&self) -> T {
        self.w[0].min(self.w[1])
    }

    pub fn w_max(&self) -> T {
        self.w[0].max(self.w[1])
    }

    pub fn status(&self) -> ImbalanceStatus<T> {
        let (min, max) = (self.w_min(), self.w_max());
        let ratio = if min > T::zero() {
            ImbalanceRatio::Bounded(max / min)
        } else {
            ImbalanceRatio::Unbounded
        };
        let designated = match ratio {
            ImbalanceRatio::Bounded(r) => r > self.designation_ratio,
            ImbalanceRatio::Unbounded => true,
        };
        if designated {
            let minority = if self.w[0] < self.w[1] {
                Label::Pos
            } else {
                Label::Neg
            };
            ImbalanceStatus {
                minority: Some(minority),
                majority: Some(minority.other()),
                ratio,
            }
        } else {
            ImbalanceStatus {
                minority: None,
                majority: None,
                ratio,
            }
        }
    }
}

/// Functional form of [`ClassSizeTracker::update`].
pub fn update_class_sizes<T: Scalar>(
    tracker: ClassSizeTracker<T>,
    label: Label,
) -> ClassSizeTracker<T> {
    let mut tracker = tracker;
    tracker.update(label);
    tracker
}

pub fn imbalance_status<T: Scalar>(tracker: &ClassSizeTracker<T>) -> ImbalanceStatus<T> {
    tracker.status()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_update() {
        let t = update_class_sizes(ClassSizeTracker::<f64>::new(0.9), Label::Pos);
        assert!((t.size(Label::Pos) - 0.55).abs() < 1e-15);
        assert!((t.size(Label::Neg) - 0.45).abs() < 1e-15);
        assert_eq!(t.updates(), 1);
    }

    #[test]
    fn converges_on_constant_labels() {
        let mut t = ClassSizeTracker::<f64>::new(0.9).with_sizes(0.0, 1.0);
        for _ in 0..200 {
            t.update(Label::Pos);
        }
        assert!((t.size(Label::Pos) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn alternating_fixed_points() {
        // 2-cycle fixed points: w = theta^2 w + (1 - theta) after the hit,
        // giving 1/(1+theta) and theta/(1+theta).
        let theta = 0.9f64;
        let mut t = ClassSizeTracker::<f64>::new(theta);
        for i in 0..1000 {
            t.update(if i % 2 == 0 { Label::Pos } else { Label::Neg });
        }
        let hi = 1.0 / (1.0 + theta);
        let lo = theta / (1.0 + theta);
        assert!((t.size(Label::Neg) - hi).abs() < 1e-12);
        assert!((t.size(Label::Pos) - lo).abs() < 1e-12);
        for c in Label::BOTH {
            assert!((t.size(c) - 0.5).abs() <= (1.0 - theta) / 2.0);
        }
    }

    #[test]
    fn unknown_class_rejected() {
        let mut t = ClassSizeTracker::<f64>::default();
        assert!(matches!(t.update_class(3), Err(Error::UnknownClass(3))));
        t.update_class(-1).unwrap();
        assert!(t.size(Label::Neg) > 0.5);
    }

    #[test]
    fn status_examples() {
        let balanced = ClassSizeTracker::<f64>::new(0.9)
            .with_sizes(0.5, 0.5)
            .status();
        assert!(balanced.is_balanced());
        assert_eq!(balanced.ratio, ImbalanceRatio::Bounded(1.0));

        let skewed = ClassSizeTracker::<f64>::new(0.9)
            .with_sizes(0.1, 0.9)
            .status();
        assert_eq!(skewed.minority, Some(Label::Pos));
        assert_eq!(skewed.majority, Some(Label::Neg));
        match skewed.ratio {
            ImbalanceRatio::Bounded(r) => assert!((r - 9.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }

        let mild = ClassSizeTracker::<f64>::new(0.9)
            .with_sizes(0.45, 0.55)
            .with_designation_ratio(1.5)
            .status();
        assert!(mild.is_balanced());

        let empty = ClassSizeTracker::<f64>::new(0.9)
            .with_sizes(0.0, 1.0)
            .status();
        assert_eq!(empty.ratio, ImbalanceRatio::Unbounded);
        assert_eq!(empty.minority, Some(Label::Pos));
    }

    #[test]
    fn theta_extremes() {
        let mut zero = ClassSizeTracker::<f64>::new(0.0);
        zero.update(Label::Neg);
        assert_eq!((zero.size(Label::Pos), zero.size(Label::Neg)), (0.0, 1.0));
        let mut frozen = ClassSizeTracker::<f64>::new(1.0).with_sizes(0.3, 0.7);
        for _ in 0..50 {
            frozen.update(Label::Pos);
        }
        assert_eq!(frozen.size(Label::Pos), 0.3);
    }

    #[test]
    fn tracks_iid_prior() {
        // Stationary variance of the decayed estimator:
        // p(1-p)(1-theta)/(1+theta). Average over many late snapshots.
        let (p, theta) = (0.2f64, 0.9f64);
        let sd = (p * (1.0 - p) * (1.0 - theta) / (1.0 + theta)).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut t = ClassSizeTracker::<f64>::new(theta);
        for _ in 0..100 {
            t.update(if rng.random::<f64>() < p {
                Label::Pos
            } else {
                Label::Neg
            });
        }
        let mut within = 0;
        let n = 10_000;
        for _ in 0..n {
            t.update(if rng.random::<f64>() < p {
                Label::Pos
            } else {
                Label::Neg
            });
            if (t.size(Label::Pos) - p).abs() <= 3.0 * sd {
                within += 1;
            }
        }
        assert!(within as f64 / n as f64 > 0.97, "{within}");
    }

    proptest! {
        #[test]
        fn sizes_stay_normalized(labels in prop::collection::vec(any::<bool>(), 0..500), theta in 0.0..1.0f64) {
            let mut t = ClassSizeTracker::<f64>::new(theta);
            for l in labels {
                t.update(if l { Label::Pos } else { Label::Neg });
                let sum = t.size(Label::Pos) + t.size(Label::Neg);
                prop_assert!((sum - 1.0).abs() < 1e-9);
                for c in Label::BOTH {
                    prop_assert!((0.0..=1.0).contains(&t.size(c)));
                }
            }
        }
    }
}
