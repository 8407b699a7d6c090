use std::cmp::Ordering;
use std::collections::VecDeque;

use crate::stream::Label;
use crate::Scalar;

pub const DEFAULT_AUC_WINDOW: usize = 500;

/// The most recent `(score, label)` pairs, oldest evicted first.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreWindow<T> {
    capacity: usize,
    entries: VecDeque<(T, Label)>,
}

impl<T: Scalar> ScoreWindow<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "window capacity must be positive");
        ScoreWindow {
            capacity,
            entries: VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, score: T, label: Label) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back((score, label));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = &(T, Label)> {
        self.entries.iter()
    }

    pub fn auc(&self) -> T {
        prequential_auc(self)
    }
}

/// Mann-Whitney AUC over the window: the fraction of (positive, negative)
/// pairs ranked correctly, ties counting one half. 0.5 when either class
/// is absent.
pub fn prequential_auc<T: Scalar>(w: &ScoreWindow<T>) -> T {
    let mut sorted: Vec<(T, Label)> = w.entries.iter().copied().collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));

    let n_pos = sorted.iter().filter(|(_, l)| *l == Label::Pos).count();
    let n_neg = sorted.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return T::of(0.5);
    }

    // Sum of mid-ranks (1-based) of positives.
    let mut rank_sum = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            j += 1;
        }
        let mid = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = sorted[i..j]
            .iter()
            .filter(|(_, l)| *l == Label::Pos)
            .count();
        rank_sum += mid * pos_in_group as f64;
        i = j;
    }
    let (np, nn) = (n_pos as f64, n_neg as f64);
    T::of((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn window(pos: &[f64], neg: &[f64]) -> ScoreWindow<f64> {
        let mut w = ScoreWindow::new(1000);
        for &s in pos {
            w.push(s, Label::Pos);
        }
        for &s in neg {
            w.push(s, Label::Neg);
        }
        w
    }

    /// Direct enumeration of all (positive, negative) pairs.
    fn pairwise(w: &ScoreWindow<f64>) -> f64 {
        let pos: Vec<f64> = w
            .iter()
            .filter(|e| e.1 == Label::Pos)
            .map(|e| e.0)
            .collect();
        let neg: Vec<f64> = w
            .iter()
            .filter(|e| e.1 == Label::Neg)
            .map(|e| e.0)
            .collect();
        if pos.is_empty() || neg.is_empty() {
            return 0.5;
        }
        let mut wins = 0.0;
        for p in &pos {
            for n in &neg {
                wins += if p > n {
                    1.0
                } else if p == n {
                    0.5
                } else {
                    0.0
                };
            }
        }
        wins / (pos.len() * neg.len()) as f64
    }

    #[test]
    fn examples() {
        assert_eq!(prequential_auc(&window(&[0.9], &[0.1])), 1.0);
        assert_eq!(prequential_auc(&window(&[0.5], &[0.5])), 0.5);
        assert_eq!(prequential_auc(&window(&[0.8, 0.4], &[0.6, 0.2])), 0.75);
        assert_eq!(prequential_auc(&window(&[0.8, 0.4], &[])), 0.5);
    }

    #[test]
    fn fifo_eviction() {
        let mut w = ScoreWindow::new(2);
        w.push(0.1, Label::Pos);
        w.push(0.9, Label::Pos);
        w.push(0.5, Label::Neg);
        assert_eq!(w.len(), 2);
        // Entries left: (0.9,+), (0.5,-) -> perfect ranking.
        assert_eq!(w.auc(), 1.0);
    }

    fn entries() -> impl Strategy<Value = Vec<(u8, bool)>> {
        // Coarse scores so ties are frequent.
        prop::collection::vec((0u8..20, any::<bool>()), 1..120)
    }

    fn build(e: &[(u8, bool)], f: impl Fn(f64) -> f64) -> ScoreWindow<f64> {
        let mut w = ScoreWindow::new(1000);
        for &(s, p) in e {
            w.push(f(s as f64 / 20.0), if p { Label::Pos } else { Label::Neg });
        }
        w
    }

    proptest! {
        #[test]
        fn matches_pair_enumeration(e in entries()) {
            let w = build(&e, |s| s);
            prop_assert!((prequential_auc(&w) - pairwise(&w)).abs() < 1e-12);
        }

        #[test]
        fn invariant_under_increasing_transform(e in entries()) {
            let a = prequential_auc(&build(&e, |s| s));
            let b = prequential_auc(&build(&e, |s| (3.0 * s).exp() - 7.0));
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn duplicating_negatives_is_neutral(e in entries()) {
            let w = build(&e, |s| s);
            let mut dup = w.clone();
            for &(s, l) in w.iter() {
                if l == Label::Neg {
                    dup.push(s, l);
                }
            }
            prop_assert!((prequential_auc(&w) - prequential_auc(&dup)).abs() < 1e-12);
        }
    }
}
