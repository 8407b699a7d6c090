use std::cmp::Ordering;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Minimum number of pairs accepted by [`wilcoxon_signed_rank`].
pub const MIN_PAIRS: usize = 6;
/// Above this many non-zero differences the normal approximation is used.
pub const EXACT_LIMIT: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedRank {
    /// `min(W+, W-)`.
    pub statistic: f64,
    /// Rank sum of the positive differences `a - b`.
    pub w_plus: f64,
    /// Number of non-zero differences that were ranked.
    pub n: usize,
    /// Two-sided p-value.
    pub p_value: f64,
    pub significant: bool,
}

impl SignedRank {
    /// True when `a` tends to exceed `b`.
    pub fn a_greater(&self) -> bool {
        let n = self.n as f64;
        self.w_plus > n * (n + 1.0) / 4.0
    }
}

/// Mid-ranks of `values` (1-based), plus the tie group sizes.
fn mid_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let mid = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = mid;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// Exact two-sided p-value of `W+` under the null, by enumerating the
/// distribution of signed-rank sums. Ranks are doubled so mid-ranks stay
/// integral.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut dist = vec![0.0f64; max + 1];
    dist[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            let p = dist[s] * 0.5;
            dist[s] = p;
            dist[s + r] += p;
        }
        reach += r;
    }
    let w = (2.0 * w_plus).round() as usize;
    let lower: f64 = dist[..=w].iter().sum();
    let upper: f64 = dist[w..].iter().sum();
    (2.0 * lower.min(upper)).min(1.0)
}

fn normal_p(n: usize, ties: &[usize], w_plus: f64) -> f64 {
    let n = n as f64;
    let mean = n * (n + 1.0) / 4.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    if var <= 0.0 {
        return 1.0;
    }
    let diff = (w_plus - mean).abs();
    let z = (diff - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::standard();
    (2.0 * (1.0 - normal.cdf(z))).min(1.0)
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped and tied magnitudes get mid-ranks. The
/// exact null distribution is used for up to [`EXACT_LIMIT`] non-zero
/// differences, the tie-corrected normal approximation above that.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], alpha: f64) -> Result<SignedRank> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < MIN_PAIRS {
        return Err(Error::TooFewPairs {
            min: MIN_PAIRS,
            got: a.len(),
        });
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(SignedRank {
            statistic: 0.0,
            w_plus: 0.0,
            n: 0,
            p_value: 1.0,
            significant: false,
        });
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = mid_ranks(&magnitudes);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total = n as f64 * (n as f64 + 1.0) / 2.0;
    let p_value = if n <= EXACT_LIMIT {
        exact_p(&ranks, w_plus)
    } else {
        normal_p(n, &ties, w_plus)
    };
    Ok(SignedRank {
        statistic: w_plus.min(total - w_plus),
        w_plus,
        n,
        p_value,
        significant: p_value < alpha,
    })
}
