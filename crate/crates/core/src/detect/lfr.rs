use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Verdict;
use crate::stream::Label;
use crate::Scalar;

/// How the null bounds turn a significance level into widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// At each count, a stationary rate lies outside the bound with
    /// probability equal to the level.
    #[default]
    Marginal,
    /// A detector re-armed at every alarm fires with probability equal to
    /// the level per update.
    FirstPassage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LfrConfig {
    pub eta: f64,
    /// Significance level of the warning bounds, per step.
    pub warn_level: f64,
    /// Significance level of the drift bounds, per step.
    pub detect_level: f64,
    pub bounds: BoundKind,
}

impl Default for LfrConfig {
    fn default() -> Self {
        LfrConfig {
            eta: 0.99,
            warn_level: 0.01,
            detect_level: 0.001,
            bounds: BoundKind::Marginal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rate {
    Tpr,
    Tnr,
    Ppv,
    Npv,
}

impl Rate {
    pub const ALL: [Rate; 4] = [Rate::Tpr, Rate::Tnr, Rate::Ppv, Rate::Npv];

    fn index(self) -> usize {
        self as usize
    }
}

const TABLE_SEED: u64 = 0x4c46_5231;
const TABLE_PATHS: usize = 20_000;
const TABLE_MAX_N: u64 = 600;
/// Resolution of the `p` grid.
const P_UNITS: u16 = 4000;

/// Grid of `p` values in units of `1 / P_UNITS` up to one half; denser near
/// zero where the bound shape changes fastest.
const P_HALF_GRID: [u16; 30] = [
    0, 4, 8, 12, 20, 30, 40, 60, 80, 120, 160, 200, 300, 400, 500, 600, 700, 800, 900, 1000, 1100,
    1200, 1300, 1400, 1500, 1600, 1700, 1800, 1900, 2000,
];

/// The full grid, symmetric about one half.
fn p_grid() -> Vec<u16> {
    let mut grid: Vec<u16> = P_HALF_GRID.to_vec();
    grid.extend(P_HALF_GRID.iter().rev().skip(1).map(|&k| P_UNITS - k));
    grid
}

fn binomial_sd(p: f64) -> f64 {
    (p * (1.0 - p)).max(0.0).sqrt()
}

/// Null alarm bounds for one decayed rate.
///
/// The tested statistic is the deviation `D_n = R_n - P_n` of the
/// normalised decayed average `R_n = sum eta^(n-i) X_i / sum eta^(n-i)`
/// from the plain average `P_n` of the same `X_i ~ Bernoulli(p)`. The table
/// holds half-widths `h` estimated from simulated paths. For
/// [`BoundKind::Marginal`], `|D_n| > h` with probability equal to the level
/// at every count. For [`BoundKind::FirstPassage`], a path that has not yet
/// alarmed leaves `[-h, h]` with probability equal to the level per update;
/// each path is removed at its first detect crossing.
/// Widths are constant on each interval of the count grid and stored
/// relative to `sqrt(p(1-p))`, which makes them nearly flat in `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTable {
    kind: BoundKind,
    eta: f64,
    warn_level: f64,
    detect_level: f64,
    /// Start of each count interval.
    n_grid: Vec<u64>,
    /// Grid of `p` values.
    p_grid: Vec<f64>,
    /// Indexed `[p][interval]`: relative (warn, detect) half-widths.
    widths: Vec<Vec<[f64; 2]>>,
}

fn n_grid() -> Vec<u64> {
    let mut grid: Vec<u64> = (1..=40).collect();
    let mut n = 40.0f64;
    while (n as u64) < TABLE_MAX_N {
        n *= 1.15;
        grid.push((n.round() as u64).min(TABLE_MAX_N));
    }
    grid.dedup();
    grid
}

/// Smallest value exceeded by at most `fraction` of `values`.
fn upper_threshold(values: &mut [f64], fraction: f64) -> f64 {
    let m = values.len();
    if m == 0 {
        return f64::INFINITY;
    }
    let exceed = ((fraction * m as f64).floor() as usize).min(m - 1);
    *values
        .select_nth_unstable_by(m - 1 - exceed, f64::total_cmp)
        .1
}

impl BoundTable {
    /// Simulates the table. Levels are per update of a single rate.
    /// Every `p` reuses the same uniforms, bucketed to the `p` resolution.
    pub fn generate(kind: BoundKind, eta: f64, warn_level: f64, detect_level: f64) -> Self {
        let first_passage = kind == BoundKind::FirstPassage;
        let grid = n_grid();
        let steps = TABLE_MAX_N as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(TABLE_SEED);
        // buckets[n * paths + i] < k  <=>  X = 1 at p = k / P_UNITS.
        let buckets: Vec<u16> = (0..steps * TABLE_PATHS)
            .map(|_| rng.random_range(0..P_UNITS))
            .collect();
        let template = |k: u16| -> Vec<[f64; 2]> {
            if k == 0 {
                return vec![[0.0, 0.0]; grid.len()];
            }
            let sd = binomial_sd(k as f64 / P_UNITS as f64);
            // Dense state of the paths that have not alarmed yet.
            let mut ids: Vec<u32> = (0..TABLE_PATHS as u32).collect();
            let mut s = vec![0.0f64; TABLE_PATHS];
            let mut hits = vec![0.0f64; TABLE_PATHS];
            let mut peak = vec![0.0f64; TABLE_PATHS];
            // Marginal tables pool every deviation seen in the interval.
            let mut pool: Vec<f64> = Vec::new();
            let mut w = 0.0f64;
            let mut out = Vec::with_capacity(grid.len());
            let mut n = 1u64;
            for (gi, &start) in grid.iter().enumerate() {
                debug_assert_eq!(start, n);
                let end = grid.get(gi + 1).copied().unwrap_or(TABLE_MAX_N + 1);
                let len = (end - start) as i32;
                peak.iter_mut().for_each(|p| *p = 0.0);
                pool.clear();
                while n < end {
                    w = eta * w + 1.0;
                    let (inv_w, inv_n) = (1.0 / w, 1.0 / n as f64);
                    let row = &buckets[(n as usize - 1) * TABLE_PATHS..n as usize * TABLE_PATHS];
                    for j in 0..ids.len() {
                        let x = (row[ids[j] as usize] < k) as u8 as f64;
                        s[j] = eta * s[j] + x;
                        hits[j] += x;
                        let d = (s[j] * inv_w - hits[j] * inv_n).abs();
                        peak[j] = peak[j].max(d);
                    }
                    if !first_passage {
                        pool.extend_from_slice(&peak);
                        peak.iter_mut().for_each(|p| *p = 0.0);
                    }
                    n += 1;
                }
                if !first_passage {
                    let h_warn = upper_threshold(&mut pool, warn_level);
                    let h_detect = upper_threshold(&mut pool, detect_level);
                    out.push([h_warn / sd, h_detect / sd]);
                    continue;
                }
                // The peak over the interval carries the level of all its counts.
                let f_warn = 1.0 - (1.0 - warn_level).powi(len);
                let f_detect = 1.0 - (1.0 - detect_level).powi(len);
                let mut sorted = peak.clone();
                let h_warn = upper_threshold(&mut sorted, f_warn);
                let h_detect = upper_threshold(&mut sorted, f_detect);
                out.push([h_warn / sd, h_detect / sd]);
                let mut kept = 0;
                for j in 0..ids.len() {
                    if peak[j] <= h_detect {
                        ids[kept] = ids[j];
                        s[kept] = s[j];
                        hits[kept] = hits[j];
                        kept += 1;
                    }
                }
                ids.truncate(kept);
                s.truncate(kept);
                hits.truncate(kept);
                peak.truncate(kept);
            }
            out
        };
        // D is antisymmetric under p -> 1 - p, so only half the grid is simulated.
        let mut widths: Vec<Vec<[f64; 2]>> = P_HALF_GRID.par_iter().map(|&k| template(k)).collect();
        // The endpoint has no spread; reuse its neighbour's relative width.
        widths[0] = widths[1].clone();
        let mirrored: Vec<_> = widths.iter().rev().skip(1).cloned().collect();
        widths.extend(mirrored);
        BoundTable {
            kind,
            eta,
            warn_level,
            detect_level,
            n_grid: grid,
            p_grid: p_grid()
                .into_iter()
                .map(|k| k as f64 / P_UNITS as f64)
                .collect(),
            widths,
        }
    }

    /// Process-wide cached table for the given parameters.
    pub fn shared(
        kind: BoundKind,
        eta: f64,
        warn_level: f64,
        detect_level: f64,
    ) -> Arc<BoundTable> {
        type Key = (BoundKind, [u64; 3]);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<BoundTable>>>> = OnceLock::new();
        let key = (
            kind,
            [eta.to_bits(), warn_level.to_bits(), detect_level.to_bits()],
        );
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry(key)
            .or_insert_with(|| Arc::new(BoundTable::generate(kind, eta, warn_level, detect_level)))
            .clone()
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn levels(&self) -> (f64, f64) {
        (self.warn_level, self.detect_level)
    }

    /// Width growth past the simulated counts. For large `n` the deviation
    /// is close to normal with variance `p(1-p) (c - 1/n)`, where
    /// `c = (1-eta)/(1+eta)` is the stationary variance factor of the
    /// decayed average.
    fn tail_scale(&self, n: u64) -> f64 {
        if n <= TABLE_MAX_N {
            return 1.0;
        }
        let c = (1.0 - self.eta) / (1.0 + self.eta);
        let at = |n: u64| (c - 1.0 / n as f64).max(0.0);
        let base = at(TABLE_MAX_N);
        if base > 0.0 {
            (at(n) / base).sqrt()
        } else {
            1.0
        }
    }

    /// `(warn_lo, warn_hi, detect_lo, detect_hi)` around an empirical rate
    /// `p` after `n` updates. Relative widths are interpolated linearly in
    /// `p` and scaled by `sqrt(p(1-p))`.
    pub fn lookup(&self, p: f64, n: u64) -> [f64; 4] {
        let p = p.clamp(0.0, 1.0);
        let last = self.p_grid.len() - 1;
        let k = self.p_grid.partition_point(|&g| g <= p).clamp(1, last) - 1;
        let (lo, hi) = (self.p_grid[k], self.p_grid[k + 1]);
        let f = (p - lo) / (hi - lo);
        let interval = match self.n_grid.binary_search(&n.max(1)) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let (a, b) = (self.widths[k][interval], self.widths[k + 1][interval]);
        let sd = binomial_sd(p) * self.tail_scale(n);
        let hw = (a[0] + f * (b[0] - a[0])) * sd;
        let hd = (a[1] + f * (b[1] - a[1])) * sd;
        [p - hw, p + hw, p - hd, p + hd].map(|b| b.clamp(0.0, 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct RateState<T> {
    hits: T,
    weight: T,
    n: u64,
    total_hits: u64,
}

impl<T: Scalar> RateState<T> {
    fn new() -> Self {
        RateState {
            hits: T::zero(),
            weight: T::zero(),
            n: 0,
            total_hits: 0,
        }
    }

    fn update(&mut self, hit: bool, eta: T) {
        let x = if hit { T::one() } else { T::zero() };
        self.hits = eta * self.hits + x;
        self.weight = eta * self.weight + T::one();
        self.n += 1;
        self.total_hits += hit as u64;
    }

    fn value(&self) -> T {
        if self.n == 0 {
            T::zero()
        } else {
            self.hits / self.weight
        }
    }
}

/// Linear four rates: decayed TPR, TNR, PPV and NPV, each tested against
/// null bounds centred on its empirical rate since the last reset.
#[derive(Debug, Clone)]
pub struct Lfr<T> {
    cfg: LfrConfig,
    rates: [RateState<T>; 4],
    table: Arc<BoundTable>,
}

impl<T: PartialEq> PartialEq for Lfr<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cfg == other.cfg && self.rates == other.rates
    }
}

impl<T: Scalar> Lfr<T> {
    pub fn new(cfg: LfrConfig) -> Self {
        // Each step updates two rates, so each gets half the level.
        let table = BoundTable::shared(
            cfg.bounds,
            cfg.eta,
            cfg.warn_level / 2.0,
            cfg.detect_level / 2.0,
        );
        Self::with_table(cfg, table)
    }

    pub fn with_table(cfg: LfrConfig, table: Arc<BoundTable>) -> Self {
        Lfr {
            cfg,
            rates: [RateState::new(); 4],
            table,
        }
    }

    pub fn config(&self) -> &LfrConfig {
        &self.cfg
    }

    /// Current decayed value of `rate`, 0 before its first update.
    pub fn rate(&self, rate: Rate) -> T {
        self.rates[rate.index()].value()
    }

    pub fn count(&self, rate: Rate) -> u64 {
        self.rates[rate.index()].n
    }

    pub fn reset(&mut self) {
        self.rates = [RateState::new(); 4];
    }

    /// Verdict of one rate against its bounds.
    pub fn rate_verdict(&self, rate: Rate) -> Verdict {
        let r = &self.rates[rate.index()];
        if r.n == 0 {
            return Verdict::Normal;
        }
        let p_hat = r.total_hits as f64 / r.n as f64;
        let [wl, wh, dl, dh] = self.table.lookup(p_hat, r.n);
        let v = r.value().to_f64_lossy();
        if v < dl || v > dh {
            Verdict::Drift
        } else if v < wl || v > wh {
            Verdict::Warning
        } else {
            Verdict::Normal
        }
    }

    /// Most severe verdict over the four rates, without updating them.
    pub fn verdict(&self) -> Verdict {
        Rate::ALL
            .iter()
            .map(|&r| self.rate_verdict(r))
            .max()
            .unwrap_or(Verdict::Normal)
    }

    /// The two rates updated by a `(truth, predicted)` cell.
    pub fn cell_rates(truth: Label, predicted: Label) -> [Rate; 2] {
        let row = match truth {
            Label::Pos => Rate::Tpr,
            Label::Neg => Rate::Tnr,
        };
        let col = match predicted {
            Label::Pos => Rate::Ppv,
            Label::Neg => Rate::Npv,
        };
        [row, col]
    }

    /// Updates the two rates of the `(truth, predicted)` cell and tests
    /// all rates, without re-arming.
    pub fn observe(&mut self, truth: Label, predicted: Label) -> Verdict {
        let eta = T::of(self.cfg.eta);
        let hit = truth == predicted;
        for r in Self::cell_rates(truth, predicted) {
            self.rates[r.index()].update(hit, eta);
        }
        self.verdict()
    }

    /// [`Lfr::observe`], re-arming on drift.
    pub fn step(&mut self, truth: Label, predicted: Label) -> Verdict {
        let v = self.observe(truth, predicted);
        if v == Verdict::Drift {
            self.reset();
        }
        v
    }
}
