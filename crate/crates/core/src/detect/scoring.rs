use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Verdict;

/// Alarm times of one run, strictly increasing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionLog {
    pub run: usize,
    pub seed: u64,
    pub alarms: Vec<u64>,
    /// Warning times, kept for export only.
    pub warnings: Vec<u64>,
}

impl DetectionLog {
    pub fn new(run: usize, seed: u64) -> Self {
        DetectionLog {
            run,
            seed,
            ..Default::default()
        }
    }

    pub fn record(&mut self, t: u64, verdict: Verdict) {
        match verdict {
            Verdict::Drift => {
                debug_assert!(self.alarms.last().is_none_or(|&l| l < t));
                self.alarms.push(t);
            }
            Verdict::Warning => self.warnings.push(t),
            Verdict::Normal => {}
        }
    }

    /// Writes `run,seed,t,verdict` rows (without header) in time order.
    pub fn write_csv<W: Write + ?Sized>(&self, out: &mut W) -> std::io::Result<()> {
        let mut rows: Vec<(u64, Verdict)> = self
            .alarms
            .iter()
            .map(|&t| (t, Verdict::Drift))
            .chain(self.warnings.iter().map(|&t| (t, Verdict::Warning)))
            .collect();
        rows.sort();
        for (t, v) in rows {
            writeln!(out, "{},{},{},{}", self.run, self.seed, t, v.name())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorScore {
    pub tdr: f64,
    pub fa: f64,
    /// `None` when no run detected the drift.
    pub dod: Option<f64>,
    pub runs: usize,
}

impl DetectorScore {
    pub fn dod_display(&self) -> String {
        match self.dod {
            Some(d) => format!("{d:.1}"),
            None => "-".to_string(),
        }
    }
}

/// Scores alarm logs against a known drift start. The first alarm at or
/// after `drift_start` is the true detection; every other alarm is false.
/// Runs without a log count as silent.
pub fn score_detections(logs: &[DetectionLog], drift_start: u64, n_runs: usize) -> DetectorScore {
    let runs = n_runs.max(logs.len());
    if runs == 0 {
        return DetectorScore {
            tdr: 0.0,
            fa: 0.0,
            dod: None,
            runs,
        };
    }
    let mut detected = 0usize;
    let mut false_alarms = 0usize;
    let mut delay = 0u64;
    for log in logs {
        let first = log.alarms.iter().find(|&&t| t >= drift_start);
        if let Some(&t) = first {
            detected += 1;
            delay += t - drift_start;
            false_alarms += log.alarms.len() - 1;
        } else {
            false_alarms += log.alarms.len();
        }
    }
    DetectorScore {
        tdr: detected as f64 / runs as f64,
        fa: false_alarms as f64 / runs as f64,
        dod: (detected > 0).then(|| delay as f64 / detected as f64),
        runs,
    }
}
