use rayon::prelude::*;

use super::config::{ExperimentConfig, PipelineSpec};
use crate::detect::{DetectionLog, Detector, Observation, Verdict};
use crate::error::{Error, Result};
use crate::imbalance::ClassSizeTracker;
use crate::learners::EnsembleModel;
use crate::metrics::{DecayedConfusion, ScoreWindow};
use crate::stream::{DriftSchedule, Label, Stream};

/// One prequential step after warm-up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: u64,
    pub truth: Label,
    pub predicted: Label,
    pub score: f64,
    pub verdict: Verdict,
}

/// Everything recorded for one pipeline on one seeded stream.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub pipeline: String,
    pub run: usize,
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    pub log: DetectionLog,
}

impl RunRecord {
    /// Decayed `(recall_pos, recall_neg, gmean)` after each step, with the
    /// counts zeroed at the first recorded step.
    pub fn decayed_series(&self, eta: f64) -> Vec<(f64, f64, f64)> {
        let mut c = DecayedConfusion::new(eta);
        self.steps
            .iter()
            .map(|s| {
                c.update(s.truth, s.predicted);
                let (rp, rn) = c.counts.per_class_recall();
                (rp, rn, c.counts.g_mean())
            })
            .collect()
    }

    /// Windowed prequential AUC after each step.
    pub fn pauc_series(&self, window: usize) -> Vec<f64> {
        let mut w = ScoreWindow::new(window);
        self.steps
            .iter()
            .map(|s| {
                w.push(s.score, s.truth);
                w.auc()
            })
            .collect()
    }
}

/// Runs one pipeline on the stream of run `run`.
pub fn run_single(
    cfg: &ExperimentConfig,
    name: &str,
    spec: &PipelineSpec,
    run: usize,
) -> Result<RunRecord> {
    run_with_observer(cfg, name, spec, run, |_, _| {})
}

/// As [`run_single`], calling `observe(t, tracker)` after each tracker update.
pub fn run_with_observer<F>(
    cfg: &ExperimentConfig,
    name: &str,
    spec: &PipelineSpec,
    run: usize,
    mut observe: F,
) -> Result<RunRecord>
where
    F: FnMut(u64, &ClassSizeTracker<f64>),
{
    let seed = cfg.seed(run);
    let schedule = cfg.schedule;
    let mut stream = Stream::new(schedule, seed)?;
    let mut model = EnsembleModel::new(
        spec.learner,
        cfg.ensemble_size,
        schedule.n_features(),
        cfg.learning_rate,
        seed,
    );
    let mut tracker = ClassSizeTracker::new(cfg.theta);
    let mut detector = Detector::new(spec.detector, &spec.params);
    let mut log = DetectionLog::new(run, seed);
    let mut steps = Vec::with_capacity(schedule.total_steps.saturating_sub(cfg.warmup) as usize);

    for _ in 0..schedule.total_steps {
        let ex = stream.next_example()?;
        let pred = model.predict(&ex.features)?;
        tracker.update(ex.label);
        observe(ex.t, &tracker);
        if ex.t > cfg.warmup {
            let status = tracker.status();
            let obs = Observation {
                truth: ex.label,
                predicted: pred.label,
                score: pred.score,
                minority: status.minority,
            };
            let verdict = detector.step(&obs);
            log.record(ex.t, verdict);
            steps.push(StepRecord {
                t: ex.t,
                truth: ex.label,
                predicted: pred.label,
                score: pred.score,
                verdict,
            });
            if verdict == Verdict::Drift {
                model.reset();
                detector.reset();
            }
        }
        model.train_one(&ex, &tracker)?;
    }
    Ok(RunRecord {
        pipeline: name.to_string(),
        run,
        seed,
        steps,
        log,
    })
}

/// All runs of all pipelines, grouped by pipeline in configuration order
/// and by run index within a group. Runs execute in parallel; the result
/// does not depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<Vec<RunRecord>>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.pipelines.len())
        .flat_map(|p| (0..cfg.runs).map(move |r| (p, r)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(p, r)| {
            let (name, spec) = &cfg.pipelines[p];
            run_single(cfg, name, spec, r)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut grouped: Vec<Vec<RunRecord>> = vec![Vec::with_capacity(cfg.runs); cfg.pipelines.len()];
    for (rec, &(p, _)) in records.into_iter().zip(&jobs) {
        grouped[p].push(rec);
    }
    Ok(grouped)
}

/// Mean decayed metrics over one averaging window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowAverages {
    pub start: u64,
    pub end: u64,
    pub recall_pos: f64,
    pub recall_neg: f64,
    pub gmean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConceptAverages {
    pub pre: WindowAverages,
    pub post: WindowAverages,
}

/// The two averaging windows `[warmup+1, drift_start-1]` and
/// `[drift_end, total_steps]`; the transition interval is excluded.
pub fn concept_windows(schedule: &DriftSchedule, warmup: u64) -> ((u64, u64), (u64, u64)) {
    (
        (warmup + 1, schedule.drift_start - 1),
        (schedule.drift_end().max(warmup + 1), schedule.total_steps),
    )
}

/// Averages decayed recall and G-mean over `[start, end]`, with the decayed
/// counts zeroed at `start`.
pub fn window_average(rec: &RunRecord, start: u64, end: u64, eta: f64) -> Result<WindowAverages> {
    let mut c = DecayedConfusion::new(eta);
    let (mut rp, mut rn, mut gm, mut n) = (0.0, 0.0, 0.0, 0usize);
    for s in rec.steps.iter().filter(|s| s.t >= start && s.t <= end) {
        c.update(s.truth, s.predicted);
        let (p, q) = c.counts.per_class_recall();
        rp += p;
        rn += q;
        gm += c.counts.g_mean();
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyWindow { start, end });
    }
    let n = n as f64;
    Ok(WindowAverages {
        start,
        end,
        recall_pos: rp / n,
        recall_neg: rn / n,
        gmean: gm / n,
    })
}

pub fn concept_averages(
    rec: &RunRecord,
    schedule: &DriftSchedule,
    warmup: u64,
    eta: f64,
) -> Result<ConceptAverages> {
    let ((a, b), (c, d)) = concept_windows(schedule, warmup);
    Ok(ConceptAverages {
        pre: window_average(rec, a, b, eta)?,
        post: window_average(rec, c, d, eta)?,
    })
}
