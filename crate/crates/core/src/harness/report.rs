use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::run::{concept_averages, ConceptAverages, RunRecord, WindowAverages};
use crate::detect::{score_detections, DetectionLog, DetectorKind, DetectorScore};
use crate::error::{Error, Result};
use crate::imbalance::ClassSizeTracker;
use crate::metrics::{wilcoxon_signed_rank, MIN_PAIRS};

pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Window {
    Pre,
    Post,
}

impl Window {
    pub fn name(self) -> &'static str {
        match self {
            Window::Pre => "pre",
            Window::Post => "post",
        }
    }

    fn pick(self, c: &ConceptAverages) -> &WindowAverages {
        match self {
            Window::Pre => &c.pre,
            Window::Post => &c.post,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    RecallPos,
    RecallNeg,
    GMean,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::RecallPos, Metric::RecallNeg, Metric::GMean];

    pub fn name(self) -> &'static str {
        match self {
            Metric::RecallPos => "recall_pos",
            Metric::RecallNeg => "recall_neg",
            Metric::GMean => "gmean",
        }
    }

    fn pick(self, w: &WindowAverages) -> f64 {
        match self {
            Metric::RecallPos => w.recall_pos,
            Metric::RecallNeg => w.recall_neg,
            Metric::GMean => w.gmean,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub pipeline: String,
    pub window: Window,
    pub metric: Metric,
    pub mean: f64,
    pub std: f64,
    /// Wilcoxon p-value against the best pipeline; `None` for the best
    /// itself or when only one pipeline exists.
    pub p_value: Option<f64>,
    /// Member of the statistically best group.
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorRow {
    pub pipeline: String,
    pub learner: &'static str,
    pub detector: &'static str,
    pub score: DetectorScore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub name: String,
    pub learner: &'static str,
    pub detector: DetectorKind,
    /// Per-run concept averages in run order.
    pub averages: Vec<ConceptAverages>,
    pub logs: Vec<DetectionLog>,
    /// Mean decayed G-mean across runs, per recorded step.
    pub curve: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub summary: Vec<SummaryRow>,
    pub detectors: Vec<DetectorRow>,
    pub pipelines: Vec<PipelineResult>,
}

impl Report {
    pub fn row(&self, pipeline: &str, window: Window, metric: Metric) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.pipeline == pipeline && r.window == window && r.metric == metric)
    }

    pub fn detector(&self, pipeline: &str) -> Option<&DetectorScore> {
        self.detectors
            .iter()
            .find(|r| r.pipeline == pipeline)
            .map(|r| &r.score)
    }

    pub fn pipeline(&self, name: &str) -> Option<&PipelineResult> {
        self.pipelines.iter().find(|p| p.name == name)
    }
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Reduces completed runs into per-pipeline results.
pub fn summarize_pipelines(
    cfg: &ExperimentConfig,
    records: &[Vec<RunRecord>],
) -> Result<Vec<PipelineResult>> {
    let mut out = Vec::with_capacity(records.len());
    for ((name, spec), runs) in cfg.pipelines.iter().zip(records) {
        let averages = runs
            .iter()
            .map(|r| concept_averages(r, &cfg.schedule, cfg.warmup, cfg.metric_decay))
            .collect::<Result<Vec<_>>>()?;
        let mut curve: Vec<(u64, f64)> = Vec::new();
        for r in runs {
            let series = r.decayed_series(cfg.metric_decay);
            if curve.is_empty() {
                curve = r.steps.iter().map(|s| (s.t, 0.0)).collect();
            }
            for (c, (_, _, g)) in curve.iter_mut().zip(series) {
                c.1 += g;
            }
        }
        let n = runs.len().max(1) as f64;
        for c in &mut curve {
            c.1 /= n;
        }
        out.push(PipelineResult {
            name: name.clone(),
            learner: spec.learner.name(),
            detector: spec.detector,
            averages,
            logs: runs.iter().map(|r| r.log.clone()).collect(),
            curve,
        });
    }
    Ok(out)
}

/// Mean and std per pipeline, window and metric, a Wilcoxon test of every
/// pipeline against the best mean, and detector scores.
pub fn aggregate_and_test(pipelines: Vec<PipelineResult>, drift_start: u64) -> Result<Report> {
    if let Some(first) = pipelines.first() {
        let n = first.averages.len();
        if let Some(bad) = pipelines.iter().find(|p| p.averages.len() != n) {
            return Err(Error::RunCountMismatch(format!(
                "{} has {} runs, {} has {}",
                first.name,
                n,
                bad.name,
                bad.averages.len()
            )));
        }
    }
    let mut summary = Vec::new();
    for window in [Window::Pre, Window::Post] {
        for metric in Metric::ALL {
            let samples: Vec<Vec<f64>> = pipelines
                .iter()
                .map(|p| {
                    p.averages
                        .iter()
                        .map(|a| metric.pick(window.pick(a)))
                        .collect()
                })
                .collect();
            let stats: Vec<(f64, f64)> = samples.iter().map(|s| mean_std(s)).collect();
            // First pipeline wins ties.
            let best = stats
                .iter()
                .enumerate()
                .fold(None::<(usize, f64)>, |acc, (i, &(m, _))| match acc {
                    Some((_, bm)) if bm >= m => acc,
                    _ => Some((i, m)),
                })
                .map(|(i, _)| i);
            for (i, p) in pipelines.iter().enumerate() {
                let (mean, std) = stats[i];
                let (p_value, is_best) = match best {
                    Some(b) if b == i || pipelines.len() == 1 => (None, true),
                    // Too few runs to test: only the top mean is marked.
                    Some(_) if samples[i].len() < MIN_PAIRS => (None, false),
                    Some(b) => {
                        let t = wilcoxon_signed_rank(&samples[b], &samples[i], SIGNIFICANCE)?;
                        (Some(t.p_value), !t.significant)
                    }
                    None => (None, true),
                };
                summary.push(SummaryRow {
                    pipeline: p.name.clone(),
                    window,
                    metric,
                    mean,
                    std,
                    p_value,
                    best: is_best,
                });
            }
        }
    }
    let detectors = pipelines
        .iter()
        .filter(|p| p.detector != DetectorKind::None)
        .map(|p| DetectorRow {
            pipeline: p.name.clone(),
            learner: p.learner,
            detector: p.detector.name(),
            score: score_detections(&p.logs, drift_start, p.logs.len()),
        })
        .collect();
    Ok(Report {
        summary,
        detectors,
        pipelines,
    })
}

/// Runs, reduces and tests a whole experiment.
pub fn run_and_report(cfg: &ExperimentConfig) -> Result<Report> {
    let records = super::run::run_experiment(cfg)?;
    aggregate_and_test(
        summarize_pipelines(cfg, &records)?,
        cfg.schedule.drift_start,
    )
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_all(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let mut f = create(path)?;
    body(&mut f)
        .and_then(|_| f.flush())
        .map_err(|e| Error::io(path, e))
}

fn mkdir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes `summary.csv`, `detectors.csv`, `curves/<pipeline>.csv`,
/// `alarms/<pipeline>.csv` and, when a config is given, `config.lock`.
/// Returns the paths written.
pub fn emit_report(
    report: &Report,
    cfg: Option<&ExperimentConfig>,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    mkdir(dir)?;
    let mut written = Vec::new();

    let path = dir.join("summary.csv");
    write_all(&path, |f| {
        writeln!(f, "pipeline,window,metric,mean,std,p_value,best")?;
        for r in &report.summary {
            let p = r.p_value.map(|p| p.to_string()).unwrap_or_default();
            writeln!(
                f,
                "{},{},{},{},{},{},{}",
                r.pipeline,
                r.window.name(),
                r.metric.name(),
                r.mean,
                r.std,
                p,
                r.best
            )?;
        }
        Ok(())
    })?;
    written.push(path);

    let path = dir.join("detectors.csv");
    write_all(&path, |f| {
        writeln!(f, "pipeline,learner,detector,tdr,fa,dod")?;
        for r in &report.detectors {
            let dod = r
                .score
                .dod
                .map(|d| d.to_string())
                .unwrap_or_else(|| "-".into());
            writeln!(
                f,
                "{},{},{},{},{},{}",
                r.pipeline, r.learner, r.detector, r.score.tdr, r.score.fa, dod
            )?;
        }
        Ok(())
    })?;
    written.push(path);

    let curves = dir.join("curves");
    let alarms = dir.join("alarms");
    if !report.pipelines.is_empty() {
        mkdir(&curves)?;
        mkdir(&alarms)?;
    }
    for p in &report.pipelines {
        let path = curves.join(format!("{}.csv", p.name));
        write_all(&path, |f| {
            writeln!(f, "t,gmean")?;
            for (t, g) in &p.curve {
                writeln!(f, "{t},{g}")?;
            }
            Ok(())
        })?;
        written.push(path);

        let path = alarms.join(format!("{}.csv", p.name));
        write_all(&path, |f| {
            writeln!(f, "run,seed,t,verdict")?;
            for log in &p.logs {
                log.write_csv(f)?;
            }
            Ok(())
        })?;
        written.push(path);
    }

    if let Some(cfg) = cfg {
        let path = dir.join("config.lock");
        let lock = cfg.to_lock()?;
        write_all(&path, |f| f.write_all(lock.as_bytes()))?;
        written.push(path);
    }
    Ok(written)
}

/// Per-run series: `runs/<pipeline>/run_<r>.csv` with
/// `t,recall_pos,recall_neg,gmean,pauc` and `runs/<pipeline>/sizes_<r>.csv`
/// with `t,w_pos,w_neg`.
pub fn export_run_series(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (name, spec) in &cfg.pipelines {
        let sub = dir.join("runs").join(name);
        mkdir(&sub)?;
        for run in 0..cfg.runs {
            let mut sizes = Vec::new();
            let rec = super::run::run_with_observer(
                cfg,
                name,
                spec,
                run,
                |t, tr: &ClassSizeTracker<f64>| {
                    sizes.push((t, tr.size(crate::Label::Pos), tr.size(crate::Label::Neg)));
                },
            )?;
            let series = rec.decayed_series(cfg.metric_decay);
            let pauc = rec.pauc_series(cfg.auc_window);
            let path = sub.join(format!("run_{run}.csv"));
            write_all(&path, |f| {
                writeln!(f, "t,recall_pos,recall_neg,gmean,pauc")?;
                for ((s, (rp, rn, g)), a) in rec.steps.iter().zip(&series).zip(&pauc) {
                    writeln!(f, "{},{rp},{rn},{g},{a}", s.t)?;
                }
                Ok(())
            })?;
            written.push(path);
            let path = sub.join(format!("sizes_{run}.csv"));
            write_all(&path, |f| {
                writeln!(f, "t,w_pos,w_neg")?;
                for (t, p, n) in &sizes {
                    writeln!(f, "{t},{p},{n}")?;
                }
                Ok(())
            })?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Reads an alarm log written by [`emit_report`]; warnings are kept.
pub fn read_alarm_csv(path: &Path) -> Result<Vec<DetectionLog>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut logs: Vec<DetectionLog> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let row = i + 1;
        let field = |k: usize, col: &str| -> Result<&str> {
            rec.get(k).ok_or_else(|| Error::Parse {
                row,
                column: col.into(),
                message: "missing field".into(),
            })
        };
        let num = |k: usize, col: &str| -> Result<u64> {
            field(k, col)?
                .trim()
                .parse()
                .map_err(|e: std::num::ParseIntError| Error::Parse {
                    row,
                    column: col.into(),
                    message: e.to_string(),
                })
        };
        let run = num(0, "run")? as usize;
        let seed = num(1, "seed")?;
        let t = num(2, "t")?;
        let verdict = match field(3, "verdict")?.trim() {
            "drift" => crate::detect::Verdict::Drift,
            "warning" => crate::detect::Verdict::Warning,
            "normal" => crate::detect::Verdict::Normal,
            other => {
                return Err(Error::Parse {
                    row,
                    column: "verdict".into(),
                    message: format!("unknown verdict {other:?}"),
                })
            }
        };
        let log = match logs.iter_mut().position(|l| l.run == run) {
            Some(k) => &mut logs[k],
            None => {
                logs.push(DetectionLog::new(run, seed));
                logs.last_mut().expect("just pushed")
            }
        };
        log.record(t, verdict);
    }
    Ok(logs)
}
