use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detect::{DetectorKind, DetectorParams};
use crate::error::{Error, Result};
use crate::imbalance::DEFAULT_THETA;
use crate::learners::{Sampling, DEFAULT_ENSEMBLE_SIZE, DEFAULT_LEARNING_RATE};
use crate::metrics::DEFAULT_AUC_WINDOW;
use crate::stream::preset;
use crate::stream::DriftSchedule;

/// Environment variable giving the root for relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "IMBDRIFT_OUTPUT";

pub const DEFAULT_RUNS: usize = 100;
pub const DEFAULT_METRIC_DECAY: f64 = 0.995;

/// One learner/detector combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub learner: Sampling,
    #[serde(default = "no_detector")]
    pub detector: DetectorKind,
    #[serde(flatten)]
    pub params: DetectorParams,
}

fn no_detector() -> DetectorKind {
    DetectorKind::None
}

impl PipelineSpec {
    pub fn new(learner: Sampling, detector: DetectorKind) -> Self {
        PipelineSpec {
            learner,
            detector,
            params: DetectorParams::default(),
        }
    }

    /// `OOB`, `OOB+LFR`, ...
    pub fn default_name(&self) -> String {
        match self.detector {
            DetectorKind::None => self.learner.name().to_string(),
            d => format!("{}+{}", self.learner.name(), d.name()),
        }
    }
}

/// Parses the default naming, e.g. `oob` or `OOB+LFR`.
impl std::str::FromStr for PipelineSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (learner, detector) = match s.split_once('+') {
            Some((l, d)) => (l, d.parse()?),
            None => (s, DetectorKind::None),
        };
        Ok(PipelineSpec::new(learner.trim().parse()?, detector))
    }
}

/// The full learner x detector matrix.
pub fn default_pipelines() -> Vec<(String, PipelineSpec)> {
    let mut out = Vec::new();
    for learner in [Sampling::Ob, Sampling::Oob, Sampling::Uob] {
        for det in [
            DetectorKind::None,
            DetectorKind::DdmOci,
            DetectorKind::Lfr,
            DetectorKind::PaucPh,
        ] {
            let p = PipelineSpec::new(learner, det);
            out.push((p.default_name(), p));
        }
    }
    out
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    /// Preset the schedule came from, if any.
    pub preset: Option<String>,
    pub schedule: DriftSchedule,
    pub pipelines: Vec<(String, PipelineSpec)>,
    pub runs: usize,
    pub base_seed: u64,
    pub metric_decay: f64,
    /// Steps trained on but neither recorded nor shown to detectors.
    pub warmup: u64,
    pub theta: f64,
    pub ensemble_size: usize,
    pub learning_rate: f64,
    pub auc_window: usize,
    /// Write per-run metric and class-size series.
    pub export_runs: bool,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    name: Option<String>,
    preset: Option<String>,
    runs: Option<usize>,
    base_seed: Option<u64>,
    metric_decay: Option<f64>,
    warmup: Option<u64>,
    theta: Option<f64>,
    ensemble_size: Option<usize>,
    learning_rate: Option<f64>,
    auc_window: Option<usize>,
    export_runs: Option<bool>,
    output: Option<PathBuf>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawLock {
    seeds: Vec<u64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: RawExperiment,
    stream: Option<DriftSchedule>,
    #[serde(default)]
    pipeline: BTreeMap<String, PipelineSpec>,
    // Present in lock files; informational only.
    lock: Option<RawLock>,
}

impl ExperimentConfig {
    /// Defaults for a preset stream and the full pipeline matrix.
    pub fn for_preset(name: &str) -> Result<Self> {
        Ok(ExperimentConfig {
            name: name.to_string(),
            preset: Some(name.to_string()),
            schedule: preset(name)?,
            pipelines: default_pipelines(),
            runs: DEFAULT_RUNS,
            base_seed: 0,
            metric_decay: DEFAULT_METRIC_DECAY,
            warmup: 0,
            theta: DEFAULT_THETA,
            ensemble_size: DEFAULT_ENSEMBLE_SIZE,
            learning_rate: DEFAULT_LEARNING_RATE,
            auc_window: DEFAULT_AUC_WINDOW,
            export_runs: false,
            output: None,
        })
    }

    pub fn with_pipelines(mut self, pipelines: &[PipelineSpec]) -> Self {
        self.pipelines = pipelines
            .iter()
            .map(|p| (p.default_name(), p.clone()))
            .collect();
        self
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let e = raw.experiment;
        let (preset_name, schedule) = match (e.preset, raw.stream) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "both a preset and an inline [stream] were given".into(),
                ))
            }
            (Some(p), None) => {
                let s = preset(&p)?;
                (Some(p), s)
            }
            (None, Some(s)) => (None, s),
            (None, None) => {
                return Err(Error::Config(
                    "no stream: set experiment.preset or add a [stream] table".into(),
                ))
            }
        };
        let pipelines = if raw.pipeline.is_empty() {
            default_pipelines()
        } else {
            raw.pipeline.into_iter().collect()
        };
        let cfg = ExperimentConfig {
            name: e
                .name
                .or_else(|| preset_name.clone())
                .unwrap_or_else(|| "experiment".into()),
            preset: preset_name,
            schedule,
            pipelines,
            runs: e.runs.unwrap_or(DEFAULT_RUNS),
            base_seed: e.base_seed.unwrap_or(0),
            metric_decay: e.metric_decay.unwrap_or(DEFAULT_METRIC_DECAY),
            warmup: e.warmup.unwrap_or(0),
            theta: e.theta.unwrap_or(DEFAULT_THETA),
            ensemble_size: e.ensemble_size.unwrap_or(DEFAULT_ENSEMBLE_SIZE),
            learning_rate: e.learning_rate.unwrap_or(DEFAULT_LEARNING_RATE),
            auc_window: e.auc_window.unwrap_or(DEFAULT_AUC_WINDOW),
            export_runs: e.export_runs.unwrap_or(false),
            output: e.output,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        let checks = [
            (self.runs >= 1, "runs must be at least 1"),
            (
                self.metric_decay > 0.0 && self.metric_decay <= 1.0,
                "metric_decay must lie in (0,1]",
            ),
            (
                self.theta > 0.0 && self.theta < 1.0,
                "theta must lie in (0,1)",
            ),
            (self.ensemble_size >= 1, "ensemble_size must be at least 1"),
            (self.learning_rate >= 0.0, "learning_rate must be >= 0"),
            (self.auc_window >= 2, "auc_window must be at least 2"),
            (!self.pipelines.is_empty(), "no pipelines"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::Config(msg.into()));
            }
        }
        let mut names: Vec<&str> = self.pipelines.iter().map(|(n, _)| n.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate pipeline name {:?}", w[0])));
        }
        if let Some(bad) = names
            .iter()
            .find(|n| n.is_empty() || n.contains(['/', '\\']) || n.starts_with('.'))
        {
            return Err(Error::Config(format!("invalid pipeline name {bad:?}")));
        }
        Ok(())
    }

    pub fn seed(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }

    /// Output directory resolved against `$IMBDRIFT_OUTPUT` when relative.
    pub fn output_dir(&self) -> PathBuf {
        let dir = self
            .output
            .clone()
            .unwrap_or_else(|| PathBuf::from(&self.name));
        if dir.is_absolute() {
            return dir;
        }
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) => PathBuf::from(root).join(dir),
            None => dir,
        }
    }

    /// Fully resolved configuration with the stream inlined and every
    /// derived seed listed; reading it back reproduces this experiment.
    pub fn to_lock(&self) -> Result<String> {
        let raw = RawConfig {
            experiment: RawExperiment {
                name: Some(self.name.clone()),
                preset: None,
                runs: Some(self.runs),
                base_seed: Some(self.base_seed),
                metric_decay: Some(self.metric_decay),
                warmup: Some(self.warmup),
                theta: Some(self.theta),
                ensemble_size: Some(self.ensemble_size),
                learning_rate: Some(self.learning_rate),
                auc_window: Some(self.auc_window),
                export_runs: Some(self.export_runs),
                output: None,
            },
            stream: Some(self.schedule),
            pipeline: self.pipelines.iter().cloned().collect(),
            lock: Some(RawLock {
                seeds: (0..self.runs).map(|r| self.seed(r)).collect(),
            }),
        };
        toml::to_string(&raw).map_err(|e| Error::Config(e.to_string()))
    }
}
