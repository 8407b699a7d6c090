use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use imbdrift::detect::score_detections;
use imbdrift::harness::{
    emit_report, export_run_series, read_alarm_csv, run_and_report, ExperimentConfig, PipelineSpec,
};
use imbdrift::stream::{preset, write_stream_csv, DriftSchedule, Stream, PRESET_NAMES};

#[derive(Parser)]
#[command(
    name = "imbdrift",
    version,
    about = "Online class-imbalance and concept-drift experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump one generated stream as CSV.
    Generate(GenerateArgs),
    /// Run an experiment and write its report.
    Run(RunArgs),
    /// Score alarm logs against a known drift start.
    ScoreDetectors(ScoreArgs),
    /// Print the tables of a finished experiment.
    Report(ReportArgs),
}

#[derive(Args)]
struct StreamSource {
    /// Named stream, e.g. sine1-py or seag-pyx.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Experiment config whose stream is used.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    source: StreamSource,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of examples to write; longer than the schedule extends it.
    #[arg(long)]
    steps: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML). A config.lock replays an earlier run.
    config: Option<PathBuf>,
    /// Use a preset with the full pipeline matrix instead of a file.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    /// Restrict to these pipelines, e.g. `--pipeline OOB --pipeline OOB+LFR`.
    #[arg(long = "pipeline")]
    pipelines: Vec<String>,
    /// Also write per-run metric and class-size series.
    #[arg(long)]
    export_runs: bool,
    /// Output directory. Relative paths resolve against $IMBDRIFT_OUTPUT.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    /// Alarm logs as written to `alarms/<pipeline>.csv`.
    #[arg(required = true)]
    logs: Vec<PathBuf>,
    #[arg(long, default_value_t = 1501)]
    drift_start: u64,
    /// Number of runs, counting runs without a single row.
    #[arg(long)]
    runs: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Output directory of `run`.
    dir: PathBuf,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Run(a) => run(a),
        Command::ScoreDetectors(a) => score(a),
        Command::Report(a) => report(a),
    }
}

fn schedule_of(source: &StreamSource) -> Result<DriftSchedule> {
    match (&source.preset, &source.config) {
        (Some(name), None) => Ok(preset(name)?),
        (None, Some(path)) => Ok(ExperimentConfig::load(path)?.schedule),
        (None, None) => bail!(
            "give --preset or --config (presets: {})",
            PRESET_NAMES.join(", ")
        ),
        (Some(_), Some(_)) => unreachable!("clap rejects both"),
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let mut schedule = schedule_of(&a.source)?;
    let steps = a.steps.unwrap_or(schedule.total_steps);
    schedule.total_steps = schedule.total_steps.max(steps);
    let examples = Stream::new(schedule, a.seed)?
        .take(steps as usize)
        .collect::<imbdrift::Result<Vec<_>>>()?;
    match &a.out {
        Some(path) => {
            let f =
                fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_stream_csv(io::BufWriter::new(f), &examples)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        None => write_stream_csv(io::stdout().lock(), &examples).context("writing stdout")?,
    }
    Ok(())
}

fn load_config(a: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&a.config, &a.preset) {
        (Some(path), None) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::for_preset(name)?,
        (None, None) => bail!("give a config file or --preset"),
        (Some(_), Some(_)) => unreachable!("clap rejects both"),
    };
    if let Some(r) = a.runs {
        cfg.runs = r;
    }
    if let Some(s) = a.base_seed {
        cfg.base_seed = s;
    }
    if !a.pipelines.is_empty() {
        let specs = a
            .pipelines
            .iter()
            .map(|p| p.parse::<PipelineSpec>())
            .collect::<imbdrift::Result<Vec<_>>>()?;
        cfg = cfg.with_pipelines(&specs);
    }
    if a.export_runs {
        cfg.export_runs = true;
    }
    if a.out.is_some() {
        cfg.output = a.out.clone();
    }
    cfg.validate()?;
    // Running from the lock text makes a replay of config.lock produce the
    // same pipeline order, and therefore the same files.
    let output = cfg.output.clone();
    let mut locked = ExperimentConfig::from_toml(&cfg.to_lock()?)?;
    locked.output = output;
    Ok(locked)
}

fn run(a: RunArgs) -> Result<()> {
    let cfg = load_config(&a)?;
    let dir = cfg.output_dir();
    eprintln!(
        "{}: {} pipelines x {} runs -> {}",
        cfg.name,
        cfg.pipelines.len(),
        cfg.runs,
        dir.display()
    );
    let report = run_and_report(&cfg)?;
    let mut written = emit_report(&report, Some(&cfg), &dir)?;
    if cfg.export_runs {
        written.extend(export_run_series(&cfg, &dir)?);
    }
    eprintln!("wrote {} files", written.len());
    print_tables(&dir, &mut io::stdout().lock())
}

fn score(a: ScoreArgs) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "log,tdr,fa,dod")?;
    for path in &a.logs {
        let logs = read_alarm_csv(path)?;
        let runs = a.runs.unwrap_or(logs.len());
        if runs < logs.len() {
            bail!(
                "{}: {} runs logged but --runs {}",
                path.display(),
                logs.len(),
                runs
            );
        }
        let s = score_detections(&logs, a.drift_start, runs);
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy())
            .unwrap_or_default();
        writeln!(out, "{name},{},{},{}", s.tdr, s.fa, s.dod_display())?;
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    print_tables(&a.dir, &mut io::stdout().lock())
}

fn read_rows(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut rdr =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    rdr.records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("parsing {}", path.display()))
}

/// Learner table over the post-drift window and the detector table.
fn print_tables(dir: &Path, out: &mut dyn Write) -> Result<()> {
    let summary = read_rows(&dir.join("summary.csv"))?;
    let detectors = read_rows(&dir.join("detectors.csv"))?;

    let mut pipelines: Vec<&str> = Vec::new();
    for r in &summary {
        if !pipelines.contains(&&r[0]) {
            pipelines.push(&r[0]);
        }
    }
    for window in ["pre", "post"] {
        writeln!(out, "{window}-drift window (* = statistically best)")?;
        writeln!(
            out,
            "{:<16} {:>16} {:>16} {:>16}",
            "method", "recall+", "recall-", "G-mean"
        )?;
        for p in &pipelines {
            let cell = |metric: &str| {
                summary
                    .iter()
                    .find(|r| &&r[0] == p && &r[1] == window && &r[2] == metric)
                    .map(|r| {
                        let mean: f64 = r[3].parse().unwrap_or(f64::NAN);
                        let std: f64 = r[4].parse().unwrap_or(f64::NAN);
                        let star = if &r[6] == "true" { "*" } else { " " };
                        format!("{mean:.3}±{std:.3}{star}")
                    })
                    .unwrap_or_default()
            };
            writeln!(
                out,
                "{:<16} {:>16} {:>16} {:>16}",
                p,
                cell("recall_pos"),
                cell("recall_neg"),
                cell("gmean")
            )?;
        }
        writeln!(out)?;
    }

    let active: Vec<_> = detectors.iter().filter(|r| &r[2] != "none").collect();
    if !active.is_empty() {
        writeln!(
            out,
            "{:<16} {:>6} {:>8} {:>8}",
            "method", "TDR", "FA", "DoD"
        )?;
        for r in active {
            let tdr: f64 = r[3].parse().unwrap_or(f64::NAN);
            let fa: f64 = r[4].parse().unwrap_or(f64::NAN);
            let dod = r[5]
                .parse::<f64>()
                .map(|d| format!("{d:.0}"))
                .unwrap_or_else(|_| "-".into());
            writeln!(
                out,
                "{:<16} {:>5.0}% {:>8.2} {:>8}",
                &r[0],
                tdr * 100.0,
                fa,
                dod
            )?;
        }
    }
    Ok(())
}
