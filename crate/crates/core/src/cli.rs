//! Command-line front end.
//!
//! Every failure prints exactly one line on stderr of the form
//! `error[code=N][kind=K]: message` and exits with `N`:
//! 2 configuration, 3 simulation abort, 4 I/O.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{CalibrationFile, RunConfig};
use crate::error::Error;
use crate::harness::campaign::{end_label, run_campaign, CampaignSummary, Variation};
use crate::harness::io::{read_samples, unique_path, write_new, write_record};
use crate::harness::{
    compute_metrics, compute_yaw_metrics, ErrorMetrics, Scenario, TargetLine, YawMetrics,
};

#[derive(Debug, Parser)]
#[command(
    name = "manta-sim",
    version,
    about = "Flapping-fin robot pool simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run seeded trials and write their records.
    Run(RunArgs),
    /// Fit the thrust coefficient to the target cruise speed.
    Calibrate(CalibrateArgs),
    /// Paired heading-PD on/off comparison.
    Campaign(RunArgs),
    /// Recompute metrics from an existing record.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML configuration; omitted keys take nominal defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Base seed; replicate i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Worker threads (default: one per replicate).
    #[arg(long)]
    pub parallel: Option<usize>,
    #[arg(long)]
    pub scenario: Option<Scenario>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory receiving hydro.toml.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Record file (.jsonl or .csv).
    #[arg(long)]
    pub record: PathBuf,
}

/// Failure carried to the process boundary.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn new(code: u8, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            kind,
            message: message.into(),
        }
    }

    /// The single stderr line.
    pub fn line(&self) -> String {
        let flat = self
            .message
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect::<Vec<_>>()
            .join(" | ");
        format!("error[code={}][kind={}]: {flat}", self.code, self.kind)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match &e {
            Error::Config(c) => Self::new(2, "config", c.to_string()),
            Error::Parse { .. } => Self::new(2, "parse", e.to_string()),
            Error::Bracket { .. } => Self::new(2, "calibration", e.to_string()),
            Error::Unstable { .. } => Self::new(3, "abort", e.to_string()),
            Error::Io { .. } => Self::new(4, "io", e.to_string()),
            Error::DegenerateLine | Error::LengthMismatch(..) | Error::TooFewSamples { .. } => {
                Self::new(2, "record", e.to_string())
            }
        }
    }
}

impl From<crate::error::ConfigError> for CliError {
    fn from(e: crate::error::ConfigError) -> Self {
        Error::from(e).into()
    }
}

type CliResult<T = ()> = Result<T, CliError>;

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let msg = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("{}", CliError::new(2, "usage", msg).line());
            return ExitCode::from(2);
        }
    };
    let mut stdout = String::new();
    let result = execute(cli.command, &mut stdout);
    print!("{stdout}");
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.code)
        }
    }
}

/// Runs a command, appending its report to `stdout`.
pub fn execute(command: Command, stdout: &mut String) -> CliResult {
    match command {
        Command::Run(a) => cmd_run(&a, stdout),
        Command::Calibrate(a) => cmd_calibrate(&a, stdout),
        Command::Campaign(a) => cmd_campaign(&a, stdout),
        Command::Replay(a) => cmd_replay(&a, stdout),
    }
}

fn load_config(path: Option<&Path>) -> CliResult<RunConfig> {
    match path {
        Some(p) => Ok(RunConfig::load(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn apply_overrides(run: &mut RunConfig, a: &RunArgs) -> CliResult {
    if let Some(seed) = a.seed {
        run.trial.seed = seed;
    }
    if let Some(n) = a.replicates {
        run.replicates = n;
    }
    if let Some(s) = a.scenario {
        run.trial.scenario = s;
    }
    if a.parallel == Some(0) {
        return Err(crate::error::ConfigError::invalid("parallel", "must be >= 1").into());
    }
    run.validate()?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e).into())
}

fn write_unique(dir: &Path, stem: &str, ext: &str, body: &str) -> CliResult<PathBuf> {
    let path = unique_path(dir, stem, ext);
    write_new(&path, body)?;
    Ok(path)
}

fn cmd_run(a: &RunArgs, out: &mut String) -> CliResult {
    let mut run = load_config(a.config.as_deref())?;
    apply_overrides(&mut run, a)?;
    if let Some(report) = run.resolve_hydro()? {
        let _ = writeln!(
            out,
            "calibrated c_thrust = {:.6e} ({} iterations)",
            report.hydro.c_thrust, report.iterations
        );
    }
    ensure_dir(&a.out)?;
    let summary = run_campaign(
        &run.trial,
        run.replicates,
        &[Variation::baseline()],
        a.parallel,
    )?;
    let trials = &summary.variations[0].trials;

    let prefix = format!("run-{}", run.trial.scenario.as_str());
    for t in trials {
        if let Ok(rec) = &t.result {
            let paths = write_record(&a.out, &format!("{prefix}-seed{}", t.seed), rec)?;
            let _ = writeln!(
                out,
                "trial {} seed {}: mean {:.3} cm, max {:.3} cm, std {:.3} cm, {} -> {}",
                t.index + 1,
                t.seed,
                rec.metrics.mean_error,
                rec.metrics.max_error,
                rec.metrics.std_dev,
                end_label(rec),
                paths[0].display()
            );
        }
    }
    let table = CampaignSummary::table_csv(&summary.variations[0]);
    let path = write_unique(&a.out, &format!("{prefix}-summary"), "csv", &table)?;
    let _ = writeln!(out, "summary -> {}", path.display());
    first_failure(&summary)
}

fn first_failure(summary: &CampaignSummary) -> CliResult {
    let failed: Vec<String> = summary
        .variations
        .iter()
        .flat_map(|v| v.trials.iter().map(move |t| (v, t)))
        .filter_map(|(v, t)| {
            t.result.as_ref().err().map(|e| {
                format!(
                    "{} trial {} (seed {}): {e}",
                    v.variation.label,
                    t.index + 1,
                    t.seed
                )
            })
        })
        .collect();
    match failed.first() {
        None => Ok(()),
        Some(first) => Err(CliError::new(
            3,
            "abort",
            format!(
                "{} of {} trials aborted; first: {first}",
                failed.len(),
                summary
                    .variations
                    .iter()
                    .map(|v| v.trials.len())
                    .sum::<usize>()
            ),
        )),
    }
}

fn cmd_calibrate(a: &CalibrateArgs, out: &mut String) -> CliResult {
    let run = load_config(a.config.as_deref())?;
    let inputs = run.calibration_inputs();
    ensure_dir(&a.out)?;
    let path = a.out.join("hydro.toml");

    let reusable = path
        .exists()
        .then(|| CalibrationFile::load(&path).ok())
        .flatten()
        .filter(|f| f.inputs == inputs);
    let file = match reusable {
        Some(file) => {
            let _ = writeln!(out, "reusing {} (inputs unchanged)", path.display());
            file
        }
        None => {
            let report = crate::dynamics::calibrate(
                &inputs.gait,
                &inputs.base,
                &inputs.pool,
                &inputs.options,
            )?;
            let file = CalibrationFile::new(inputs, &report);
            fs::write(&path, file.to_toml()).map_err(|e| Error::io(&path, e))?;
            let _ = writeln!(
                out,
                "calibrated in {} iterations -> {}",
                file.iterations,
                path.display()
            );
            file
        }
    };
    let h = &file.hydro;
    let v = &file.verification;
    let _ = writeln!(out, "c_thrust = {:.6e}", h.c_thrust);
    let _ = writeln!(out, "c_drag = {}", h.c_drag);
    let _ = writeln!(
        out,
        "verification: steady speed {:.4} cm/s (target {}), settled after {:.2} s, run {:.1} s",
        v.steady_speed_cm_s, inputs.options.target_speed_cm_s, v.settle_time_s, v.duration_s
    );
    match v.course_time_s {
        Some(t) => {
            let _ = writeln!(
                out,
                "finish line ({} cm) crossed at {t:.2} s",
                inputs.pool.finish_line_cm
            );
        }
        None => {
            let _ = writeln!(
                out,
                "finish line ({} cm) not reached",
                inputs.pool.finish_line_cm
            );
        }
    }
    Ok(())
}

fn cmd_campaign(a: &RunArgs, out: &mut String) -> CliResult {
    let mut run = load_config(a.config.as_deref())?;
    apply_overrides(&mut run, a)?;
    run.resolve_hydro()?;
    ensure_dir(&a.out)?;
    let summary = run_campaign(
        &run.trial,
        run.replicates,
        &Variation::pd_on_off(),
        a.parallel,
    )?;

    let prefix = format!("campaign-{}", run.trial.scenario.as_str());
    for v in &summary.variations {
        let table = CampaignSummary::table_csv(v);
        let path = write_unique(
            &a.out,
            &format!("{prefix}-{}", v.variation.label),
            "csv",
            &table,
        )?;
        let _ = writeln!(out, "{} -> {}", v.variation.label, path.display());
    }
    out.push_str(&summary.comparison_table());

    let (on, off) = (&summary.variations[0], &summary.variations[1]);
    let pairs: Vec<(f64, f64)> = on
        .trials
        .iter()
        .zip(&off.trials)
        .filter_map(|(p, q)| Some((p.metrics()?.mean_error, q.metrics()?.mean_error)))
        .collect();
    let better = pairs.iter().filter(|(p, q)| p < q).count();
    let _ = writeln!(
        out,
        "with_control has the smaller mean error in {better} of {} pairs",
        pairs.len()
    );
    first_failure(&summary)
}

#[derive(Serialize)]
struct ReplayReport {
    record: String,
    samples: usize,
    target_line: TargetLine,
    metrics: ErrorMetrics,
    yaw_metrics: YawMetrics,
}

fn cmd_replay(a: &ReplayArgs, out: &mut String) -> CliResult {
    let samples = read_samples(&a.record)?;
    let first = samples
        .first()
        .ok_or_else(|| CliError::from(Error::TooFewSamples { needed: 2, got: 0 }))?;
    let line = TargetLine::along_pool((first.x_cm, first.y_cm));
    let xy: Vec<(f64, f64)> = samples.iter().map(|s| (s.x_cm, s.y_cm)).collect();
    let truth: Vec<f64> = samples.iter().map(|s| s.yaw_true_deg).collect();
    let est: Vec<f64> = samples.iter().map(|s| s.yaw_est_deg).collect();
    let report = ReplayReport {
        record: a.record.display().to_string(),
        samples: samples.len(),
        target_line: line,
        metrics: compute_metrics(&xy, &line)?,
        yaw_metrics: compute_yaw_metrics(&truth, &est)?,
    };
    out.push_str(&serde_json::to_string_pretty(&report).expect("report serializes"));
    out.push('\n');
    Ok(())
}
