//! Trial record files.
//!
//! * `<stem>.jsonl`: one [`Sample`] object per line.
//! * `<stem>.csv`: trajectory export with a fixed header.
//! * `<stem>.summary.json`: end reason, events and metrics.
//!
//! Floats are written in shortest round-trip form, so identical records give
//! identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    CollisionEvent, EndReason, ErrorMetrics, Sample, Scenario, TargetLine, TrialRecord, YawMetrics,
};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "t,x_cm,y_cm,depth_cm,yaw_true_deg,yaw_est_deg,amp_left_deg,amp_right_deg";

pub fn samples_to_jsonl(samples: &[Sample]) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&serde_json::to_string(s).expect("samples serialize"));
        out.push('\n');
    }
    out
}

pub fn samples_to_csv(samples: &[Sample]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.t,
            s.x_cm,
            s.y_cm,
            s.depth_cm,
            s.yaw_true_deg,
            s.yaw_est_deg,
            s.amp_left_deg,
            s.amp_right_deg
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub scenario: Scenario,
    pub seed: u64,
    pub control_enabled: bool,
    pub end: EndReason,
    pub events: Vec<CollisionEvent>,
    pub target_line: TargetLine,
    pub samples: usize,
    pub metrics: ErrorMetrics,
    pub metrics_before_collision: Option<ErrorMetrics>,
    pub yaw_metrics: YawMetrics,
}

impl From<&TrialRecord> for TrialSummary {
    fn from(r: &TrialRecord) -> Self {
        Self {
            scenario: r.scenario,
            seed: r.seed,
            control_enabled: r.control_enabled,
            end: r.end,
            events: r.events.clone(),
            target_line: r.target_line,
            samples: r.samples.len(),
            metrics: r.metrics,
            metrics_before_collision: r.metrics_before_collision,
            yaw_metrics: r.yaw_metrics,
        }
    }
}

/// `dir/stem.ext`, or `dir/stem-N.ext` with the smallest N that is free.
pub fn unique_path(dir: &Path, stem: &str, ext: &str) -> PathBuf {
    let first = dir.join(format!("{stem}.{ext}"));
    if !first.exists() {
        return first;
    }
    (1..)
        .map(|n| dir.join(format!("{stem}-{n}.{ext}")))
        .find(|p| !p.exists())
        .expect("unbounded search")
}

/// Picks a stem none of whose record files exist yet.
pub fn unique_stem(dir: &Path, stem: &str) -> String {
    let taken = |s: &str| {
        ["jsonl", "csv", "summary.json"]
            .iter()
            .any(|ext| dir.join(format!("{s}.{ext}")).exists())
    };
    if !taken(stem) {
        return stem.to_string();
    }
    (1..)
        .map(|n| format!("{stem}-{n}"))
        .find(|s| !taken(s))
        .expect("unbounded search")
}

pub fn write_new(path: &Path, contents: &str) -> Result<()> {
    use std::io::Write;
    let mut f = fs::OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Writes the three record files under a fresh stem and returns their paths.
pub fn write_record(dir: &Path, stem: &str, record: &TrialRecord) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = unique_stem(dir, stem);
    let summary = serde_json::to_string_pretty(&TrialSummary::from(record))
        .expect("summary serializes")
        + "\n";
    let files = [
        (format!("{stem}.jsonl"), samples_to_jsonl(&record.samples)),
        (format!("{stem}.csv"), samples_to_csv(&record.samples)),
        (format!("{stem}.summary.json"), summary),
    ];
    let mut paths = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        write_new(&path, &body)?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<Sample>> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut samples = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let sample = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {}: {e}", i + 1),
        })?;
        samples.push(sample);
    }
    Ok(samples)
}

pub fn read_csv(path: &Path) -> Result<Vec<Sample>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => {
            return Err(parse_err(1, format!("unexpected header {other:?}")));
        }
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(i + 2, e.to_string()))?;
        let [t, x, y, depth, yaw_true, yaw_est, left, right] = fields[..] else {
            return Err(parse_err(
                i + 2,
                format!("expected 8 columns, got {}", fields.len()),
            ));
        };
        samples.push(Sample {
            t,
            x_cm: x,
            y_cm: y,
            depth_cm: depth,
            yaw_true_deg: yaw_true,
            yaw_est_deg: yaw_est,
            amp_left_deg: left,
            amp_right_deg: right,
            ..Sample::default()
        });
    }
    Ok(samples)
}

/// Reads samples from a `.jsonl` or `.csv` record.
pub fn read_samples(path: &Path) -> Result<Vec<Sample>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_csv(path),
        _ => read_jsonl(path),
    }
}
