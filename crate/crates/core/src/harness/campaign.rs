//! Seeded replicate runs, optionally under several variations of a base
//! configuration. Trial `i` of every variation uses seed `base_seed + i`, so
//! variations are compared on paired disturbance realizations.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_trial, ErrorMetrics, TrialConfig, TrialRecord};

/// Overrides applied on top of the base configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Variation {
    pub label: String,
    pub control_enabled: Option<bool>,
    pub target_depth_cm: Option<f64>,
}

impl Variation {
    pub fn baseline() -> Self {
        Self {
            label: "base".into(),
            ..Self::default()
        }
    }

    /// Heading PD on versus off.
    pub fn pd_on_off() -> Vec<Self> {
        vec![
            Self {
                label: "with_control".into(),
                control_enabled: Some(true),
                ..Self::default()
            },
            Self {
                label: "no_control".into(),
                control_enabled: Some(false),
                ..Self::default()
            },
        ]
    }

    fn apply(&self, base: &TrialConfig, seed: u64) -> TrialConfig {
        let mut cfg = base.clone();
        cfg.seed = seed;
        if let Some(on) = self.control_enabled {
            cfg.control_enabled = on;
        }
        if let Some(depth) = self.target_depth_cm {
            cfg.depth_control.target_depth = depth;
        }
        cfg
    }
}

#[derive(Debug)]
pub struct TrialOutcome {
    pub index: usize,
    pub seed: u64,
    pub result: Result<TrialRecord, String>,
}

impl TrialOutcome {
    pub fn metrics(&self) -> Option<&ErrorMetrics> {
        self.result.as_ref().ok().map(|r| &r.metrics)
    }
}

#[derive(Debug)]
pub struct VariationResult {
    pub variation: Variation,
    pub trials: Vec<TrialOutcome>,
}

#[derive(Debug)]
pub struct CampaignSummary {
    pub variations: Vec<VariationResult>,
}

impl CampaignSummary {
    pub fn failures(&self) -> usize {
        self.variations
            .iter()
            .flat_map(|v| &v.trials)
            .filter(|t| t.result.is_err())
            .count()
    }

    /// Table with one row per statistic and one column per trial.
    pub fn table_csv(result: &VariationResult) -> String {
        let mut out = String::from("metric");
        for t in &result.trials {
            let _ = write!(out, ",trial_{}", t.index + 1);
        }
        out.push('\n');
        type Row = (&'static str, fn(&ErrorMetrics) -> f64);
        let rows: [Row; 3] = [
            ("mean_error_cm", |m| m.mean_error),
            ("max_error_cm", |m| m.max_error),
            ("std_dev_cm", |m| m.std_dev),
        ];
        for (name, get) in rows {
            out.push_str(name);
            for t in &result.trials {
                match t.metrics() {
                    Some(m) => {
                        let _ = write!(out, ",{:.3}", get(m));
                    }
                    None => out.push_str(",failed"),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Human-readable comparison across variations.
    pub fn comparison_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14} {:>6} {:>8} {:>10} {:>10} {:>10}  end",
            "variation", "trial", "seed", "mean[cm]", "max[cm]", "std[cm]"
        );
        for v in &self.variations {
            for t in &v.trials {
                match &t.result {
                    Ok(r) => {
                        let _ = writeln!(
                            out,
                            "{:<14} {:>6} {:>8} {:>10.3} {:>10.3} {:>10.3}  {}",
                            v.variation.label,
                            t.index + 1,
                            t.seed,
                            r.metrics.mean_error,
                            r.metrics.max_error,
                            r.metrics.std_dev,
                            end_label(r)
                        );
                    }
                    Err(e) => {
                        let _ = writeln!(
                            out,
                            "{:<14} {:>6} {:>8}  failed: {e}",
                            v.variation.label,
                            t.index + 1,
                            t.seed
                        );
                    }
                }
            }
        }
        out
    }
}

pub fn end_label(r: &TrialRecord) -> String {
    use super::EndReason;
    match r.end {
        EndReason::Collision(c) => format!("collision:{:?}@{:.2}s", c.kind, c.t).to_lowercase(),
        EndReason::FinishReached { t } => format!("finish@{t:.2}s"),
        EndReason::Timeout { t } => format!("timeout@{t:.2}s"),
        EndReason::Aborted { t } => format!("aborted@{t:.2}s"),
    }
}

/// Runs `trials` seeded replicates of every variation.
///
/// `parallelism` bounds the worker count (`None` uses one worker per trial).
/// Results are ordered by variation then trial index regardless of scheduling.
pub fn run_campaign(
    base: &TrialConfig,
    trials: usize,
    variations: &[Variation],
    parallelism: Option<usize>,
) -> Result<CampaignSummary, crate::error::ConfigError> {
    if trials == 0 {
        return Err(crate::error::ConfigError::invalid(
            "replicates",
            "must be >= 1",
        ));
    }
    base.validate()?;
    let variations = if variations.is_empty() {
        vec![Variation::baseline()]
    } else {
        variations.to_vec()
    };
    let jobs: Vec<(usize, usize)> = (0..variations.len())
        .flat_map(|v| (0..trials).map(move |i| (v, i)))
        .collect();
    let run = |&(v, i): &(usize, usize)| {
        let seed = base.seed.wrapping_add(i as u64);
        let cfg = variations[v].apply(base, seed);
        TrialOutcome {
            index: i,
            seed,
            result: run_trial(&cfg).map_err(|e| e.to_string()),
        }
    };
    let threads = parallelism.unwrap_or(trials).max(1);
    let outcomes: Vec<TrialOutcome> = if threads == 1 {
        jobs.iter().map(run).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(|| jobs.par_iter().map(run).collect())
    };

    let mut outcomes = outcomes.into_iter();
    let variations = variations
        .into_iter()
        .map(|variation| VariationResult {
            variation,
            trials: outcomes.by_ref().take(trials).collect(),
        })
        .collect();
    Ok(CampaignSummary { variations })
}
