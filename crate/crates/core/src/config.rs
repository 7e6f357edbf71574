//! TOML run configuration and persisted calibration files.
//!
//! A run file holds the [`TrialConfig`] fields at the top level, plus a few
//! run-level keys:
//!
//! ```toml
//! scenario = "surface_straight"
//! seed = 1
//! replicates = 3
//! auto_calibrate = true          # tune hydro.c_thrust before running
//! # hydro_file = "out/hydro.toml" # or reuse a persisted calibration
//!
//! [gait]
//! theta_fl_max_deg = 30.0
//! theta_fe_max_deg = 45.0
//! frequency_hz = 0.75
//!
//! [calibration]
//! target_speed_cm_s = 20.0
//! ```
//!
//! Every omitted key takes the nominal pool-experiment default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    calibrate, CalibrationOptions, CalibrationReport, HydroParams, PoolEnvironment, Verification,
};
use crate::error::{ConfigError, Error, Result};
use crate::gait::GaitParams;
use crate::harness::TrialConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub trial: TrialConfig,
    pub calibration: CalibrationOptions,
    pub replicates: usize,
    pub auto_calibrate: bool,
    pub hydro_file: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            trial: TrialConfig::default(),
            calibration: CalibrationOptions::default(),
            replicates: 1,
            auto_calibrate: true,
            hydro_file: None,
        }
    }
}

const RUN_KEYS: [&str; 4] = ["calibration", "replicates", "auto_calibrate", "hydro_file"];

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            message,
        };
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| parse_err(e.to_string()))?;
        let mut run = RunConfig::default();
        let mut taken = std::collections::BTreeMap::new();
        for key in RUN_KEYS {
            if let Some(v) = table.remove(key) {
                taken.insert(key, v);
            }
        }
        if let Some(v) = taken.remove("calibration") {
            run.calibration = v
                .try_into()
                .map_err(|e: toml::de::Error| parse_err(format!("calibration: {e}")))?;
        }
        if let Some(v) = taken.remove("replicates") {
            let n = v
                .as_integer()
                .ok_or_else(|| ConfigError::invalid("replicates", "must be an integer"))?;
            if n < 1 {
                return Err(ConfigError::invalid("replicates", "must be >= 1").into());
            }
            run.replicates = n as usize;
        }
        if let Some(v) = taken.remove("auto_calibrate") {
            run.auto_calibrate = v
                .as_bool()
                .ok_or_else(|| ConfigError::invalid("auto_calibrate", "must be a boolean"))?;
        }
        if let Some(v) = taken.remove("hydro_file") {
            let p = v
                .as_str()
                .ok_or_else(|| ConfigError::invalid("hydro_file", "must be a path string"))?;
            // relative to the config file
            let base = origin.parent().unwrap_or(Path::new("."));
            run.hydro_file = Some(base.join(p));
        }
        run.trial = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| parse_err(e.to_string()))?;
        run.validate()?;
        Ok(run)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.trial.validate()?;
        self.calibration.validate()?;
        if self.replicates == 0 {
            return Err(ConfigError::invalid("replicates", "must be >= 1"));
        }
        Ok(())
    }

    /// Fills in `trial.hydro` from a persisted calibration or by calibrating.
    pub fn resolve_hydro(&mut self) -> Result<Option<CalibrationReport>> {
        if let Some(path) = &self.hydro_file {
            let file = CalibrationFile::load(path)?;
            self.trial.hydro = file.hydro;
            return Ok(None);
        }
        if !self.auto_calibrate {
            return Ok(None);
        }
        let report = calibrate(
            &self.trial.gait,
            &self.trial.hydro,
            &self.trial.pool,
            &self.calibration,
        )?;
        self.trial.hydro = report.hydro;
        Ok(Some(report))
    }

    pub fn calibration_inputs(&self) -> CalibrationInputs {
        CalibrationInputs {
            gait: self.trial.gait,
            base: self.trial.hydro,
            pool: self.trial.pool,
            options: self.calibration,
        }
    }
}

/// Everything the calibrated coefficient depends on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationInputs {
    pub gait: GaitParams,
    /// Fixed coefficients; `c_thrust` is only the starting guess.
    pub base: HydroParams,
    pub pool: PoolEnvironment,
    pub options: CalibrationOptions,
}

/// Persisted output of the `calibrate` command.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationFile {
    pub iterations: u32,
    pub hydro: HydroParams,
    pub verification: Verification,
    pub inputs: CalibrationInputs,
}

impl CalibrationFile {
    pub fn new(inputs: CalibrationInputs, report: &CalibrationReport) -> Self {
        Self {
            iterations: report.iterations,
            hydro: report.hydro,
            verification: report.verification,
            inputs,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("calibration file serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}
