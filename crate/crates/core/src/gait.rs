//! Pectoral-fin gait waveforms.
//!
//! Flapping and feathering are sinusoids of the same frequency, with
//! feathering lagging flapping by a phase offset (a quarter period by
//! default). All public angles are degrees; radians only appear inside the
//! trigonometric evaluation.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::ConfigError;

/// Shape of the open-loop fin oscillation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitParams {
    /// Maximum flapping angle, degrees.
    #[serde(rename = "theta_fl_max_deg")]
    pub theta_fl_max: f64,
    /// Maximum feathering angle, degrees.
    #[serde(rename = "theta_fe_max_deg")]
    pub theta_fe_max: f64,
    /// Oscillation frequency, Hz.
    #[serde(rename = "frequency_hz")]
    pub frequency: f64,
    /// Lag of feathering behind flapping, degrees.
    #[serde(rename = "phase_offset_deg", default = "default_phase_offset")]
    pub phase_offset: f64,
}

fn default_phase_offset() -> f64 {
    GaitParams::DEFAULT_PHASE_OFFSET
}

impl Default for GaitParams {
    /// The nominal pool gait: 30 deg flapping, 45 deg feathering, 0.75 Hz.
    fn default() -> Self {
        Self {
            theta_fl_max: 30.0,
            theta_fe_max: 45.0,
            frequency: 0.75,
            phase_offset: Self::DEFAULT_PHASE_OFFSET,
        }
    }
}

impl GaitParams {
    pub const DEFAULT_PHASE_OFFSET: f64 = 90.0;

    /// Builds validated parameters with the default 90 deg phase offset.
    pub fn new(theta_fl_max: f64, theta_fe_max: f64, frequency: f64) -> Result<Self, ConfigError> {
        Self::with_phase(
            theta_fl_max,
            theta_fe_max,
            frequency,
            Self::DEFAULT_PHASE_OFFSET,
        )
    }

    pub fn with_phase(
        theta_fl_max: f64,
        theta_fe_max: f64,
        frequency: f64,
        phase_offset: f64,
    ) -> Result<Self, ConfigError> {
        let params = Self {
            theta_fl_max,
            theta_fe_max,
            frequency,
            phase_offset,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        check_amplitude("gait.theta_fl_max_deg", self.theta_fl_max)?;
        check_amplitude("gait.theta_fe_max_deg", self.theta_fe_max)?;
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(ConfigError::invalid("gait.frequency_hz", "must be > 0"));
        }
        if !self.phase_offset.is_finite() {
            return Err(ConfigError::invalid(
                "gait.phase_offset_deg",
                "must be finite",
            ));
        }
        Ok(())
    }

    /// One full gait cycle, seconds.
    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }

    fn phase_rad(&self, t: f64) -> f64 {
        2.0 * PI * t * self.frequency
    }
}

fn check_amplitude(field: &'static str, value: f64) -> Result<(), ConfigError> {
    if (0.0..=90.0).contains(&value) {
        Ok(())
    } else {
        Err(ConfigError::invalid(field, "must lie in [0, 90] degrees"))
    }
}

/// Instantaneous fin angles (or angular rates), degrees or degrees/second.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FinAngles {
    pub flapping: f64,
    pub feathering: f64,
}

/// Flapping and feathering angles at time `t` seconds.
pub fn gait_angles(params: &GaitParams, t: f64) -> FinAngles {
    let phase = params.phase_rad(t);
    FinAngles {
        flapping: params.theta_fl_max * phase.sin(),
        feathering: params.theta_fe_max * (phase - params.phase_offset.to_radians()).sin(),
    }
}

/// Analytic time derivative of [`gait_angles`], degrees/second.
pub fn gait_velocity(params: &GaitParams, t: f64) -> FinAngles {
    let phase = params.phase_rad(t);
    let omega = 2.0 * PI * params.frequency;
    FinAngles {
        flapping: omega * params.theta_fl_max * phase.cos(),
        feathering: omega * params.theta_fe_max * (phase - params.phase_offset.to_radians()).cos(),
    }
}

/// Command sent to both fins for one instant, after controller modulation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FinCommand {
    pub left: FinAngles,
    pub right: FinAngles,
}

impl FinCommand {
    /// Evaluates the gait with per-side flapping amplitudes and a shared
    /// feathering offset (positive pitches the nose down).
    pub fn at(
        params: &GaitParams,
        t: f64,
        left_amplitude: f64,
        right_amplitude: f64,
        feather_bias: f64,
    ) -> Self {
        let side = |amplitude: f64| {
            let p = GaitParams {
                theta_fl_max: amplitude,
                ..*params
            };
            let mut angles = gait_angles(&p, t);
            angles.feathering += feather_bias;
            angles
        };
        Self {
            left: side(left_amplitude),
            right: side(right_amplitude),
        }
    }
}
