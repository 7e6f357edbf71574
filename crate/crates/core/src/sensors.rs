//! Gyro-integrating yaw estimator and hydrostatic pressure sensor.
//!
//! The controllers never see ground truth; they see a [`SensorFrame`] built
//! from these models. Both models own a seeded generator so a trial is
//! reproducible bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImuModel {
    /// Constant gyro bias, deg/s.
    #[serde(rename = "gyro_bias_dps")]
    pub gyro_bias: f64,
    /// Per-sample white noise on the yaw rate, deg/s.
    #[serde(rename = "gyro_noise_std_dps")]
    pub gyro_noise_std: f64,
    #[serde(rename = "sample_rate_hz")]
    pub sample_rate: f64,
    /// Spurious yaw rate per unit of pitch rate magnitude. Pitching
    /// manoeuvres leak into the single-axis yaw integration.
    pub pitch_coupling: f64,
}

impl Default for ImuModel {
    fn default() -> Self {
        Self {
            gyro_bias: 0.1,
            gyro_noise_std: 0.5,
            sample_rate: 100.0,
            pitch_coupling: 0.1,
        }
    }
}

impl ImuModel {
    /// A perfect gyro: no bias, no noise, no cross-coupling.
    pub fn ideal() -> Self {
        Self {
            gyro_bias: 0.0,
            gyro_noise_std: 0.0,
            pitch_coupling: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.gyro_noise_std >= 0.0 && self.gyro_noise_std.is_finite()) {
            return Err(ConfigError::invalid(
                "imu.gyro_noise_std_dps",
                "must be >= 0",
            ));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(ConfigError::invalid("imu.sample_rate_hz", "must be > 0"));
        }
        if !self.gyro_bias.is_finite() {
            return Err(ConfigError::invalid("imu.gyro_bias_dps", "must be finite"));
        }
        if !(self.pitch_coupling >= 0.0 && self.pitch_coupling.is_finite()) {
            return Err(ConfigError::invalid("imu.pitch_coupling", "must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ImuState {
    pub yaw_est: f64,
    rng: ChaCha8Rng,
}

impl ImuState {
    /// Estimate starts at zero: yaw is measured from the initial posture.
    pub fn new(seed: u64) -> Self {
        Self {
            yaw_est: 0.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

/// Integrates one gyro sample and returns the new yaw estimate in degrees.
///
/// The measured rate is `true_yaw_rate + bias + noise + coupling * |pitch_rate|`.
pub fn imu_step(
    model: &ImuModel,
    state: &mut ImuState,
    true_yaw_rate: f64,
    pitch_rate: f64,
    dt: f64,
) -> f64 {
    let noise = if model.gyro_noise_std > 0.0 {
        Normal::new(0.0, model.gyro_noise_std)
            .expect("validated noise std")
            .sample(&mut state.rng)
    } else {
        0.0
    };
    let measured =
        true_yaw_rate + model.gyro_bias + noise + model.pitch_coupling * pitch_rate.abs();
    state.yaw_est += measured * dt;
    state.yaw_est
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PressureSensorModel {
    #[serde(rename = "range_min_hpa")]
    pub range_min: f64,
    #[serde(rename = "range_max_hpa")]
    pub range_max: f64,
    #[serde(rename = "accuracy_std_hpa")]
    pub accuracy_std: f64,
    #[serde(rename = "atmospheric_hpa")]
    pub atmospheric: f64,
    /// kg/m^3
    pub water_density: f64,
    /// m/s^2
    pub gravity: f64,
}

impl Default for PressureSensorModel {
    fn default() -> Self {
        Self {
            range_min: 260.0,
            range_max: 1260.0,
            accuracy_std: 0.1,
            atmospheric: 1000.0,
            water_density: 1000.0,
            gravity: 9.81,
        }
    }
}

impl PressureSensorModel {
    pub fn noiseless() -> Self {
        Self {
            accuracy_std: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.range_min.is_nan() || self.range_max.is_nan() || self.range_min >= self.range_max {
            return Err(ConfigError::invalid(
                "pressure.range_min_hpa",
                "must be < range_max_hpa",
            ));
        }
        if !(self.accuracy_std >= 0.0 && self.accuracy_std.is_finite()) {
            return Err(ConfigError::invalid(
                "pressure.accuracy_std_hpa",
                "must be >= 0",
            ));
        }
        if !(self.range_min..=self.range_max).contains(&self.atmospheric) {
            return Err(ConfigError::invalid(
                "pressure.atmospheric_hpa",
                "must lie inside the sensor range",
            ));
        }
        if !(self.water_density > 0.0 && self.gravity > 0.0) {
            return Err(ConfigError::invalid(
                "pressure.water_density",
                "density and gravity must be > 0",
            ));
        }
        Ok(())
    }

    /// Hydrostatic pressure per cm of depth, hPa/cm.
    fn hpa_per_cm(&self) -> f64 {
        self.water_density * self.gravity / 100.0 / 100.0
    }
}

#[derive(Clone, Debug)]
pub struct PressureState {
    rng: ChaCha8Rng,
}

impl PressureState {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

/// Sensor reading in hPa for a true depth in cm, clamped to the sensor range.
pub fn pressure_reading(
    model: &PressureSensorModel,
    state: &mut PressureState,
    true_depth: f64,
) -> f64 {
    let noise = if model.accuracy_std > 0.0 {
        Normal::new(0.0, model.accuracy_std)
            .expect("validated accuracy std")
            .sample(&mut state.rng)
    } else {
        0.0
    };
    // rho * g * depth[m] is Pa; /100 for hPa
    let hydrostatic = model.water_density * model.gravity * (true_depth / 100.0) / 100.0;
    (model.atmospheric + hydrostatic + noise).clamp(model.range_min, model.range_max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthReading {
    pub depth_cm: f64,
    /// Reading was at or below atmospheric and was pinned to the surface.
    pub at_surface: bool,
}

/// Inverts the hydrostatic relation; readings below atmospheric map to 0 cm.
pub fn pressure_to_depth(model: &PressureSensorModel, reading: f64) -> DepthReading {
    let excess_pa = (reading - model.atmospheric) * 100.0;
    if excess_pa <= 0.0 {
        return DepthReading {
            depth_cm: 0.0,
            at_surface: true,
        };
    }
    DepthReading {
        depth_cm: excess_pa / (model.water_density * model.gravity) * 100.0,
        at_surface: false,
    }
}

/// Deepest depth the sensor can report before saturating, cm.
pub fn max_measurable_depth(model: &PressureSensorModel) -> f64 {
    (model.range_max - model.atmospheric) / model.hpa_per_cm()
}

/// What the controllers are allowed to see.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SensorFrame {
    pub yaw_est: f64,
    pub depth_est: f64,
    pub timestamp: f64,
    pub at_surface: bool,
}
