//! Control and simulation stack for a flapping-fin (manta-style) underwater
//! robot.
//!
//! * [`gait`]: flapping/feathering waveforms.
//! * [`control`]: heading PD by differential flapping amplitude, depth PD by
//!   feathering bias.
//! * [`sensors`]: gyro-integrating yaw estimate and pressure depth sensor.
//! * [`dynamics`]: lumped 5-DOF pool model and thrust calibration.
//! * [`harness`]: trials, error metrics, record files and campaigns.
//! * [`config`] and [`cli`]: the `manta-sim` command line.

pub mod cli;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod gait;
pub mod harness;
pub mod sensors;

pub use error::{ConfigError, Error, Result};
