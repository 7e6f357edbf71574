//! Discrete PD loops for heading and depth.
//!
//! The heading loop mixes a correction into the two flapping amplitudes with
//! opposite signs, so total flapping effort is unchanged. The depth loop adds
//! a symmetric bias to both fins' feathering angle. Both are written in
//! per-sample form: the derivative term is a first difference between
//! consecutive control steps, so its effective gain scales with control rate.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Wraps an angle in degrees to (-180, 180].
pub fn wrap_deg(angle: f64) -> f64 {
    if angle > -180.0 && angle <= 180.0 {
        return angle;
    }
    let wrapped = (angle + 180.0).rem_euclid(360.0) - 180.0;
    if wrapped == -180.0 {
        180.0
    } else {
        wrapped
    }
}

/// Heading error `theta_yaw - theta_d`, wrapped to (-180, 180].
pub fn yaw_error(theta_yaw: f64, theta_d: f64) -> f64 {
    wrap_deg(theta_yaw - theta_d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct YawControllerConfig {
    /// Degrees of amplitude per degree of heading error.
    pub kp: f64,
    /// Degrees of amplitude per degree of error change between control steps.
    pub kd: f64,
    #[serde(rename = "target_deg")]
    pub theta_d: f64,
    #[serde(rename = "baseline_right_deg")]
    pub theta_fl_r0: f64,
    #[serde(rename = "baseline_left_deg")]
    pub theta_fl_l0: f64,
    #[serde(rename = "amplitude_min_deg")]
    pub amplitude_min: f64,
    #[serde(rename = "amplitude_max_deg")]
    pub amplitude_max: f64,
}

impl Default for YawControllerConfig {
    fn default() -> Self {
        Self {
            kp: 1.5,
            kd: 6.0,
            theta_d: 0.0,
            theta_fl_r0: 30.0,
            theta_fl_l0: 30.0,
            amplitude_min: 0.0,
            amplitude_max: 60.0,
        }
    }
}

impl YawControllerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.kp >= 0.0 && self.kp.is_finite()) {
            return Err(ConfigError::invalid("yaw_control.kp", "must be >= 0"));
        }
        if !(self.kd >= 0.0 && self.kd.is_finite()) {
            return Err(ConfigError::invalid("yaw_control.kd", "must be >= 0"));
        }
        if !self.theta_d.is_finite() {
            return Err(ConfigError::invalid(
                "yaw_control.target_deg",
                "must be finite",
            ));
        }
        if !(0.0 <= self.amplitude_min && self.amplitude_max <= 90.0) {
            return Err(ConfigError::invalid(
                "yaw_control.amplitude_min_deg",
                "clamp bounds must satisfy 0 <= min <= max <= 90",
            ));
        }
        for (field, baseline) in [
            ("yaw_control.baseline_right_deg", self.theta_fl_r0),
            ("yaw_control.baseline_left_deg", self.theta_fl_l0),
        ] {
            if !(self.amplitude_min <= baseline && baseline <= self.amplitude_max) {
                return Err(ConfigError::invalid(
                    field,
                    "baseline must lie within [amplitude_min_deg, amplitude_max_deg]",
                ));
            }
        }
        Ok(())
    }

    /// Config with both baselines set to the gait's flapping amplitude.
    pub fn with_baseline(mut self, amplitude: f64) -> Self {
        self.theta_fl_r0 = amplitude;
        self.theta_fl_l0 = amplitude;
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct YawControllerState {
    pub prev_error: f64,
}

/// Output of one heading-control step, before and after clamping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YawCommand {
    pub right: f64,
    pub left: f64,
    pub right_unclamped: f64,
    pub left_unclamped: f64,
}

/// One heading PD step.
///
/// A positive error (nose left of target) shrinks the right stroke and grows
/// the left one.
pub fn yaw_pd_step(
    cfg: &YawControllerConfig,
    state: YawControllerState,
    theta_err: f64,
) -> (YawCommand, YawControllerState) {
    let delta = theta_err - state.prev_error;
    let right_unclamped = cfg.theta_fl_r0 - cfg.kp * theta_err - cfg.kd * delta;
    let left_unclamped = cfg.theta_fl_l0 + cfg.kp * theta_err + cfg.kd * delta;
    let command = YawCommand {
        right: right_unclamped.clamp(cfg.amplitude_min, cfg.amplitude_max),
        left: left_unclamped.clamp(cfg.amplitude_min, cfg.amplitude_max),
        right_unclamped,
        left_unclamped,
    };
    (
        command,
        YawControllerState {
            prev_error: theta_err,
        },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DepthControllerConfig {
    #[serde(rename = "target_depth_cm")]
    pub target_depth: f64,
    /// Degrees of feathering bias per cm of depth error.
    pub kp_depth: f64,
    /// Degrees of feathering bias per cm of error change between control steps.
    pub kd_depth: f64,
    #[serde(rename = "feather_bias_limit_deg")]
    pub feather_bias_limit: f64,
}

impl Default for DepthControllerConfig {
    fn default() -> Self {
        Self {
            target_depth: 10.0,
            kp_depth: 1.0,
            kd_depth: 20.0,
            feather_bias_limit: 20.0,
        }
    }
}

impl DepthControllerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.target_depth.is_finite() && self.target_depth >= 0.0) {
            return Err(ConfigError::invalid(
                "depth_control.target_depth_cm",
                "must be >= 0",
            ));
        }
        if !(self.kp_depth >= 0.0 && self.kp_depth.is_finite()) {
            return Err(ConfigError::invalid(
                "depth_control.kp_depth",
                "must be >= 0",
            ));
        }
        if !(self.kd_depth >= 0.0 && self.kd_depth.is_finite()) {
            return Err(ConfigError::invalid(
                "depth_control.kd_depth",
                "must be >= 0",
            ));
        }
        if !(0.0..=45.0).contains(&self.feather_bias_limit) {
            return Err(ConfigError::invalid(
                "depth_control.feather_bias_limit_deg",
                "must lie in [0, 45]",
            ));
        }
        Ok(())
    }
}

/// The first step after a reset has no derivative term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DepthControllerState {
    pub prev_error: Option<f64>,
}

/// One depth PD step. Positive bias pitches the nose down.
pub fn depth_pd_step(
    cfg: &DepthControllerConfig,
    state: DepthControllerState,
    depth_est: f64,
) -> (f64, DepthControllerState) {
    let error = cfg.target_depth - depth_est;
    let delta = state.prev_error.map_or(0.0, |prev| error - prev);
    let bias = (cfg.kp_depth * error + cfg.kd_depth * delta)
        .clamp(-cfg.feather_bias_limit, cfg.feather_bias_limit);
    (
        bias,
        DepthControllerState {
            prev_error: Some(error),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn symmetric(kp: f64, kd: f64) -> YawControllerConfig {
        YawControllerConfig {
            kp,
            kd,
            theta_d: 0.0,
            theta_fl_r0: 30.0,
            theta_fl_l0: 30.0,
            amplitude_min: 0.0,
            amplitude_max: 90.0,
        }
    }

    #[test]
    fn yaw_error_examples() {
        assert_eq!(yaw_error(0.0, 0.0), 0.0);
        assert_eq!(yaw_error(10.0, 4.0), 6.0);
        assert_eq!(yaw_error(-175.0, 175.0), 10.0);
        assert_eq!(yaw_error(175.0, -175.0), -10.0);
        assert_eq!(yaw_error(180.0, 0.0), 180.0);
        assert_eq!(yaw_error(-180.0, 0.0), 180.0);
    }

    /// Wrap oracle: search the representatives x + 360 k for the one in (-180, 180].
    fn wrap_oracle(x: f64) -> f64 {
        (-4..=4)
            .map(|k| x + 360.0 * k as f64)
            .find(|v| *v > -180.0 && *v <= 180.0)
            .unwrap()
    }

    proptest! {
        #[test]
        fn wrap_matches_oracle(a in -700.0f64..700.0, b in -700.0f64..700.0) {
            let got = yaw_error(a, b);
            let want = wrap_oracle(a - b);
            prop_assert!((got - want).abs() < 1e-9, "{got} vs {want}");
            prop_assert!(got > -180.0 && got <= 180.0);
        }

        #[test]
        fn sign_correctness(err in 1e-6f64..90.0, kp in 0.01f64..5.0, kd in 0.0f64..5.0) {
            let (cmd, _) = yaw_pd_step(&symmetric(kp, kd), YawControllerState::default(), err);
            prop_assert!(cmd.right_unclamped < 30.0);
            prop_assert!(cmd.left_unclamped > 30.0);
        }

        #[test]
        fn clamp_safety(err in -180.0f64..180.0, prev in -180.0f64..180.0, kp in 0.0f64..20.0, kd in 0.0f64..20.0) {
            let cfg = YawControllerConfig { amplitude_min: 5.0, amplitude_max: 45.0, ..symmetric(kp, kd) };
            let (cmd, _) = yaw_pd_step(&cfg, YawControllerState { prev_error: prev }, err);
            prop_assert!((5.0..=45.0).contains(&cmd.right));
            prop_assert!((5.0..=45.0).contains(&cmd.left));
        }

        #[test]
        fn zero_gain_passthrough(err in -180.0f64..180.0, prev in -180.0f64..180.0) {
            let (cmd, _) = yaw_pd_step(&symmetric(0.0, 0.0), YawControllerState { prev_error: prev }, err);
            prop_assert_eq!(cmd.right, 30.0);
            prop_assert_eq!(cmd.left, 30.0);
        }
    }

    #[test]
    fn zero_error_keeps_baseline() {
        let (cmd, state) = yaw_pd_step(&symmetric(0.7, 0.3), YawControllerState::default(), 0.0);
        assert_eq!((cmd.right, cmd.left), (30.0, 30.0));
        assert_eq!(state.prev_error, 0.0);
    }

    #[test]
    fn hand_computed_step() {
        let (cmd, state) = yaw_pd_step(
            &symmetric(0.5, 0.1),
            YawControllerState { prev_error: 6.0 },
            10.0,
        );
        assert!((cmd.right - 24.6).abs() < 1e-12);
        assert!((cmd.left - 35.4).abs() < 1e-12);
        assert_eq!(state.prev_error, 10.0);
    }

    #[test]
    fn large_gain_clamps() {
        let cfg = YawControllerConfig {
            amplitude_max: 45.0,
            ..symmetric(10.0, 0.0)
        };
        let (cmd, _) = yaw_pd_step(&cfg, YawControllerState::default(), 10.0);
        assert_eq!((cmd.right_unclamped, cmd.left_unclamped), (-70.0, 130.0));
        assert_eq!((cmd.right, cmd.left), (0.0, 45.0));
    }

    #[test]
    fn replay_is_deterministic() {
        let cfg = symmetric(0.8, 2.0);
        let errors: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin() * 12.0).collect();
        let run = || {
            let mut state = YawControllerState::default();
            errors
                .iter()
                .map(|&e| {
                    let (cmd, next) = yaw_pd_step(&cfg, state, e);
                    state = next;
                    (cmd.right.to_bits(), cmd.left.to_bits())
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn depth_examples() {
        let cfg = |kp: f64| DepthControllerConfig {
            target_depth: 10.0,
            kp_depth: kp,
            kd_depth: 0.0,
            feather_bias_limit: 20.0,
        };
        let (b, _) = depth_pd_step(&cfg(1.0), DepthControllerState::default(), 10.0);
        assert_eq!(b, 0.0);
        let (b, _) = depth_pd_step(&cfg(1.0), DepthControllerState::default(), 0.0);
        assert_eq!(b, 10.0);
        let (b, _) = depth_pd_step(&cfg(5.0), DepthControllerState::default(), 0.0);
        assert_eq!(b, 20.0);
    }

    #[test]
    fn depth_derivative_uses_first_difference() {
        let cfg = DepthControllerConfig {
            target_depth: 10.0,
            kp_depth: 0.0,
            kd_depth: 2.0,
            feather_bias_limit: 45.0,
        };
        let (b0, s) = depth_pd_step(&cfg, DepthControllerState::default(), 2.0);
        assert_eq!(b0, 0.0);
        // error 8 -> 7: approaching target, derivative pulls back
        let (b1, _) = depth_pd_step(&cfg, s, 3.0);
        assert_eq!(b1, -2.0);
    }

    #[test]
    fn config_validation() {
        assert!(YawControllerConfig::default().validate().is_ok());
        let bad = YawControllerConfig {
            kp: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().unwrap_err().field.contains("kp"));
        let bad = YawControllerConfig {
            amplitude_max: 20.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = DepthControllerConfig {
            feather_bias_limit: 50.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
