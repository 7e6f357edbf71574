//! Trial runner: closes the sensor -> controller -> fin -> dynamics loop and
//! records what happened.

pub mod campaign;
pub mod io;
pub mod metrics;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::control::{
    depth_pd_step, yaw_error, yaw_pd_step, DepthControllerConfig, DepthControllerState,
    YawControllerConfig, YawControllerState,
};
use crate::dynamics::{
    dynamics_step, pitch_moment, thrust_from_gait, thrust_ripple, CollisionEvent, DynamicsInputs,
    FinAsymmetry, HydroParams, PoolEnvironment, RobotState,
};
use crate::error::{ConfigError, Error};
use crate::gait::GaitParams;
use crate::sensors::{
    imu_step, pressure_reading, pressure_to_depth, ImuModel, ImuState, PressureSensorModel,
    PressureState, SensorFrame,
};

pub use metrics::{compute_metrics, compute_yaw_metrics, ErrorMetrics, TargetLine, YawMetrics};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Level swim at the surface.
    SurfaceStraight,
    /// After the dive delay, full nose-down feathering until the target
    /// depth is sensed, then depth hold.
    DivingStraight,
    /// After the dive delay, depth PD toward the target depth.
    DepthHold,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SurfaceStraight => "surface_straight",
            Self::DivingStraight => "diving_straight",
            Self::DepthHold => "depth_hold",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "surface_straight" => Ok(Self::SurfaceStraight),
            "diving_straight" => Ok(Self::DivingStraight),
            "depth_hold" => Ok(Self::DepthHold),
            _ => Err(ConfigError::invalid(
                "scenario",
                format!("unknown scenario '{s}' (surface_straight, diving_straight, depth_hold)"),
            )),
        }
    }
}

/// Everything one trial needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialConfig {
    pub scenario: Scenario,
    pub seed: u64,
    /// Heading PD on or off. Depth control is governed by the scenario.
    pub control_enabled: bool,
    pub dt_s: f64,
    pub control_rate_hz: f64,
    pub record_rate_hz: f64,
    pub duration_s: f64,
    /// End the trial when the finish line is crossed.
    pub stop_at_finish: bool,
    pub dive_delay_s: f64,
    /// Standard deviation of the start-platform heading error, degrees.
    pub heading_jitter_deg: f64,
    pub gait: GaitParams,
    pub yaw_control: YawControllerConfig,
    pub depth_control: DepthControllerConfig,
    pub imu: ImuModel,
    pub pressure: PressureSensorModel,
    pub hydro: HydroParams,
    pub asymmetry: FinAsymmetry,
    pub pool: PoolEnvironment,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self::nominal(Scenario::SurfaceStraight)
    }
}

impl TrialConfig {
    /// Nominal pool experiment for a scenario.
    pub fn nominal(scenario: Scenario) -> Self {
        Self {
            scenario,
            seed: 0,
            control_enabled: true,
            dt_s: 0.01,
            control_rate_hz: 20.0,
            record_rate_hz: 10.0,
            duration_s: 40.0,
            stop_at_finish: true,
            dive_delay_s: 3.0,
            heading_jitter_deg: 0.5,
            gait: GaitParams::default(),
            yaw_control: YawControllerConfig::default(),
            depth_control: DepthControllerConfig::default(),
            imu: ImuModel::default(),
            pressure: PressureSensorModel::default(),
            hydro: HydroParams::default(),
            asymmetry: FinAsymmetry::default(),
            pool: PoolEnvironment::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.gait.validate()?;
        self.yaw_control.validate()?;
        self.depth_control.validate()?;
        self.imu.validate()?;
        self.pressure.validate()?;
        self.hydro.validate()?;
        self.asymmetry.validate()?;
        self.pool.validate()?;
        if !(self.dt_s > 0.0 && self.dt_s <= crate::dynamics::MAX_DT) {
            return Err(ConfigError::invalid("dt_s", "must lie in (0, 0.1]"));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(ConfigError::invalid("duration_s", "must be > 0"));
        }
        if self.dive_delay_s.is_nan() || self.dive_delay_s < 0.0 {
            return Err(ConfigError::invalid("dive_delay_s", "must be >= 0"));
        }
        if !(self.heading_jitter_deg >= 0.0 && self.heading_jitter_deg.is_finite()) {
            return Err(ConfigError::invalid("heading_jitter_deg", "must be >= 0"));
        }
        steps_per_tick("control_rate_hz", self.control_rate_hz, self.dt_s)?;
        steps_per_tick("record_rate_hz", self.record_rate_hz, self.dt_s)?;
        steps_per_tick("imu.sample_rate_hz", self.imu.sample_rate, self.dt_s)?;
        Ok(())
    }
}

/// Number of dynamics steps per tick of a rate; the period must be a whole
/// multiple of `dt`.
fn steps_per_tick(field: &'static str, rate: f64, dt: f64) -> Result<usize, ConfigError> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(ConfigError::invalid(field, "must be > 0"));
    }
    let ratio = 1.0 / (rate * dt);
    let steps = ratio.round();
    if steps < 1.0 || (ratio - steps).abs() > 1e-6 * steps {
        return Err(ConfigError::invalid(
            field,
            format!("period must be a whole multiple of dt_s ({dt} s)"),
        ));
    }
    Ok(steps as usize)
}

/// One recorded sample. The CSV export carries the first eight fields.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x_cm: f64,
    pub y_cm: f64,
    pub depth_cm: f64,
    pub yaw_true_deg: f64,
    pub yaw_est_deg: f64,
    pub amp_left_deg: f64,
    pub amp_right_deg: f64,
    pub depth_est_cm: f64,
    pub pitch_deg: f64,
    pub feather_bias_deg: f64,
    pub surge_cm_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndReason {
    Collision(CollisionEvent),
    FinishReached { t: f64 },
    Timeout { t: f64 },
    Aborted { t: f64 },
}

/// One controller invocation: what it saw and what it commanded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlStep {
    pub frame: SensorFrame,
    pub amp_left: f64,
    pub amp_right: f64,
    pub feather_bias: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scenario: Scenario,
    pub seed: u64,
    pub control_enabled: bool,
    pub samples: Vec<Sample>,
    pub events: Vec<CollisionEvent>,
    pub end: EndReason,
    pub target_line: TargetLine,
    pub metrics: ErrorMetrics,
    /// Metrics over samples strictly before the first collision, when one occurred.
    pub metrics_before_collision: Option<ErrorMetrics>,
    pub yaw_metrics: YawMetrics,
    #[serde(skip)]
    pub control_log: Vec<ControlStep>,
}

impl TrialRecord {
    pub fn finished(&self) -> bool {
        matches!(self.end, EndReason::FinishReached { .. })
    }

    pub fn collision(&self) -> Option<&CollisionEvent> {
        self.events.first()
    }

    pub fn final_sample(&self) -> &Sample {
        self.samples
            .last()
            .expect("records hold at least the start sample")
    }
}

/// Cross-track and heading metrics recomputed from samples.
pub fn record_metrics(
    samples: &[Sample],
    line: &TargetLine,
) -> crate::error::Result<(ErrorMetrics, YawMetrics)> {
    let xy: Vec<(f64, f64)> = samples.iter().map(|s| (s.x_cm, s.y_cm)).collect();
    let truth: Vec<f64> = samples.iter().map(|s| s.yaw_true_deg).collect();
    let est: Vec<f64> = samples.iter().map(|s| s.yaw_est_deg).collect();
    Ok((
        compute_metrics(&xy, line)?,
        compute_yaw_metrics(&truth, &est)?,
    ))
}

/// Failed trial: the cause plus whatever was recorded before it.
#[derive(Debug)]
pub struct TrialAbort {
    pub error: Error,
    pub partial: Option<Box<TrialRecord>>,
}

impl std::fmt::Display for TrialAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for TrialAbort {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<ConfigError> for TrialAbort {
    fn from(e: ConfigError) -> Self {
        Self {
            error: e.into(),
            partial: None,
        }
    }
}

// independent RNG streams per trial
const IMU_STREAM: u64 = 0x1111_1111_1111_1111;
const PRESSURE_STREAM: u64 = 0x2222_2222_2222_2222;
const PLATFORM_STREAM: u64 = 0x3333_3333_3333_3333;

/// Controller bank. Its only input is a [`SensorFrame`].
struct Controllers<'a> {
    cfg: &'a TrialConfig,
    yaw_state: YawControllerState,
    depth_state: DepthControllerState,
    diving: bool,
}

#[derive(Clone, Copy, Debug)]
struct Actuation {
    amp_left: f64,
    amp_right: f64,
    feather_bias: f64,
}

impl<'a> Controllers<'a> {
    fn new(cfg: &'a TrialConfig) -> Self {
        Self {
            cfg,
            yaw_state: YawControllerState::default(),
            depth_state: DepthControllerState::default(),
            diving: true,
        }
    }

    fn update(&mut self, frame: &SensorFrame) -> Actuation {
        let yaw = &self.cfg.yaw_control;
        let (amp_left, amp_right) = if self.cfg.control_enabled {
            let err = yaw_error(frame.yaw_est, yaw.theta_d);
            let (cmd, next) = yaw_pd_step(yaw, self.yaw_state, err);
            self.yaw_state = next;
            (cmd.left, cmd.right)
        } else {
            (yaw.theta_fl_l0, yaw.theta_fl_r0)
        };
        Actuation {
            amp_left,
            amp_right,
            feather_bias: self.depth_bias(frame),
        }
    }

    fn depth_bias(&mut self, frame: &SensorFrame) -> f64 {
        let depth = &self.cfg.depth_control;
        if self.cfg.scenario == Scenario::SurfaceStraight || frame.timestamp < self.cfg.dive_delay_s
        {
            return 0.0;
        }
        if self.cfg.scenario == Scenario::DivingStraight && self.diving {
            if frame.depth_est < depth.target_depth {
                return depth.feather_bias_limit;
            }
            self.diving = false;
        }
        let (bias, next) = depth_pd_step(depth, self.depth_state, frame.depth_est);
        self.depth_state = next;
        bias
    }
}

/// Replays a control log through fresh controllers and returns the commands
/// they produce. Used to check that commands depend on sensor frames alone.
pub fn replay_controllers(cfg: &TrialConfig, log: &[ControlStep]) -> Vec<(f64, f64, f64)> {
    let mut ctrl = Controllers::new(cfg);
    log.iter()
        .map(|step| {
            let a = ctrl.update(&step.frame);
            (a.amp_left, a.amp_right, a.feather_bias)
        })
        .collect()
}

/// Runs one trial to its end condition.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialRecord, TrialAbort> {
    cfg.validate()?;
    let dt = cfg.dt_s;
    let control_every = steps_per_tick("control_rate_hz", cfg.control_rate_hz, dt)?;
    let record_every = steps_per_tick("record_rate_hz", cfg.record_rate_hz, dt)?;
    let imu_every = steps_per_tick("imu.sample_rate_hz", cfg.imu.sample_rate, dt)?;
    let imu_dt = imu_every as f64 * dt;
    let total_steps = (cfg.duration_s / dt).round() as usize;

    let mut imu = ImuState::new(cfg.seed ^ IMU_STREAM);
    let mut pressure = PressureState::new(cfg.seed ^ PRESSURE_STREAM);
    let mut platform = ChaCha8Rng::seed_from_u64(cfg.seed ^ PLATFORM_STREAM);

    let mut state = cfg.pool.start_state();
    if cfg.heading_jitter_deg > 0.0 {
        let jitter = Normal::new(0.0, cfg.heading_jitter_deg)
            .expect("validated jitter")
            .sample(&mut platform);
        state.yaw = crate::control::wrap_deg(state.yaw + jitter);
    }
    let line = TargetLine::along_pool((state.x, state.y));

    let mut controllers = Controllers::new(cfg);
    let mut actuation = Actuation {
        amp_left: cfg.yaw_control.theta_fl_l0,
        amp_right: cfg.yaw_control.theta_fl_r0,
        feather_bias: 0.0,
    };
    let mut frame = SensorFrame::default();
    let mut control_log = Vec::with_capacity(total_steps / control_every + 1);
    let mut samples = Vec::with_capacity(total_steps / record_every + 2);
    let mut events = Vec::new();
    let mut end = None;

    let sample = |state: &RobotState, frame: &SensorFrame, a: &Actuation| Sample {
        t: state.t,
        x_cm: state.x,
        y_cm: state.y,
        depth_cm: state.depth,
        yaw_true_deg: state.yaw,
        yaw_est_deg: frame.yaw_est,
        amp_left_deg: a.amp_left,
        amp_right_deg: a.amp_right,
        depth_est_cm: frame.depth_est,
        pitch_deg: state.pitch,
        feather_bias_deg: a.feather_bias,
        surge_cm_s: state.surge_vel,
    };

    for k in 0..total_steps {
        let t = k as f64 * dt;
        if k % imu_every == 0 && k > 0 {
            imu_step(&cfg.imu, &mut imu, state.yaw_rate, state.pitch_rate, imu_dt);
        }
        if k % control_every == 0 {
            let reading = pressure_reading(&cfg.pressure, &mut pressure, state.depth);
            let depth = pressure_to_depth(&cfg.pressure, reading);
            frame = SensorFrame {
                yaw_est: imu.yaw_est,
                depth_est: depth.depth_cm,
                timestamp: t,
                at_surface: depth.at_surface,
            };
            actuation = controllers.update(&frame);
            control_log.push(ControlStep {
                frame,
                amp_left: actuation.amp_left,
                amp_right: actuation.amp_right,
                feather_bias: actuation.feather_bias,
            });
        }
        if k == 0 {
            samples.push(sample(&state, &frame, &actuation));
        }

        let (eff_left, eff_right) = cfg.asymmetry.apply(actuation.amp_left, actuation.amp_right);
        let thrust = thrust_from_gait(&cfg.gait, &cfg.hydro, eff_left, eff_right);
        let inputs = DynamicsInputs {
            thrust: thrust.mean_thrust * thrust_ripple(&cfg.gait, t, cfg.hydro.ripple),
            yaw_moment: thrust.yaw_moment,
            pitch_moment: pitch_moment(&cfg.hydro, actuation.feather_bias),
        };
        let outcome = match dynamics_step(&state, &inputs, &cfg.hydro, &cfg.pool, dt) {
            Ok(outcome) => outcome,
            Err(error) => {
                let partial = finish_record(
                    cfg,
                    samples,
                    events,
                    EndReason::Aborted { t: state.t },
                    line,
                    control_log,
                );
                return Err(TrialAbort {
                    error,
                    partial: Some(Box::new(partial)),
                });
            }
        };
        state = outcome.state;
        state.t = (k + 1) as f64 * dt;

        let last_step = k + 1 == total_steps;
        if let Some(mut event) = outcome.collision {
            event.t = state.t;
            events.push(event);
            end = Some(EndReason::Collision(event));
        } else if cfg.stop_at_finish && state.x >= cfg.pool.finish_line_cm {
            end = Some(EndReason::FinishReached { t: state.t });
        } else if last_step {
            end = Some(EndReason::Timeout { t: state.t });
        }

        if (k + 1) % record_every == 0 || end.is_some() {
            samples.push(sample(&state, &frame, &actuation));
        }
        if end.is_some() {
            break;
        }
    }

    let end = end.unwrap_or(EndReason::Timeout { t: state.t });
    Ok(finish_record(cfg, samples, events, end, line, control_log))
}

fn finish_record(
    cfg: &TrialConfig,
    samples: Vec<Sample>,
    events: Vec<CollisionEvent>,
    end: EndReason,
    line: TargetLine,
    control_log: Vec<ControlStep>,
) -> TrialRecord {
    let (metrics, yaw_metrics) = record_metrics(&samples, &line).unwrap_or_default();
    let metrics_before_collision = events.first().map(|c| {
        let n = samples.iter().take_while(|s| s.t < c.t).count();
        record_metrics(&samples[..n], &line)
            .map(|(m, _)| m)
            .unwrap_or_default()
    });
    TrialRecord {
        scenario: cfg.scenario,
        seed: cfg.seed,
        control_enabled: cfg.control_enabled,
        samples,
        events,
        end,
        target_line: line,
        metrics,
        metrics_before_collision,
        yaw_metrics,
        control_log,
    }
}
