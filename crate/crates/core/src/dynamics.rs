//! Lumped 5-DOF swimming model: surge, yaw and pitch rates driving a pose
//! of (x, y, depth, yaw, pitch) inside a rectangular pool.
//!
//! Frame conventions: `x` runs along the pool from the start edge, `y`
//! across it toward the robot's left (port) side, depth is positive down.
//! Yaw is positive toward +y; pitch is positive nose-down, so a positive
//! pitch with forward speed increases depth.
//!
//! Thrust is a per-cycle mean proportional to `f^2 * A^2` with an optional
//! ripple at twice the flapping frequency. Drag is quadratic in surge speed.
//! All rates are advanced with a semi-implicit step: damping terms are
//! evaluated at the new velocity, then the pose is advanced with the new
//! velocities.

use serde::{Deserialize, Serialize};

use crate::control::wrap_deg;
use crate::error::{ConfigError, Error, Result};
use crate::gait::{gait_velocity, GaitParams};

/// Hydrodynamic coefficients. None of these are measured; `c_thrust` is
/// normally set by [`calibrate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HydroParams {
    /// Surge acceleration per (Hz * deg)^2 of mean flapping, cm/s^2.
    pub c_thrust: f64,
    /// Quadratic drag, 1/cm.
    pub c_drag: f64,
    /// Yaw acceleration per degree of left-right amplitude difference, deg/s^2.
    pub c_yaw: f64,
    /// Pitch acceleration per degree of feathering bias, deg/s^2.
    pub c_pitch: f64,
    /// Linear yaw-rate damping, 1/s.
    pub yaw_damping: f64,
    /// Linear pitch-rate damping, 1/s.
    pub pitch_damping: f64,
    /// Hydrostatic restoring stiffness toward level trim, 1/s^2.
    pub pitch_restoring: f64,
    /// Lumped mass factor including added mass.
    pub mass: f64,
    /// Lumped rotational inertia factor.
    pub inertia: f64,
    /// Thrust ripple amplitude as a fraction of the mean.
    pub ripple: f64,
}

impl Default for HydroParams {
    fn default() -> Self {
        Self {
            // closed-form estimate for 20 cm/s at the nominal gait; calibrate() refines it
            c_thrust: 0.05 * 20.0 * 20.0 / (0.75 * 0.75 * 30.0 * 30.0),
            c_drag: 0.05,
            c_yaw: 0.6,
            c_pitch: 2.0,
            yaw_damping: 1.0,
            pitch_damping: 3.0,
            pitch_restoring: 2.0,
            mass: 1.0,
            inertia: 1.0,
            ripple: 0.2,
        }
    }
}

impl HydroParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("hydro.c_thrust", self.c_thrust),
            ("hydro.c_drag", self.c_drag),
            ("hydro.c_yaw", self.c_yaw),
            ("hydro.c_pitch", self.c_pitch),
            ("hydro.yaw_damping", self.yaw_damping),
            ("hydro.pitch_damping", self.pitch_damping),
            ("hydro.pitch_restoring", self.pitch_restoring),
            ("hydro.mass", self.mass),
            ("hydro.inertia", self.inertia),
        ];
        for (field, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::invalid(field, "must be > 0"));
            }
        }
        if !(0.0..1.0).contains(&self.ripple) {
            return Err(ConfigError::invalid("hydro.ripple", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Per-side thrust efficiency. Models actuation timing and centre-of-gravity
/// deviations that keep the uncontrolled robot from swimming straight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FinAsymmetry {
    pub left: f64,
    pub right: f64,
}

impl Default for FinAsymmetry {
    fn default() -> Self {
        Self {
            left: 1.0,
            right: 0.95,
        }
    }
}

impl FinAsymmetry {
    pub const NONE: Self = Self {
        left: 1.0,
        right: 1.0,
    };

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, v) in [
            ("asymmetry.left", self.left),
            ("asymmetry.right", self.right),
        ] {
            if !(v > 0.0 && v <= 2.0) {
                return Err(ConfigError::invalid(field, "must lie in (0, 2]"));
            }
        }
        Ok(())
    }

    /// Effective (left, right) amplitudes for commanded amplitudes.
    pub fn apply(&self, left: f64, right: f64) -> (f64, f64) {
        (left * self.left, right * self.right)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoolEnvironment {
    #[serde(rename = "length_cm")]
    pub length: f64,
    #[serde(rename = "width_cm")]
    pub width: f64,
    #[serde(rename = "depth_cm")]
    pub depth: f64,
    /// Start platform position along the pool.
    pub start_x_cm: f64,
    pub start_y_cm: f64,
    pub start_yaw_deg: f64,
    /// Distance from the start edge at which a run counts as complete.
    pub finish_line_cm: f64,
}

impl Default for PoolEnvironment {
    fn default() -> Self {
        Self {
            length: 1500.0,
            width: 200.0,
            depth: 48.5,
            start_x_cm: 50.0,
            start_y_cm: 100.0,
            start_yaw_deg: 0.0,
            finish_line_cm: 500.0,
        }
    }
}

impl PoolEnvironment {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.length > 0.0 && self.width > 0.0 && self.depth > 0.0) {
            return Err(ConfigError::invalid(
                "pool.length_cm",
                "dimensions must be > 0",
            ));
        }
        if !(0.0 < self.start_x_cm && self.start_x_cm < self.length) {
            return Err(ConfigError::invalid(
                "pool.start_x_cm",
                "start must lie inside the pool",
            ));
        }
        if !(0.0 < self.start_y_cm && self.start_y_cm < self.width) {
            return Err(ConfigError::invalid(
                "pool.start_y_cm",
                "start must lie inside the pool",
            ));
        }
        if !self.start_yaw_deg.is_finite() {
            return Err(ConfigError::invalid("pool.start_yaw_deg", "must be finite"));
        }
        if !(self.finish_line_cm > self.start_x_cm && self.finish_line_cm <= self.length) {
            return Err(ConfigError::invalid(
                "pool.finish_line_cm",
                "must lie between the start and the far wall",
            ));
        }
        Ok(())
    }

    pub fn start_state(&self) -> RobotState {
        RobotState {
            x: self.start_x_cm,
            y: self.start_y_cm,
            yaw: wrap_deg(self.start_yaw_deg),
            ..RobotState::default()
        }
    }
}

/// Ground truth of the simulation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
    pub yaw: f64,
    pub pitch: f64,
    pub surge_vel: f64,
    pub yaw_rate: f64,
    pub pitch_rate: f64,
    pub t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionKind {
    Bottom,
    Wall,
    /// Broached the surface nose-up from below.
    Surface,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub kind: CollisionKind,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub depth: f64,
}

/// Nose-up pitch beyond which reaching the surface counts as a broach.
const SURFACE_BREACH_PITCH_DEG: f64 = -5.0;
const PITCH_LIMIT_DEG: f64 = 80.0;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ThrustOutput {
    /// Per-cycle mean surge acceleration, cm/s^2.
    pub mean_thrust: f64,
    /// Moment turning the robot toward starboard (negative yaw).
    pub yaw_moment: f64,
}

/// Mean thrust and yaw moment for the given (effective) flapping amplitudes.
pub fn thrust_from_gait(
    params: &GaitParams,
    hp: &HydroParams,
    left_amp: f64,
    right_amp: f64,
) -> ThrustOutput {
    let mean_amp = (left_amp + right_amp) / 2.0;
    ThrustOutput {
        mean_thrust: hp.c_thrust * params.frequency * params.frequency * mean_amp * mean_amp,
        yaw_moment: hp.c_yaw * (left_amp - right_amp),
    }
}

/// Instantaneous thrust multiplier at time `t`.
///
/// Thrust follows the squared flapping rate, which oscillates at twice the
/// gait frequency; the multiplier averages to one over a cycle.
pub fn thrust_ripple(params: &GaitParams, t: f64, ripple: f64) -> f64 {
    if ripple == 0.0 {
        return 1.0;
    }
    let unit = GaitParams {
        theta_fl_max: 1.0,
        ..*params
    };
    let peak = 2.0 * std::f64::consts::PI * params.frequency;
    let normalized = gait_velocity(&unit, t).flapping / peak;
    // cos^2 -> cos(2 phase)
    1.0 + ripple * (2.0 * normalized * normalized - 1.0)
}

/// Pitch acceleration from a symmetric feathering bias.
pub fn pitch_moment(hp: &HydroParams, feather_bias: f64) -> f64 {
    hp.c_pitch * feather_bias
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DynamicsInputs {
    /// Instantaneous surge acceleration from thrust, cm/s^2.
    pub thrust: f64,
    pub yaw_moment: f64,
    pub pitch_moment: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub state: RobotState,
    pub collision: Option<CollisionEvent>,
}

/// Semi-implicit surge update; drag is evaluated at the new speed via the
/// linearization `c * v_new * |v_old|`, which keeps the exact terminal speed.
pub fn surge_update(v: f64, thrust: f64, hp: &HydroParams, dt: f64) -> f64 {
    (v + dt * thrust / hp.mass) / (1.0 + dt * hp.c_drag * v.abs() / hp.mass)
}

pub const MAX_DT: f64 = 0.1;

/// Advances the robot one step of `dt` seconds.
///
/// A collision is reported when the new pose crosses a pool boundary; the
/// returned state is clamped onto that boundary.
pub fn dynamics_step(
    state: &RobotState,
    inputs: &DynamicsInputs,
    hp: &HydroParams,
    env: &PoolEnvironment,
    dt: f64,
) -> Result<StepOutcome> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(ConfigError::invalid("dt_s", "must lie in (0, 0.1]").into());
    }

    let surge_vel = surge_update(state.surge_vel, inputs.thrust, hp, dt);
    let yaw_rate =
        (state.yaw_rate - dt * inputs.yaw_moment / hp.inertia) / (1.0 + dt * hp.yaw_damping);
    let pitch_rate = (state.pitch_rate
        + dt * (inputs.pitch_moment - hp.pitch_restoring * state.pitch) / hp.inertia)
        / (1.0 + dt * hp.pitch_damping);

    let pitch = (state.pitch + dt * pitch_rate).clamp(-PITCH_LIMIT_DEG, PITCH_LIMIT_DEG);
    let yaw = wrap_deg(state.yaw + dt * yaw_rate);
    let (sin_p, cos_p) = pitch.to_radians().sin_cos();
    let (sin_y, cos_y) = yaw.to_radians().sin_cos();
    let horizontal = surge_vel * cos_p;

    let mut next = RobotState {
        x: state.x + dt * horizontal * cos_y,
        y: state.y + dt * horizontal * sin_y,
        depth: state.depth + dt * surge_vel * sin_p,
        yaw,
        pitch,
        surge_vel,
        yaw_rate,
        pitch_rate,
        t: state.t + dt,
    };

    let finite = [
        next.x,
        next.y,
        next.depth,
        next.yaw,
        next.pitch,
        next.surge_vel,
        next.yaw_rate,
        next.pitch_rate,
    ]
    .iter()
    .all(|v| v.is_finite());
    if !finite {
        return Err(Error::Unstable {
            t: next.t,
            detail: format!("non-finite state {next:?}; reduce dt or check coefficients"),
        });
    }

    let mut kind = None;
    if next.depth < 0.0 {
        if state.depth > 0.0 && next.pitch < SURFACE_BREACH_PITCH_DEG {
            kind = Some(CollisionKind::Surface);
        }
        next.depth = 0.0;
    }
    if next.depth >= env.depth {
        next.depth = env.depth;
        kind = Some(CollisionKind::Bottom);
    }
    if next.x <= 0.0 || next.x >= env.length || next.y <= 0.0 || next.y >= env.width {
        next.x = next.x.clamp(0.0, env.length);
        next.y = next.y.clamp(0.0, env.width);
        kind = kind.or(Some(CollisionKind::Wall));
    }

    let collision = kind.map(|kind| CollisionEvent {
        kind,
        t: next.t,
        x: next.x,
        y: next.y,
        depth: next.depth,
    });
    Ok(StepOutcome {
        state: next,
        collision,
    })
}

/// Knobs for [`calibrate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationOptions {
    pub target_speed_cm_s: f64,
    /// Bisection bracket on `c_thrust`.
    pub thrust_lo: f64,
    pub thrust_hi: f64,
    /// Length of each speed simulation, s.
    pub duration_s: f64,
    /// Trailing window averaged for the steady speed, s.
    pub window_s: f64,
    pub dt_s: f64,
    /// Relative speed tolerance that stops the bisection.
    pub rel_tol: f64,
    pub max_iterations: u32,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            target_speed_cm_s: 20.0,
            thrust_lo: 1e-4,
            thrust_hi: 10.0,
            duration_s: 25.0,
            window_s: 10.0,
            dt_s: 0.01,
            rel_tol: 1e-9,
            max_iterations: 200,
        }
    }
}

impl CalibrationOptions {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.target_speed_cm_s > 0.0 && self.target_speed_cm_s.is_finite()) {
            return Err(ConfigError::invalid(
                "calibration.target_speed_cm_s",
                "must be > 0",
            ));
        }
        if !(0.0 < self.thrust_lo && self.thrust_lo < self.thrust_hi) {
            return Err(ConfigError::invalid(
                "calibration.thrust_lo",
                "bracket must satisfy 0 < thrust_lo < thrust_hi",
            ));
        }
        if !(self.dt_s > 0.0 && self.dt_s <= MAX_DT) {
            return Err(ConfigError::invalid(
                "calibration.dt_s",
                "must lie in (0, 0.1]",
            ));
        }
        if !(self.window_s > 0.0 && self.window_s < self.duration_s) {
            return Err(ConfigError::invalid(
                "calibration.window_s",
                "must be > 0 and shorter than duration_s",
            ));
        }
        Ok(())
    }
}

/// Surge speed sampled every `dt` for a straight, symmetric, level swim
/// from rest. The first element is the speed after one step.
pub fn surge_speed_trace(gait: &GaitParams, hp: &HydroParams, duration: f64, dt: f64) -> Vec<f64> {
    let steps = (duration / dt).round() as usize;
    let mean = thrust_from_gait(gait, hp, gait.theta_fl_max, gait.theta_fl_max).mean_thrust;
    let mut v = 0.0;
    (0..steps)
        .map(|k| {
            let t = k as f64 * dt;
            v = surge_update(v, mean * thrust_ripple(gait, t, hp.ripple), hp, dt);
            v
        })
        .collect()
}

/// Mean over the trailing `window` seconds of a trace sampled at `dt`.
pub fn steady_speed(trace: &[f64], window: f64, dt: f64) -> f64 {
    let n = ((window / dt).round() as usize).clamp(1, trace.len().max(1));
    let tail = &trace[trace.len().saturating_sub(n)..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

/// Time after which the cycle-averaged speed stays within `band` (relative)
/// of `steady`. The average runs over one ripple period ending at each sample.
pub fn settle_time(trace: &[f64], steady: f64, band: f64, dt: f64, ripple_period: f64) -> f64 {
    let w = ((ripple_period / dt).round() as usize).max(1);
    let mut settled_from = None;
    let mut running = 0.0;
    for (i, v) in trace.iter().enumerate() {
        running += v;
        if i >= w {
            running -= trace[i - w];
        }
        let avg = running / (i + 1).min(w) as f64;
        let inside = (avg - steady).abs() <= band * steady;
        match (inside, settled_from) {
            (true, None) => settled_from = Some(i),
            (false, Some(_)) => settled_from = None,
            _ => {}
        }
    }
    settled_from.map_or(f64::INFINITY, |i| (i + 1) as f64 * dt)
}

/// Outcome of [`calibrate`] plus the automatic verification swim.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub hydro: HydroParams,
    pub iterations: u32,
    pub verification: Verification,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub steady_speed_cm_s: f64,
    pub settle_time_s: f64,
    /// Time at which the finish line was crossed, if it was.
    pub course_time_s: Option<f64>,
    pub duration_s: f64,
}

/// Tunes `c_thrust` by bisection so the nominal gait cruises at the target
/// speed, holding every other coefficient fixed.
pub fn calibrate(
    gait: &GaitParams,
    base: &HydroParams,
    env: &PoolEnvironment,
    opts: &CalibrationOptions,
) -> Result<CalibrationReport> {
    gait.validate()?;
    base.validate()?;
    env.validate()?;
    opts.validate()?;
    let target = opts.target_speed_cm_s;
    let speed_for = |c_thrust: f64| {
        let hp = HydroParams { c_thrust, ..*base };
        let trace = surge_speed_trace(gait, &hp, opts.duration_s, opts.dt_s);
        steady_speed(&trace, opts.window_s, opts.dt_s)
    };

    let (mut lo, mut hi) = (opts.thrust_lo, opts.thrust_hi);
    let (speed_lo, speed_hi) = (speed_for(lo), speed_for(hi));
    if !(speed_lo <= target && target <= speed_hi) {
        // speed scales as sqrt(c_thrust / c_drag)
        return Err(Error::Bracket {
            lo,
            hi,
            target,
            speed_lo,
            speed_hi,
            drag_lo: base.c_drag * (speed_lo / target).powi(2),
            drag_hi: base.c_drag * (speed_hi / target).powi(2),
        });
    }

    let mut iterations = 0;
    let mut mid = 0.5 * (lo + hi);
    while iterations < opts.max_iterations {
        iterations += 1;
        mid = 0.5 * (lo + hi);
        let speed = speed_for(mid);
        if (speed - target).abs() <= opts.rel_tol * target {
            break;
        }
        if speed < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let hydro = HydroParams {
        c_thrust: mid,
        ..*base
    };
    let verification = verify_calibration(gait, &hydro, env, opts)?;
    Ok(CalibrationReport {
        hydro,
        iterations,
        verification,
    })
}

/// Straight symmetric swim through the pool with the full model. The run
/// continues past the finish line so the whole window is observed.
pub fn verify_calibration(
    gait: &GaitParams,
    hp: &HydroParams,
    env: &PoolEnvironment,
    opts: &CalibrationOptions,
) -> Result<Verification> {
    let dt = opts.dt_s;
    let steps = (opts.duration_s / dt).round() as usize;
    let mean = thrust_from_gait(gait, hp, gait.theta_fl_max, gait.theta_fl_max).mean_thrust;
    let mut state = env.start_state();
    let mut speeds = Vec::with_capacity(steps);
    let mut course_time = None;
    for k in 0..steps {
        let t = k as f64 * dt;
        let inputs = DynamicsInputs {
            thrust: mean * thrust_ripple(gait, t, hp.ripple),
            ..DynamicsInputs::default()
        };
        let out = dynamics_step(&state, &inputs, hp, env, dt)?;
        state = out.state;
        state.t = (k + 1) as f64 * dt;
        speeds.push(state.surge_vel);
        if course_time.is_none() && state.x >= env.finish_line_cm {
            course_time = Some(state.t);
        }
        if out.collision.is_some() {
            break;
        }
    }
    let steady = steady_speed(&speeds, opts.window_s, dt);
    Ok(Verification {
        steady_speed_cm_s: steady,
        settle_time_s: settle_time(&speeds, steady, 0.01, dt, 0.5 / gait.frequency),
        course_time_s: course_time,
        duration_s: speeds.len() as f64 * dt,
    })
}
