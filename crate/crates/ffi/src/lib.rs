//! C ABI over `manta_sim`.
//!
//! Conventions:
//! - every fallible function returns a [`MantaStatus`]; results go through
//!   out-pointers that are written only on success;
//! - objects are opaque heap handles created by `*_new`/`*_from_*`/`manta_run_trial`
//!   and released with the matching `*_free`;
//! - after a failure, `manta_last_error_message` describes it (per thread);
//! - panics never cross the boundary and are reported as `MANTA_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use manta_sim::config::RunConfig;
use manta_sim::control::{yaw_pd_step, YawControllerConfig, YawControllerState};
use manta_sim::dynamics::{calibrate, CalibrationOptions, CollisionKind};
use manta_sim::gait::{gait_angles, GaitParams};
use manta_sim::harness::{run_trial, EndReason, Scenario, TrialConfig, TrialRecord};
use manta_sim::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MantaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    SimulationAborted = 3,
    Io = 4,
    Panic = 5,
    OutOfRange = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MantaScenario {
    SurfaceStraight = 0,
    DivingStraight = 1,
    DepthHold = 2,
}

impl From<MantaScenario> for Scenario {
    fn from(s: MantaScenario) -> Self {
        match s {
            MantaScenario::SurfaceStraight => Scenario::SurfaceStraight,
            MantaScenario::DivingStraight => Scenario::DivingStraight,
            MantaScenario::DepthHold => Scenario::DepthHold,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MantaEndKind {
    FinishReached = 0,
    Timeout = 1,
    CollisionBottom = 2,
    CollisionWall = 3,
    CollisionSurface = 4,
    Aborted = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MantaFinAngles {
    pub flapping_deg: f64,
    pub feathering_deg: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MantaYawGains {
    pub kp: f64,
    pub kd: f64,
    pub baseline_right_deg: f64,
    pub baseline_left_deg: f64,
    pub amplitude_min_deg: f64,
    pub amplitude_max_deg: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MantaYawCommand {
    pub right_deg: f64,
    pub left_deg: f64,
    pub right_unclamped_deg: f64,
    pub left_unclamped_deg: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MantaSample {
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

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MantaErrorMetrics {
    pub mean_error_cm: f64,
    pub max_error_cm: f64,
    pub std_dev_cm: f64,
}

/// Opaque trial configuration.
pub struct MantaTrialConfig(TrialConfig);

/// Opaque trial result.
pub struct MantaTrialRecord(TrialRecord);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

type Failure = (MantaStatus, String);

fn status_of(e: &Error) -> MantaStatus {
    match e {
        Error::Unstable { .. } => MantaStatus::SimulationAborted,
        Error::Io { .. } => MantaStatus::Io,
        _ => MantaStatus::InvalidConfig,
    }
}

fn fail(e: impl Into<Error>) -> Failure {
    let e = e.into();
    (status_of(&e), e.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MantaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MantaStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            MantaStatus::Panic
        }
    }
}

fn null() -> Failure {
    (MantaStatus::NullPointer, "null pointer argument".into())
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn deref_mut<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(null)
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the length the full message needs, including
/// the terminator. `buf` may be null to query the length.
///
/// # Safety
/// `buf` must be null or point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn manta_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Nominal configuration for a scenario.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn manta_trial_config_new(
    scenario: MantaScenario,
    out: *mut *mut MantaTrialConfig,
) -> MantaStatus {
    guard(|| {
        let out = deref_mut(out)?;
        *out = Box::into_raw(Box::new(MantaTrialConfig(TrialConfig::nominal(
            scenario.into(),
        ))));
        Ok(())
    })
}

/// Parses a TOML run configuration. Run-level keys are accepted; a
/// `hydro_file` is resolved against the current directory and loaded, but no
/// calibration is performed (see [`manta_calibrate`]).
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn manta_trial_config_from_toml(
    toml: *const c_char,
    out: *mut *mut MantaTrialConfig,
) -> MantaStatus {
    guard(|| {
        let text = CStr::from_ptr(deref(toml)?).to_str().map_err(|e| {
            (
                MantaStatus::InvalidConfig,
                format!("config is not UTF-8: {e}"),
            )
        })?;
        let out = deref_mut(out)?;
        let mut run = RunConfig::from_toml_str(text, Path::new("<ffi>")).map_err(fail)?;
        run.auto_calibrate = false;
        run.resolve_hydro().map_err(fail)?;
        *out = Box::into_raw(Box::new(MantaTrialConfig(run.trial)));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn manta_trial_config_free(cfg: *mut MantaTrialConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn manta_trial_config_set_seed(
    cfg: *mut MantaTrialConfig,
    seed: u64,
) -> MantaStatus {
    guard(|| {
        deref_mut(cfg)?.0.seed = seed;
        Ok(())
    })
}

/// Turns heading PD on or off.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn manta_trial_config_set_control(
    cfg: *mut MantaTrialConfig,
    enabled: bool,
) -> MantaStatus {
    guard(|| {
        deref_mut(cfg)?.0.control_enabled = enabled;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn manta_trial_config_set_target_depth(
    cfg: *mut MantaTrialConfig,
    depth_cm: f64,
) -> MantaStatus {
    guard(|| {
        let cfg = &mut deref_mut(cfg)?.0;
        let mut next = cfg.depth_control;
        next.target_depth = depth_cm;
        next.validate().map_err(fail)?;
        cfg.depth_control = next;
        Ok(())
    })
}

/// Fits the thrust coefficient so the configured gait cruises at
/// `target_speed_cm_s`, stores it in `cfg`, and optionally reports it.
///
/// # Safety
/// `cfg` must be a live handle; `c_thrust_out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn manta_calibrate(
    cfg: *mut MantaTrialConfig,
    target_speed_cm_s: f64,
    c_thrust_out: *mut f64,
) -> MantaStatus {
    guard(|| {
        let cfg = &mut deref_mut(cfg)?.0;
        let opts = CalibrationOptions {
            target_speed_cm_s,
            ..CalibrationOptions::default()
        };
        let report = calibrate(&cfg.gait, &cfg.hydro, &cfg.pool, &opts).map_err(fail)?;
        cfg.hydro = report.hydro;
        if let Some(out) = c_thrust_out.as_mut() {
            *out = report.hydro.c_thrust;
        }
        Ok(())
    })
}

/// Runs one trial. On `MANTA_STATUS_SIMULATION_ABORTED`, `out` receives the
/// partial record when one exists, otherwise null.
///
/// # Safety
/// `cfg` must be a live handle; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn manta_run_trial(
    cfg: *const MantaTrialConfig,
    out: *mut *mut MantaTrialRecord,
) -> MantaStatus {
    guard(|| {
        let cfg = &deref(cfg)?.0;
        let out = deref_mut(out)?;
        *out = std::ptr::null_mut();
        match run_trial(cfg) {
            Ok(rec) => {
                *out = Box::into_raw(Box::new(MantaTrialRecord(rec)));
                Ok(())
            }
            Err(abort) => {
                if let Some(partial) = abort.partial {
                    *out = Box::into_raw(Box::new(MantaTrialRecord(*partial)));
                }
                Err(fail(abort.error))
            }
        }
    })
}

/// # Safety
/// `rec` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn manta_trial_record_free(rec: *mut MantaTrialRecord) {
    if !rec.is_null() {
        drop(Box::from_raw(rec));
    }
}

/// Number of recorded samples; 0 for a null handle.
///
/// # Safety
/// `rec` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn manta_trial_record_len(rec: *const MantaTrialRecord) -> usize {
    rec.as_ref().map_or(0, |r| r.0.samples.len())
}

/// # Safety
/// `rec` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn manta_trial_record_sample(
    rec: *const MantaTrialRecord,
    index: usize,
    out: *mut MantaSample,
) -> MantaStatus {
    guard(|| {
        let rec = &deref(rec)?.0;
        let out = deref_mut(out)?;
        let s = rec.samples.get(index).ok_or_else(|| {
            (
                MantaStatus::OutOfRange,
                format!("sample {index} out of range (len {})", rec.samples.len()),
            )
        })?;
        *out = MantaSample {
            t: s.t,
            x_cm: s.x_cm,
            y_cm: s.y_cm,
            depth_cm: s.depth_cm,
            yaw_true_deg: s.yaw_true_deg,
            yaw_est_deg: s.yaw_est_deg,
            amp_left_deg: s.amp_left_deg,
            amp_right_deg: s.amp_right_deg,
            depth_est_cm: s.depth_est_cm,
            pitch_deg: s.pitch_deg,
            feather_bias_deg: s.feather_bias_deg,
            surge_cm_s: s.surge_cm_s,
        };
        Ok(())
    })
}

/// Cross-track error metrics over the whole record.
///
/// # Safety
/// `rec` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn manta_trial_record_metrics(
    rec: *const MantaTrialRecord,
    out: *mut MantaErrorMetrics,
) -> MantaStatus {
    guard(|| {
        let m = deref(rec)?.0.metrics;
        *deref_mut(out)? = MantaErrorMetrics {
            mean_error_cm: m.mean_error,
            max_error_cm: m.max_error,
            std_dev_cm: m.std_dev,
        };
        Ok(())
    })
}

/// Why the trial ended and when.
///
/// # Safety
/// `rec` must be a live handle; `kind` and `t` writable.
#[no_mangle]
pub unsafe extern "C" fn manta_trial_record_end(
    rec: *const MantaTrialRecord,
    kind: *mut MantaEndKind,
    t: *mut f64,
) -> MantaStatus {
    guard(|| {
        let end = deref(rec)?.0.end;
        let kind = deref_mut(kind)?;
        let t = deref_mut(t)?;
        (*kind, *t) = match end {
            EndReason::FinishReached { t } => (MantaEndKind::FinishReached, t),
            EndReason::Timeout { t } => (MantaEndKind::Timeout, t),
            EndReason::Aborted { t } => (MantaEndKind::Aborted, t),
            EndReason::Collision(c) => (
                match c.kind {
                    CollisionKind::Bottom => MantaEndKind::CollisionBottom,
                    CollisionKind::Wall => MantaEndKind::CollisionWall,
                    CollisionKind::Surface => MantaEndKind::CollisionSurface,
                },
                c.t,
            ),
        };
        Ok(())
    })
}

/// Fin angles at time `t` for the given gait.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn manta_gait_angles(
    theta_fl_max_deg: f64,
    theta_fe_max_deg: f64,
    frequency_hz: f64,
    phase_offset_deg: f64,
    t: f64,
    out: *mut MantaFinAngles,
) -> MantaStatus {
    guard(|| {
        let out = deref_mut(out)?;
        let p = GaitParams::with_phase(
            theta_fl_max_deg,
            theta_fe_max_deg,
            frequency_hz,
            phase_offset_deg,
        )
        .map_err(fail)?;
        let a = gait_angles(&p, t);
        *out = MantaFinAngles {
            flapping_deg: a.flapping,
            feathering_deg: a.feathering,
        };
        Ok(())
    })
}

/// One heading PD step. `prev_error` is read and replaced by `error_deg`.
///
/// # Safety
/// `gains` readable; `prev_error` and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn manta_yaw_pd_step(
    gains: *const MantaYawGains,
    prev_error: *mut f64,
    error_deg: f64,
    out: *mut MantaYawCommand,
) -> MantaStatus {
    guard(|| {
        let g = deref(gains)?;
        let prev = deref_mut(prev_error)?;
        let out = deref_mut(out)?;
        let cfg = YawControllerConfig {
            kp: g.kp,
            kd: g.kd,
            theta_fl_r0: g.baseline_right_deg,
            theta_fl_l0: g.baseline_left_deg,
            amplitude_min: g.amplitude_min_deg,
            amplitude_max: g.amplitude_max_deg,
            ..YawControllerConfig::default()
        };
        cfg.validate().map_err(fail)?;
        let (cmd, state) = yaw_pd_step(&cfg, YawControllerState { prev_error: *prev }, error_deg);
        *prev = state.prev_error;
        *out = MantaYawCommand {
            right_deg: cmd.right,
            left_deg: cmd.left,
            right_unclamped_deg: cmd.right_unclamped,
            left_unclamped_deg: cmd.left_unclamped,
        };
        Ok(())
    })
}
