use std::ffi::{c_char, CString};
use std::ptr;

use manta_sim_ffi::*;

fn last_error() -> String {
    let n = unsafe { manta_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as c_char; n];
    unsafe { manta_last_error_message(buf.as_mut_ptr(), n) };
    let bytes: Vec<u8> = buf
        .iter()
        .take_while(|&&c| c != 0)
        .map(|&c| c as u8)
        .collect();
    String::from_utf8(bytes).unwrap()
}

fn new_config(s: MantaScenario) -> *mut MantaTrialConfig {
    let mut cfg = ptr::null_mut();
    assert_eq!(
        unsafe { manta_trial_config_new(s, &mut cfg) },
        MantaStatus::Ok
    );
    assert!(!cfg.is_null());
    cfg
}

#[test]
fn gait_angles_match_library() {
    let mut a = MantaFinAngles::default();
    let st = unsafe { manta_gait_angles(30.0, 45.0, 0.75, 90.0, 1.0 / 3.0, &mut a) };
    assert_eq!(st, MantaStatus::Ok);
    assert!((a.flapping_deg - 30.0).abs() < 1e-12);
    assert!(a.feathering_deg.abs() < 1e-12);

    let st = unsafe { manta_gait_angles(30.0, 45.0, 0.0, 90.0, 1.0, &mut a) };
    assert_eq!(st, MantaStatus::InvalidConfig);
    assert!(
        last_error().contains("gait.frequency_hz"),
        "{}",
        last_error()
    );
}

#[test]
fn yaw_pd_step_updates_previous_error() {
    let gains = MantaYawGains {
        kp: 1.0,
        kd: 2.0,
        baseline_right_deg: 30.0,
        baseline_left_deg: 30.0,
        amplitude_min_deg: 0.0,
        amplitude_max_deg: 60.0,
    };
    let mut prev = 1.0;
    let mut cmd = MantaYawCommand::default();
    let st = unsafe { manta_yaw_pd_step(&gains, &mut prev, 3.0, &mut cmd) };
    assert_eq!(st, MantaStatus::Ok);
    assert_eq!(cmd.right_unclamped_deg, 30.0 - 3.0 - 4.0);
    assert_eq!(cmd.left_unclamped_deg, 30.0 + 3.0 + 4.0);
    assert_eq!(cmd.right_deg + cmd.left_deg, 60.0);
    assert_eq!(prev, 3.0);
}

#[test]
fn null_pointers_are_rejected() {
    let st = unsafe { manta_gait_angles(30.0, 45.0, 0.75, 90.0, 0.0, ptr::null_mut()) };
    assert_eq!(st, MantaStatus::NullPointer);
    assert_eq!(
        unsafe { manta_trial_config_new(MantaScenario::DepthHold, ptr::null_mut()) },
        MantaStatus::NullPointer
    );
    assert_eq!(unsafe { manta_trial_record_len(ptr::null()) }, 0);
    unsafe {
        manta_trial_config_free(ptr::null_mut());
        manta_trial_record_free(ptr::null_mut());
    }
}

#[test]
fn calibrated_trial_round_trip() {
    let cfg = new_config(MantaScenario::SurfaceStraight);
    let mut c_thrust = 0.0;
    unsafe {
        assert_eq!(manta_calibrate(cfg, 20.0, &mut c_thrust), MantaStatus::Ok);
        assert!(c_thrust > 0.0);
        assert_eq!(manta_trial_config_set_seed(cfg, 4), MantaStatus::Ok);

        let mut on = ptr::null_mut();
        assert_eq!(manta_run_trial(cfg, &mut on), MantaStatus::Ok);
        assert_eq!(manta_trial_config_set_control(cfg, false), MantaStatus::Ok);
        let mut off = ptr::null_mut();
        assert_eq!(manta_run_trial(cfg, &mut off), MantaStatus::Ok);

        let mut m_on = MantaErrorMetrics::default();
        let mut m_off = MantaErrorMetrics::default();
        manta_trial_record_metrics(on, &mut m_on);
        manta_trial_record_metrics(off, &mut m_off);
        assert!(m_on.mean_error_cm < m_off.mean_error_cm);

        let n = manta_trial_record_len(on);
        assert!(n > 100);
        let mut s = MantaSample::default();
        assert_eq!(
            manta_trial_record_sample(on, n - 1, &mut s),
            MantaStatus::Ok
        );
        assert!(s.x_cm >= 500.0);
        assert_eq!(
            manta_trial_record_sample(on, n, &mut s),
            MantaStatus::OutOfRange
        );

        let mut kind = MantaEndKind::Aborted;
        let mut t = 0.0;
        assert_eq!(
            manta_trial_record_end(on, &mut kind, &mut t),
            MantaStatus::Ok
        );
        assert_eq!(kind, MantaEndKind::FinishReached);
        assert!((20.0..26.0).contains(&t), "{t}");

        manta_trial_record_free(on);
        manta_trial_record_free(off);
        manta_trial_config_free(cfg);
    }
}

#[test]
fn deep_target_ends_on_the_bottom() {
    let cfg = new_config(MantaScenario::DivingStraight);
    unsafe {
        assert_eq!(manta_calibrate(cfg, 20.0, ptr::null_mut()), MantaStatus::Ok);
        assert_eq!(
            manta_trial_config_set_target_depth(cfg, 60.0),
            MantaStatus::Ok
        );
        assert_eq!(
            manta_trial_config_set_target_depth(cfg, -1.0),
            MantaStatus::InvalidConfig
        );
        let mut rec = ptr::null_mut();
        assert_eq!(manta_run_trial(cfg, &mut rec), MantaStatus::Ok);
        let mut kind = MantaEndKind::Timeout;
        let mut t = 0.0;
        manta_trial_record_end(rec, &mut kind, &mut t);
        assert_eq!(kind, MantaEndKind::CollisionBottom);
        manta_trial_record_free(rec);
        manta_trial_config_free(cfg);
    }
}

#[test]
fn toml_config_and_errors() {
    let good = CString::new("scenario = \"depth_hold\"\nseed = 3\n").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(
        unsafe { manta_trial_config_from_toml(good.as_ptr(), &mut cfg) },
        MantaStatus::Ok
    );
    unsafe { manta_trial_config_free(cfg) };

    let bad = CString::new("[gait]\nfrequency_hz = 0.0\n").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(
        unsafe { manta_trial_config_from_toml(bad.as_ptr(), &mut cfg) },
        MantaStatus::InvalidConfig
    );
    assert!(cfg.is_null());
    assert!(last_error().contains("gait.frequency_hz"));

    let missing = CString::new("hydro_file = \"/nonexistent/hydro.toml\"\n").unwrap();
    assert_eq!(
        unsafe { manta_trial_config_from_toml(missing.as_ptr(), &mut cfg) },
        MantaStatus::Io
    );
}

#[test]
fn unstable_trial_reports_abort() {
    let text = CString::new("[hydro]\nc_thrust = 1e308\n").unwrap();
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(
            manta_trial_config_from_toml(text.as_ptr(), &mut cfg),
            MantaStatus::Ok
        );
        let mut rec = ptr::null_mut();
        assert_eq!(
            manta_run_trial(cfg, &mut rec),
            MantaStatus::SimulationAborted
        );
        assert!(last_error().contains("aborted"), "{}", last_error());
        manta_trial_record_free(rec);
        manta_trial_config_free(cfg);
    }
}

#[test]
fn error_buffer_truncates() {
    unsafe { manta_gait_angles(30.0, 45.0, -1.0, 90.0, 0.0, &mut MantaFinAngles::default()) };
    let mut small = [1 as c_char; 4];
    let needed = unsafe { manta_last_error_message(small.as_mut_ptr(), small.len()) };
    assert!(needed > 4);
    assert_eq!(small[3], 0);
}
