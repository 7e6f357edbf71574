use proptest::prelude::*;

use manta_sim::control::{depth_pd_step, DepthControllerConfig, DepthControllerState};
use manta_sim::dynamics::{
    dynamics_step, DynamicsInputs, HydroParams, PoolEnvironment, RobotState,
};
use manta_sim::gait::{gait_angles, GaitParams};
use manta_sim::harness::{compute_metrics, TargetLine};
use manta_sim::sensors::{pressure_reading, pressure_to_depth, PressureSensorModel, PressureState};

fn gait() -> impl Strategy<Value = GaitParams> {
    (0.0..=90.0f64, 0.0..=90.0f64, 0.1..4.0f64)
        .prop_map(|(fl, fe, f)| GaitParams::new(fl, fe, f).unwrap())
}

proptest! {
    #[test]
    fn gait_is_bounded_and_periodic(p in gait(), t in 0.0..100.0f64) {
        let a = gait_angles(&p, t);
        prop_assert!(a.flapping.abs() <= p.theta_fl_max + 1e-12);
        prop_assert!(a.feathering.abs() <= p.theta_fe_max + 1e-12);
        let b = gait_angles(&p, t + p.period());
        prop_assert!((a.flapping - b.flapping).abs() < 1e-9);
        prop_assert!((a.feathering - b.feathering).abs() < 1e-9);
    }

    #[test]
    fn depth_bias_stays_within_limit(
        depth in 0.0..300.0f64,
        prev in proptest::option::of(-100.0..100.0f64),
        kp in 0.0..10.0f64,
        kd in 0.0..50.0f64,
    ) {
        let cfg = DepthControllerConfig { kp_depth: kp, kd_depth: kd, ..Default::default() };
        let (bias, state) = depth_pd_step(&cfg, DepthControllerState { prev_error: prev }, depth);
        prop_assert!(bias.abs() <= cfg.feather_bias_limit);
        prop_assert_eq!(state.prev_error, Some(cfg.target_depth - depth));
    }

    #[test]
    fn pressure_reading_stays_in_range(depth in -50.0..1000.0f64, seed in any::<u64>()) {
        let m = PressureSensorModel::default();
        let mut s = PressureState::new(seed);
        let p = pressure_reading(&m, &mut s, depth);
        prop_assert!((m.range_min..=m.range_max).contains(&p));
        prop_assert!(pressure_to_depth(&m, p).depth_cm >= 0.0);
    }

    #[test]
    fn cross_track_metrics_are_ordered(
        ys in proptest::collection::vec(0.0..200.0f64, 2..100),
        y0 in 0.0..200.0f64,
    ) {
        let line = TargetLine::along_pool((0.0, y0));
        let traj: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect();
        let m = compute_metrics(&traj, &line).unwrap();
        prop_assert!(m.mean_error >= 0.0 && m.std_dev >= 0.0);
        prop_assert!(m.mean_error <= m.max_error + 1e-12);
        // sliding along the line changes nothing
        let shifted: Vec<(f64, f64)> = traj.iter().map(|&(x, y)| (x + 37.5, y)).collect();
        prop_assert_eq!(compute_metrics(&shifted, &line).unwrap(), m);
    }

    #[test]
    fn robot_stays_inside_the_pool(
        thrust in 0.0..50.0f64,
        yaw_moment in -20.0..20.0f64,
        pitch in -60.0..60.0f64,
        steps in 1usize..400,
    ) {
        let env = PoolEnvironment::default();
        let hp = HydroParams::default();
        let mut state: RobotState = env.start_state();
        let inputs = DynamicsInputs { thrust, yaw_moment, pitch_moment: pitch };
        for _ in 0..steps {
            let out = dynamics_step(&state, &inputs, &hp, &env, 0.01).unwrap();
            state = out.state;
            prop_assert!((0.0..=env.length).contains(&state.x));
            prop_assert!((0.0..=env.width).contains(&state.y));
            prop_assert!((0.0..=env.depth).contains(&state.depth));
            if out.collision.is_some() {
                break;
            }
        }
    }
}
