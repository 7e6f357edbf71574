#ifndef MANTA_SIM_H
#define MANTA_SIM_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum MantaEndKind {
  MANTA_END_KIND_FINISH_REACHED = 0,
  MANTA_END_KIND_TIMEOUT = 1,
  MANTA_END_KIND_COLLISION_BOTTOM = 2,
  MANTA_END_KIND_COLLISION_WALL = 3,
  MANTA_END_KIND_COLLISION_SURFACE = 4,
  MANTA_END_KIND_ABORTED = 5,
} MantaEndKind;

typedef enum MantaScenario {
  MANTA_SCENARIO_SURFACE_STRAIGHT = 0,
  MANTA_SCENARIO_DIVING_STRAIGHT = 1,
  MANTA_SCENARIO_DEPTH_HOLD = 2,
} MantaScenario;

typedef enum MantaStatus {
  MANTA_STATUS_OK = 0,
  MANTA_STATUS_NULL_POINTER = 1,
  MANTA_STATUS_INVALID_CONFIG = 2,
  MANTA_STATUS_SIMULATION_ABORTED = 3,
  MANTA_STATUS_IO = 4,
  MANTA_STATUS_PANIC = 5,
  MANTA_STATUS_OUT_OF_RANGE = 6,
} MantaStatus;

// Opaque trial configuration.
typedef struct MantaTrialConfig MantaTrialConfig;

// Opaque trial result.
typedef struct MantaTrialRecord MantaTrialRecord;

typedef struct MantaSample {
  double t;
  double x_cm;
  double y_cm;
  double depth_cm;
  double yaw_true_deg;
  double yaw_est_deg;
  double amp_left_deg;
  double amp_right_deg;
  double depth_est_cm;
  double pitch_deg;
  double feather_bias_deg;
  double surge_cm_s;
} MantaSample;

typedef struct MantaErrorMetrics {
  double mean_error_cm;
  double max_error_cm;
  double std_dev_cm;
} MantaErrorMetrics;

typedef struct MantaFinAngles {
  double flapping_deg;
  double feathering_deg;
} MantaFinAngles;

typedef struct MantaYawGains {
  double kp;
  double kd;
  double baseline_right_deg;
  double baseline_left_deg;
  double amplitude_min_deg;
  double amplitude_max_deg;
} MantaYawGains;

typedef struct MantaYawCommand {
  double right_deg;
  double left_deg;
  double right_unclamped_deg;
  double left_unclamped_deg;
} MantaYawCommand;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len`). Returns the length the full message needs, including
// the terminator. `buf` may be null to query the length.
//
// # Safety
// `buf` must be null or point to at least `len` writable bytes.
size_t manta_last_error_message(char *buf, size_t len);

// Nominal configuration for a scenario.
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum MantaStatus manta_trial_config_new(enum MantaScenario scenario, struct MantaTrialConfig **out);

// Parses a TOML run configuration. Run-level keys are accepted; a
// `hydro_file` is resolved against the current directory and loaded, but no
// calibration is performed (see [`manta_calibrate`]).
//
// # Safety
// `toml` must be a NUL-terminated string; `out` a valid handle slot.
enum MantaStatus manta_trial_config_from_toml(const char *toml, struct MantaTrialConfig **out);

// # Safety
// `cfg` must be a handle from this library or null.
void manta_trial_config_free(struct MantaTrialConfig *cfg);

// # Safety
// `cfg` must be a live handle.
enum MantaStatus manta_trial_config_set_seed(struct MantaTrialConfig *cfg, uint64_t seed);

// Turns heading PD on or off.
//
// # Safety
// `cfg` must be a live handle.
enum MantaStatus manta_trial_config_set_control(struct MantaTrialConfig *cfg, bool enabled);

// # Safety
// `cfg` must be a live handle.
enum MantaStatus manta_trial_config_set_target_depth(struct MantaTrialConfig *cfg, double depth_cm);

// Fits the thrust coefficient so the configured gait cruises at
// `target_speed_cm_s`, stores it in `cfg`, and optionally reports it.
//
// # Safety
// `cfg` must be a live handle; `c_thrust_out` null or writable.
enum MantaStatus manta_calibrate(struct MantaTrialConfig *cfg,
                                 double target_speed_cm_s,
                                 double *c_thrust_out);

// Runs one trial. On `MANTA_STATUS_SIMULATION_ABORTED`, `out` receives the
// partial record when one exists, otherwise null.
//
// # Safety
// `cfg` must be a live handle; `out` a valid handle slot.
enum MantaStatus manta_run_trial(const struct MantaTrialConfig *cfg, struct MantaTrialRecord **out);

// # Safety
// `rec` must be a handle from this library or null.
void manta_trial_record_free(struct MantaTrialRecord *rec);

// Number of recorded samples; 0 for a null handle.
//
// # Safety
// `rec` must be a live handle or null.
size_t manta_trial_record_len(const struct MantaTrialRecord *rec);

// # Safety
// `rec` must be a live handle; `out` writable.
enum MantaStatus manta_trial_record_sample(const struct MantaTrialRecord *rec,
                                           size_t index,
                                           struct MantaSample *out);

// Cross-track error metrics over the whole record.
//
// # Safety
// `rec` must be a live handle; `out` writable.
enum MantaStatus manta_trial_record_metrics(const struct MantaTrialRecord *rec,
                                            struct MantaErrorMetrics *out);

// Why the trial ended and when.
//
// # Safety
// `rec` must be a live handle; `kind` and `t` writable.
enum MantaStatus manta_trial_record_end(const struct MantaTrialRecord *rec,
                                        enum MantaEndKind *kind,
                                        double *t);

// Fin angles at time `t` for the given gait.
//
// # Safety
// `out` must be writable.
enum MantaStatus manta_gait_angles(double theta_fl_max_deg,
                                   double theta_fe_max_deg,
                                   double frequency_hz,
                                   double phase_offset_deg,
                                   double t,
                                   struct MantaFinAngles *out);

// One heading PD step. `prev_error` is read and replaced by `error_deg`.
//
// # Safety
// `gains` readable; `prev_error` and `out` writable.
enum MantaStatus manta_yaw_pd_step(const struct MantaYawGains *gains,
                                   double *prev_error,
                                   double error_deg,
                                   struct MantaYawCommand *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MANTA_SIM_H */
