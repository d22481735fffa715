/* C interface to the multi-sensor fusion library.
 *
 * The library owns all state behind opaque handles; every call returns a
 * status code and msf_last_error() carries the diagnostic for the calling
 * thread. Quaternions are Hamilton (w, x, y, z); positions are world-frame
 * meters.
 */
#ifndef MSF_CAPI_H
#define MSF_CAPI_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum msf_status {
  MSF_OK = 0,
  MSF_ERR_INVALID_ARGUMENT = 1, /* bad pointer, malformed config, bad dims */
  MSF_ERR_NUMERICAL = 2,        /* filter fault: singular update, divergence */
  MSF_ERR_IO = 3,               /* missing or unwritable files */
  MSF_ERR_UNKNOWN = 4
} msf_status;

const char* msf_version(void);

/* Message for the most recent failing call on this thread ("" if none). */
const char* msf_last_error(void);

/* ---- filter instance ---------------------------------------------------- */

typedef struct msf_filter msf_filter;

/* config_json uses the same schema as the fuse CLI configuration file. */
msf_status msf_filter_create(const char* config_json, msf_filter** out);
void msf_filter_destroy(msf_filter* filter);

/* Error-state dimension (18 + 6 per drift-estimated sensor). */
msf_status msf_filter_dim(const msf_filter* filter, size_t* out);

/* Feeds one IMU sample; timestamps must be strictly increasing. */
msf_status msf_filter_process_imu(msf_filter* filter, double t, const double accel[3],
                                  const double gyro[3]);

/* Feed one measurement. accepted (optional) reports the arbiter verdict:
 * 1 accepted, 0 rejected (outlier or stale). */
msf_status msf_filter_process_position(msf_filter* filter, double t, const char* sensor_id,
                                       const double p[3], int* accepted);
msf_status msf_filter_process_orientation(msf_filter* filter, double t, const char* sensor_id,
                                          const double q_wxyz[4], int* accepted);
msf_status msf_filter_process_velocity(msf_filter* filter, double t, const char* sensor_id,
                                       const double v[3], int* accepted);

/* Current estimate. Any output pointer may be NULL. */
msf_status msf_filter_get_state(const msf_filter* filter, double* t, double p[3], double v[3],
                                double q_wxyz[4]);
msf_status msf_filter_get_biases(const msf_filter* filter, double accel_bias[3],
                                 double gyro_bias[3], double gravity[3]);
msf_status msf_filter_get_drift(const msf_filter* filter, const char* sensor_id, double p[3],
                                double q_wxyz[4]);
/* Covariance diagonal; n is the buffer length, must be >= dimension. */
msf_status msf_filter_get_cov_diag(const msf_filter* filter, double* out, size_t n);

/* ---- batch pipeline ------------------------------------------------------ */

/* options_json: {"preset":"lab","seed":0,"duration":300.0} (all optional). */
msf_status msf_run_simulate(const char* options_json, const char* out_dir);

/* start/end (nullable) clip the replay window and override the config. */
msf_status msf_run_fuse(const char* config_path, const char* log_path, const char* out_dir,
                        const double* start, const double* end);

/* raw_log_path may be NULL; it adds drift-aligned per-sensor rows. */
msf_status msf_run_evaluate(const char* estimate_path, const char* truth_path,
                            const char* raw_log_path, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* MSF_CAPI_H */
