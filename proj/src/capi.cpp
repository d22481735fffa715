#include "msf_capi.h"

#include <json.hpp>

#include <cstring>
#include <string>

#include "msf/config.hpp"
#include "msf/error.hpp"
#include "msf/pipeline.hpp"
#include "msf/replay.hpp"

namespace {

thread_local std::string g_last_error;

msf_status fail(msf_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
msf_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const msf::Error& e) {
    return fail(MSF_ERR_NUMERICAL, e.what());
  } catch (const std::exception& e) {
    return fail(MSF_ERR_UNKNOWN, e.what());
  }
}

}  // namespace

// Streaming facade over the same pipeline the log replay uses.
struct msf_filter {
  msf::FusionPipeline pipeline;
  explicit msf_filter(msf::RunConfig config) : pipeline(std::move(config)) {}
};

namespace {

msf_status process_measurement(msf_filter* filter, const msf::Measurement& m, int* accepted) {
  if (!filter->pipeline.knows_sensor(m.sensor_id)) {
    return fail(MSF_ERR_INVALID_ARGUMENT, "unknown sensor '" + m.sensor_id + "'");
  }
  return guarded([&] {
    msf::VerdictRecord verdict = filter->pipeline.process_measurement(m);
    if (accepted) *accepted = verdict.accepted ? 1 : 0;
    return MSF_OK;
  });
}

}  // namespace

extern "C" {

const char* msf_version(void) { return "0.1.0"; }

const char* msf_last_error(void) { return g_last_error.c_str(); }

msf_status msf_filter_create(const char* config_json, msf_filter** out) {
  if (!config_json || !out) return fail(MSF_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  try {
    *out = new msf_filter(msf::parse_run_config(config_json));
    return MSF_OK;
  } catch (const msf::Error& e) {
    return fail(MSF_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(MSF_ERR_UNKNOWN, e.what());
  }
}

void msf_filter_destroy(msf_filter* filter) { delete filter; }

msf_status msf_filter_dim(const msf_filter* filter, size_t* out) {
  if (!filter || !out) return fail(MSF_ERR_INVALID_ARGUMENT, "null argument");
  *out = static_cast<size_t>(filter->pipeline.layout().dim());
  return MSF_OK;
}

msf_status msf_filter_process_imu(msf_filter* filter, double t, const double accel[3],
                                  const double gyro[3]) {
  if (!filter || !accel || !gyro) return fail(MSF_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    msf::ImuSample u;
    u.t = t;
    u.accel = Eigen::Vector3d(accel[0], accel[1], accel[2]);
    u.gyro = Eigen::Vector3d(gyro[0], gyro[1], gyro[2]);
    filter->pipeline.process_imu(u);
    return MSF_OK;
  });
}

msf_status msf_filter_process_position(msf_filter* filter, double t, const char* sensor_id,
                                       const double p[3], int* accepted) {
  if (!filter || !p) return fail(MSF_ERR_INVALID_ARGUMENT, "null argument");
  msf::Measurement m;
  m.t = m.t_delivery = t;
  m.sensor_id = sensor_id ? sensor_id : "";
  m.kind = msf::MeasurementKind::position;
  m.vec = Eigen::Vector3d(p[0], p[1], p[2]);
  return process_measurement(filter, m, accepted);
}

msf_status msf_filter_process_orientation(msf_filter* filter, double t, const char* sensor_id,
                                          const double q_wxyz[4], int* accepted) {
  if (!filter || !q_wxyz) return fail(MSF_ERR_INVALID_ARGUMENT, "null argument");
  msf::Measurement m;
  m.t = m.t_delivery = t;
  m.sensor_id = sensor_id ? sensor_id : "";
  m.kind = msf::MeasurementKind::orientation;
  m.quat = msf::so3::canonical({q_wxyz[0], q_wxyz[1], q_wxyz[2], q_wxyz[3]});
  return process_measurement(filter, m, accepted);
}

msf_status msf_filter_process_velocity(msf_filter* filter, double t, const char* sensor_id,
                                       const double v[3], int* accepted) {
  if (!filter || !v) return fail(MSF_ERR_INVALID_ARGUMENT, "null argument");
  msf::Measurement m;
  m.t = m.t_delivery = t;
  m.sensor_id = sensor_id ? sensor_id : "";
  m.kind = msf::MeasurementKind::velocity;
  m.vec = Eigen::Vector3d(v[0], v[1], v[2]);
  return process_measurement(filter, m, accepted);
}

msf_status msf_filter_get_state(const msf_filter* filter, double* t, double p[3], double v[3],
                                double q_wxyz[4]) {
  if (!filter) return fail(MSF_ERR_INVALID_ARGUMENT, "null filter");
  const msf::NominalState& s = filter->pipeline.filter().state();
  if (t) *t = filter->pipeline.filter().time();
  if (p) Eigen::Vector3d::Map(p) = s.p;
  if (v) Eigen::Vector3d::Map(v) = s.v;
  if (q_wxyz) {
    q_wxyz[0] = s.q.w;
    q_wxyz[1] = s.q.x;
    q_wxyz[2] = s.q.y;
    q_wxyz[3] = s.q.z;
  }
  return MSF_OK;
}

msf_status msf_filter_get_biases(const msf_filter* filter, double accel_bias[3],
                                 double gyro_bias[3], double gravity[3]) {
  if (!filter) return fail(MSF_ERR_INVALID_ARGUMENT, "null filter");
  const msf::NominalState& s = filter->pipeline.filter().state();
  if (accel_bias) Eigen::Vector3d::Map(accel_bias) = s.accel_bias;
  if (gyro_bias) Eigen::Vector3d::Map(gyro_bias) = s.gyro_bias;
  if (gravity) Eigen::Vector3d::Map(gravity) = s.gravity;
  return MSF_OK;
}

msf_status msf_filter_get_drift(const msf_filter* filter, const char* sensor_id, double p[3],
                                double q_wxyz[4]) {
  if (!filter || !sensor_id) return fail(MSF_ERR_INVALID_ARGUMENT, "null argument");
  if (!filter->pipeline.knows_sensor(sensor_id)) {
    return fail(MSF_ERR_INVALID_ARGUMENT, std::string("unknown sensor '") + sensor_id + "'");
  }
  msf::DriftPose pose = filter->pipeline.sensor_pose(sensor_id);
  if (p) Eigen::Vector3d::Map(p) = pose.p;
  if (q_wxyz) {
    q_wxyz[0] = pose.q.w;
    q_wxyz[1] = pose.q.x;
    q_wxyz[2] = pose.q.y;
    q_wxyz[3] = pose.q.z;
  }
  return MSF_OK;
}

msf_status msf_filter_get_cov_diag(const msf_filter* filter, double* out, size_t n) {
  if (!filter || !out) return fail(MSF_ERR_INVALID_ARGUMENT, "null argument");
  const auto dim = static_cast<size_t>(filter->pipeline.layout().dim());
  if (n < dim) return fail(MSF_ERR_INVALID_ARGUMENT, "buffer too small for covariance diagonal");
  Eigen::VectorXd diag = filter->pipeline.filter().covariance().diagonal();
  std::memcpy(out, diag.data(), dim * sizeof(double));
  return MSF_OK;
}

msf_status msf_run_simulate(const char* options_json, const char* out_dir) {
  if (!out_dir) return fail(MSF_ERR_INVALID_ARGUMENT, "null output directory");
  try {
    msf::pipeline::SimulateOptions options;
    if (options_json && *options_json) {
      nlohmann::json j = nlohmann::json::parse(options_json);
      options.preset = j.value("preset", options.preset);
      options.seed = j.value("seed", options.seed);
      options.duration = j.value("duration", options.duration);
    }
    msf::pipeline::run_simulate(options, out_dir);
    return MSF_OK;
  } catch (const nlohmann::json::exception& e) {
    return fail(MSF_ERR_INVALID_ARGUMENT, std::string("options: ") + e.what());
  } catch (const msf::Error& e) {
    return fail(MSF_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(MSF_ERR_UNKNOWN, e.what());
  }
}

msf_status msf_run_fuse(const char* config_path, const char* log_path, const char* out_dir,
                        const double* start, const double* end) {
  if (!config_path || !log_path || !out_dir) {
    return fail(MSF_ERR_INVALID_ARGUMENT, "null argument");
  }
  try {
    msf::pipeline::FuseOptions options;
    if (start) options.start = *start;
    if (end) options.end = *end;
    msf::pipeline::run_fuse(config_path, log_path, out_dir, options);
    return MSF_OK;
  } catch (const msf::Error& e) {
    return fail(MSF_ERR_NUMERICAL, e.what());
  } catch (const std::exception& e) {
    return fail(MSF_ERR_UNKNOWN, e.what());
  }
}

msf_status msf_run_evaluate(const char* estimate_path, const char* truth_path,
                            const char* raw_log_path, const char* out_dir) {
  if (!estimate_path || !truth_path || !out_dir) {
    return fail(MSF_ERR_INVALID_ARGUMENT, "null argument");
  }
  try {
    std::optional<std::filesystem::path> raw;
    if (raw_log_path && *raw_log_path) raw = raw_log_path;
    msf::pipeline::run_evaluate(estimate_path, truth_path, raw, out_dir);
    return MSF_OK;
  } catch (const msf::Error& e) {
    return fail(MSF_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(MSF_ERR_UNKNOWN, e.what());
  }
}

}  // extern "C"
