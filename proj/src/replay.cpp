#include "msf/replay.hpp"

#include <algorithm>

#include "msf/arbiter.hpp"
#include "msf/error.hpp"

namespace msf {

namespace {

double sequence_time(const LogRecord& r) {
  if (const auto* m = std::get_if<Measurement>(&r)) return m->t_delivery;
  return record_time(r);
}

int sequence_rank(const LogRecord& r) {
  return std::holds_alternative<ImuSample>(r) ? 0 : 1;  // IMU first on ties
}

Eigen::Vector3d variance_for(const Measurement& m, const SensorConfig& cfg) {
  if (m.variance) {
    if (!(m.variance->array() > 0.0).all()) {
      throw Error("measurement variance must be > 0 per axis");
    }
    return *m.variance;
  }
  switch (m.kind) {
    case MeasurementKind::position: return cfg.var_position;
    case MeasurementKind::orientation: return cfg.var_orientation;
    case MeasurementKind::velocity: return cfg.var_velocity;
  }
  throw Error("unreachable");
}

Eigen::Vector3d limits_for(const Measurement& m, const SensorConfig& cfg) {
  const std::optional<Eigen::Vector3d>* lim = nullptr;
  switch (m.kind) {
    case MeasurementKind::position: lim = &cfg.limit_position; break;
    case MeasurementKind::orientation: lim = &cfg.limit_orientation; break;
    case MeasurementKind::velocity: lim = &cfg.limit_velocity; break;
  }
  if (!lim || !lim->has_value()) {
    throw Error("no arbiter limits configured for sensor '" + m.sensor_id + "' kind '" +
                to_string(m.kind) + "'");
  }
  return **lim;
}

}  // namespace

FusionPipeline::FusionPipeline(RunConfig config)
    : config_(std::move(config)),
      layout_(config_.make_layout()),
      ekf_(layout_, config_.make_initial_state(layout_), config_.initial_cov_diag(layout_),
           config_.process_noise, config_.reset_jacobian) {
  config_.validate();
  for (const auto& cfg : config_.sensors) {
    SensorState st;
    st.config = &cfg;
    st.slot = layout_.slot_of(cfg.sensor_id);
    st.fixed_pose = cfg.initial_drift;
    sensors_[cfg.sensor_id] = st;
  }
  for (int i = 0; i < layout_.drift_count(); ++i) {
    const SensorConfig* cfg = config_.find_sensor(layout_.drift_ids()[i]);
    ekf_.set_drift_process_noise(i, {cfg->drift_noise_pos, cfg->drift_noise_theta});
  }
}

bool FusionPipeline::knows_sensor(const std::string& sensor_id) const {
  return sensors_.count(sensor_id) > 0;
}

DriftPose FusionPipeline::pose_of(const SensorState& s) const {
  return s.slot ? ekf_.state().drift[*s.slot] : s.fixed_pose;
}

DriftPose FusionPipeline::sensor_pose(const std::string& sensor_id) const {
  auto it = sensors_.find(sensor_id);
  if (it == sensors_.end()) throw Error("unknown sensor '" + sensor_id + "'");
  return pose_of(it->second);
}

void FusionPipeline::adopt_pose(SensorState& s, const DriftPose& pose, double t) {
  if (s.slot) {
    ekf_.set_drift(*s.slot, pose);
  } else {
    s.fixed_pose = pose;
  }
  SensorOriginRecord origin;
  origin.t = t;
  origin.sensor_id = s.config->sensor_id;
  origin.pose = pose;
  origins_.push_back(origin);
}

void FusionPipeline::process_imu(const ImuSample& u) { ekf_.predict_to(u); }

VerdictRecord FusionPipeline::process_measurement(const Measurement& m) {
  auto it = sensors_.find(m.sensor_id);
  if (it == sensors_.end()) {
    throw Error("unknown sensor '" + m.sensor_id + "'");
  }
  SensorState& sensor = it->second;
  const SensorConfig& cfg = *sensor.config;

  VerdictRecord verdict;
  verdict.t = m.t;
  verdict.sensor_id = m.sensor_id;
  verdict.kind = m.kind;

  // no prediction basis yet, or older than the staleness bound
  if (!ekf_.has_time() || (ekf_.time() - m.t) > config_.replay.staleness) {
    verdict.accepted = false;
    verdict.reason = "stale";
    return verdict;
  }

  // sensor-origin bootstrap: the first position/orientation measurement
  // maps exactly onto the current state
  if (cfg.bootstrap_origin) {
    if (m.kind == MeasurementKind::orientation && !sensor.origin_orientation_set) {
      DriftPose pose = pose_of(sensor);
      pose.q = so3::quat_multiply(m.quat, so3::quat_inverse(ekf_.state().q));
      adopt_pose(sensor, pose, m.t);
      sensor.origin_orientation_set = true;
    } else if (m.kind == MeasurementKind::position && !sensor.origin_position_set) {
      DriftPose pose = pose_of(sensor);
      pose.p = m.vec - so3::quat_to_rotmat(pose.q) * ekf_.state().p;
      adopt_pose(sensor, pose, m.t);
      sensor.origin_position_set = true;
    }
  }

  const DriftPose pose = pose_of(sensor);
  Eigen::Vector3d innovation;
  Eigen::MatrixXd H;
  switch (m.kind) {
    case MeasurementKind::position:
      innovation = m.vec - h_position(ekf_.state(), pose);
      H = H_position(layout_, pose, sensor.slot);
      break;
    case MeasurementKind::orientation:
      innovation = orientation_innovation(ekf_.state(), pose, m.quat);
      H = H_orientation(layout_, m.quat, sensor.slot);
      break;
    case MeasurementKind::velocity:
      if (cfg.body_frame_velocity) {
        innovation = m.vec - h_velocity_body(ekf_.state());
        H = H_velocity_body(layout_, ekf_.state());
      } else {
        innovation = m.vec - h_velocity(ekf_.state());
        H = H_velocity(layout_);
      }
      break;
  }

  ArbiterVerdict gated = gate(innovation, limits_for(m, cfg));
  verdict.accepted = gated.accepted;
  verdict.violating_axes = gated.violating_axes;
  verdict.innovation = gated.innovation;
  if (gated.accepted) {
    ekf_.apply_correction(innovation, H, variance_for(m, cfg));
  }
  return verdict;
}

EstimateRecord FusionPipeline::snapshot(double t) const {
  EstimateRecord e;
  e.t = t;
  const NominalState& s = ekf_.state();
  e.p = s.p;
  e.v = s.v;
  e.q = s.q;
  e.accel_bias = s.accel_bias;
  e.gyro_bias = s.gyro_bias;
  e.gravity = s.gravity;
  const auto& ids = layout_.drift_ids();
  for (size_t i = 0; i < ids.size(); ++i) e.drift.emplace_back(ids[i], s.drift[i]);
  e.cov_diag = ekf_.covariance().diagonal();
  return e;
}

ReplayResult replay(const RunConfig& config, std::vector<LogRecord> records) {
  FusionPipeline pipeline(config);

  // registry check before anything runs
  for (const auto& r : records) {
    if (const auto* m = std::get_if<Measurement>(&r)) {
      if (!pipeline.knows_sensor(m->sensor_id)) {
        throw Error("log references sensor '" + m->sensor_id + "' missing from the registry");
      }
    }
  }

  // replay window, then delivery-ordered merge
  const auto& window = pipeline.config().replay;
  if (window.start || window.end) {
    std::erase_if(records, [&](const LogRecord& r) {
      const double t = sequence_time(r);
      return (window.start && t < *window.start) || (window.end && t > *window.end);
    });
  }
  std::stable_sort(records.begin(), records.end(), [](const LogRecord& a, const LogRecord& b) {
    const double ta = sequence_time(a), tb = sequence_time(b);
    if (ta != tb) return ta < tb;
    return sequence_rank(a) < sequence_rank(b);
  });

  ReplayResult out;
  size_t reject_streak = 0;
  for (size_t idx = 0; idx < records.size(); ++idx) {
    const LogRecord& record = records[idx];
    try {
      if (const auto* u = std::get_if<ImuSample>(&record)) {
        pipeline.process_imu(*u);
        ++out.stats.imu_samples;
        out.estimates.push_back(pipeline.snapshot(u->t));
      } else if (const auto* m = std::get_if<Measurement>(&record)) {
        ++out.stats.measurements;
        VerdictRecord verdict = pipeline.process_measurement(*m);
        out.verdicts.push_back(verdict);
        if (verdict.accepted) {
          ++out.stats.accepted;
          reject_streak = 0;
        } else {
          ++(verdict.reason == "stale" ? out.stats.rejected_stale : out.stats.rejected_gate);
          ++reject_streak;
          out.stats.max_reject_streak = std::max(out.stats.max_reject_streak, reject_streak);
        }
      }
      // truth / verdict / estimate records pass through untouched
    } catch (const Error& e) {
      throw Error("replay: record " + std::to_string(idx) + " at t=" +
                  std::to_string(record_time(record)) + ": " + e.what());
    }
  }
  out.origins = pipeline.origins();
  return out;
}

}  // namespace msf
