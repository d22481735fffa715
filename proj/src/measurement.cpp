#include "msf/measurement.hpp"

#include "msf/error.hpp"

namespace msf {

const char* to_string(MeasurementKind kind) {
  switch (kind) {
    case MeasurementKind::position: return "position";
    case MeasurementKind::orientation: return "orientation";
    case MeasurementKind::velocity: return "velocity";
  }
  return "?";
}

std::optional<MeasurementKind> measurement_kind_from_string(const std::string& s) {
  if (s == "position") return MeasurementKind::position;
  if (s == "orientation") return MeasurementKind::orientation;
  if (s == "velocity") return MeasurementKind::velocity;
  return std::nullopt;
}

void SensorConfig::validate() const {
  if (sensor_id.empty()) throw Error("sensor config: id must not be empty");
  if (!provides_position && !provides_orientation && !provides_velocity) {
    throw Error("sensor " + sensor_id + ": provides no measurement kind");
  }
  if (estimate_drift && !provides_position && !provides_orientation) {
    throw Error("sensor " + sensor_id +
                ": velocity-only sensors cannot estimate drift (no observability)");
  }
  auto positive = [&](const Eigen::Vector3d& v, const char* name) {
    if (!(v.array() > 0.0).all()) {
      throw Error("sensor " + sensor_id + ": " + name + " variances must be > 0");
    }
  };
  if (provides_position) positive(var_position, "position");
  if (provides_orientation) positive(var_orientation, "orientation");
  if (provides_velocity) positive(var_velocity, "velocity");
}

Eigen::Vector3d h_position(const NominalState& state, const DriftPose& drift) {
  return so3::quat_to_rotmat(drift.q) * state.p + drift.p;
}

so3::Quat h_orientation(const NominalState& state, const DriftPose& drift) {
  return so3::quat_multiply(drift.q, state.q);
}

Eigen::Vector3d h_velocity(const NominalState& state) { return state.v; }

Eigen::Vector3d h_velocity_body(const NominalState& state) {
  return so3::quat_to_rotmat(state.q).transpose() * state.v;
}

Eigen::Vector3d orientation_innovation(const NominalState& state, const DriftPose& drift,
                                       const so3::Quat& q_mv) {
  const Eigen::Matrix3d predicted = so3::quat_to_rotmat(h_orientation(state, drift));
  return so3::log_vee(predicted.transpose() * so3::quat_to_rotmat(q_mv));
}

Eigen::MatrixXd H_position(const StateLayout& layout, const DriftPose& drift,
                           std::optional<int> slot) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, layout.dim());
  H.block<3, 3>(0, StateLayout::kPos) = so3::quat_to_rotmat(drift.q);
  if (slot) H.block<3, 3>(0, layout.drift_pos(*slot)) = Eigen::Matrix3d::Identity();
  // the drift-attitude columns stay zero
  return H;
}

Eigen::MatrixXd H_orientation(const StateLayout& layout, const so3::Quat& q_mv,
                              std::optional<int> slot) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, layout.dim());
  H.block<3, 3>(0, StateLayout::kAtt) = Eigen::Matrix3d::Identity();
  if (slot) {
    H.block<3, 3>(0, layout.drift_att(*slot)) = so3::quat_to_rotmat(q_mv).transpose();
  }
  return H;
}

Eigen::MatrixXd H_velocity(const StateLayout& layout) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, layout.dim());
  H.block<3, 3>(0, StateLayout::kVel) = Eigen::Matrix3d::Identity();
  return H;
}

Eigen::MatrixXd H_velocity_body(const StateLayout& layout, const NominalState& state) {
  const Eigen::Matrix3d Rt = so3::quat_to_rotmat(state.q).transpose();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, layout.dim());
  H.block<3, 3>(0, StateLayout::kVel) = Rt;
  H.block<3, 3>(0, StateLayout::kAtt) = so3::skew(Rt * state.v);
  return H;
}

Eigen::Vector3d remove_drift_position(const Eigen::Vector3d& p_mv, const DriftPose& drift) {
  return so3::quat_to_rotmat(drift.q).transpose() * (p_mv - drift.p);
}

so3::Quat remove_drift_orientation(const so3::Quat& q_mv, const so3::Quat& q_i) {
  return so3::quat_multiply(so3::quat_inverse(q_i), q_mv);
}

}  // namespace msf
