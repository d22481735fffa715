#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>

#include "msf/state.hpp"

namespace msf {

enum class MeasurementKind { position, orientation, velocity };

const char* to_string(MeasurementKind kind);
std::optional<MeasurementKind> measurement_kind_from_string(const std::string& s);

// One sensor observation. vec carries position [m] or velocity [m/s];
// quat carries q_mv for orientation. Orientation variance is per-axis in
// angle-axis radians^2. A variance on the record overrides the sensor
// config. t_delivery models transport latency: replay sequences on it,
// staleness checks use t.
struct Measurement {
  double t = 0.0;
  double t_delivery = 0.0;
  std::string sensor_id;
  MeasurementKind kind = MeasurementKind::position;
  Eigen::Vector3d vec = Eigen::Vector3d::Zero();
  so3::Quat quat = so3::Quat::identity();
  std::optional<Eigen::Vector3d> variance;
  bool outlier_label = false;  // simulator tag, ignored by the filter
};

struct SensorConfig {
  std::string sensor_id;
  bool provides_position = false;
  bool provides_orientation = false;
  bool provides_velocity = false;
  bool estimate_drift = false;
  bool bootstrap_origin = true;       // first measurement defines the sensor origin
  bool body_frame_velocity = false;   // default world frame
  DriftPose initial_drift;
  Eigen::Vector3d var_position = Eigen::Vector3d::Constant(1e-2);
  Eigen::Vector3d var_orientation = Eigen::Vector3d::Constant(1e-4);
  Eigen::Vector3d var_velocity = Eigen::Vector3d::Constant(1e-2);
  std::optional<Eigen::Vector3d> limit_position;     // arbiter [m]
  std::optional<Eigen::Vector3d> limit_orientation;  // arbiter [rad]
  std::optional<Eigen::Vector3d> limit_velocity;     // arbiter [m/s]
  Eigen::Vector3d drift_noise_pos = Eigen::Vector3d::Zero();    // [m^2/s], optional walk
  Eigen::Vector3d drift_noise_theta = Eigen::Vector3d::Zero();  // [rad^2/s]

  void validate() const;
};

// Measurement functions h(x_t). The drift pose is the sensor's current
// transform: the filter estimate for drift sensors, the fixed configured
// one otherwise.
Eigen::Vector3d h_position(const NominalState& state, const DriftPose& drift);
so3::Quat h_orientation(const NominalState& state, const DriftPose& drift);
Eigen::Vector3d h_velocity(const NominalState& state);
Eigen::Vector3d h_velocity_body(const NominalState& state);

// Angle-axis orientation innovation replacing (y - h) in the correction.
Eigen::Vector3d orientation_innovation(const NominalState& state, const DriftPose& drift,
                                       const so3::Quat& q_mv);

// Jacobians, 3 x D. slot selects the sensor's drift block; nullopt leaves
// every drift column zero (fixed-transform sensors).
Eigen::MatrixXd H_position(const StateLayout& layout, const DriftPose& drift,
                           std::optional<int> slot);
Eigen::MatrixXd H_orientation(const StateLayout& layout, const so3::Quat& q_mv,
                              std::optional<int> slot);
Eigen::MatrixXd H_velocity(const StateLayout& layout);
Eigen::MatrixXd H_velocity_body(const StateLayout& layout, const NominalState& state);

// Reporting-side drift removal, the inverse of the forward models.
Eigen::Vector3d remove_drift_position(const Eigen::Vector3d& p_mv, const DriftPose& drift);
so3::Quat remove_drift_orientation(const so3::Quat& q_mv, const so3::Quat& q_i);

}  // namespace msf
