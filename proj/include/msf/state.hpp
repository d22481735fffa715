#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "msf/so3.hpp"

namespace msf {

struct ImuSample {
  double t = 0.0;                                    // [s], monotonic
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();   // specific force a_mv, body frame [m/s^2]
  Eigen::Vector3d gyro = Eigen::Vector3d::Zero();    // angular rate w_mv, body frame [rad/s]
};

// Per-axis process noise variances feeding Q_w.
struct ProcessNoiseParams {
  Eigen::Vector3d sigma_v2 = Eigen::Vector3d::Constant(1e-3);      // velocity walk [m^2/s^2]
  Eigen::Vector3d sigma_theta2 = Eigen::Vector3d::Constant(1e-5);  // attitude walk [rad^2]
  Eigen::Vector3d sigma_a2 = Eigen::Vector3d::Constant(1e-6);      // accel bias walk [(m/s^2)^2]
  Eigen::Vector3d sigma_w2 = Eigen::Vector3d::Constant(1e-8);      // gyro bias walk [(rad/s)^2]

  void validate() const;  // throws unless every component > 0
};

// Sensor-frame transform estimated online for drifting sensors.
struct DriftPose {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  so3::Quat q = so3::Quat::identity();
};

// Block layout of the error state:
//   [dp, dv, dtheta, da_b, dw_b, dg, (dp_i, dtheta_i) per drift sensor]
// The drift ordering is fixed at construction and defines the covariance
// layout for the whole run.
class StateLayout {
public:
  static constexpr int kPos = 0;
  static constexpr int kVel = 3;
  static constexpr int kAtt = 6;
  static constexpr int kAccBias = 9;
  static constexpr int kGyroBias = 12;
  static constexpr int kGravity = 15;
  static constexpr int kBase = 18;

  StateLayout() = default;
  explicit StateLayout(std::vector<std::string> drift_sensor_ids);

  int dim() const { return kBase + 6 * static_cast<int>(drift_ids_.size()); }
  int drift_count() const { return static_cast<int>(drift_ids_.size()); }
  int drift_pos(int slot) const { return kBase + 6 * slot; }
  int drift_att(int slot) const { return kBase + 6 * slot + 3; }
  const std::vector<std::string>& drift_ids() const { return drift_ids_; }
  std::optional<int> slot_of(const std::string& sensor_id) const;

private:
  std::vector<std::string> drift_ids_;
};

// Large-signal state advanced by IMU integration. The drift vector is
// aligned with the StateLayout drift ordering.
struct NominalState {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();        // position, world [m]
  Eigen::Vector3d v = Eigen::Vector3d::Zero();        // velocity, world [m/s]
  so3::Quat q = so3::Quat::identity();                // attitude, body -> world
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Zero();   // a_b [m/s^2]
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();    // w_b [rad/s]
  Eigen::Vector3d gravity = Eigen::Vector3d(0, 0, -9.81); // g, world [m/s^2]
  std::vector<DriftPose> drift;
};

}  // namespace msf
