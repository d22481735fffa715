#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace msf {

// Outcome of the component-wise innovation limit test. Rejection is
// whole-measurement: one violating axis discards the 3-vector.
struct ArbiterVerdict {
  bool accepted = true;
  std::vector<int> violating_axes;
  Eigen::Vector3d innovation = Eigen::Vector3d::Zero();
};

// Pure predicate: rejects when any |innovation[k]| > limits[k]. Throws on
// non-positive limits (misconfiguration must be loud).
ArbiterVerdict gate(const Eigen::Vector3d& innovation, const Eigen::Vector3d& limits);

// Recommended limit floors per measurement family.
inline constexpr double kLimitFloorPosition = 0.05;     // [m]
inline constexpr double kLimitFloorVelocity = 0.05;     // [m/s]
inline constexpr double kLimitFloorOrientation = 0.02;  // [rad]

// Offline helper: per-axis limit = max |value - mean| over the history,
// scaled by safety_factor and floored (constant histories would otherwise
// yield degenerate zero limits). Requires at least 100 samples.
Eigen::Vector3d suggest_limits(std::span<const Eigen::Vector3d> innovation_history,
                               double safety_factor = 1.5,
                               const Eigen::Vector3d& floor = Eigen::Vector3d::Constant(0.05));

}  // namespace msf
