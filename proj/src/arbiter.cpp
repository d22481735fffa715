#include "msf/arbiter.hpp"

#include <cmath>

#include "msf/error.hpp"

namespace msf {

ArbiterVerdict gate(const Eigen::Vector3d& innovation, const Eigen::Vector3d& limits) {
  if (!(limits.array() > 0.0).all()) {
    throw Error("arbiter: limits must be configured and > 0 for every axis");
  }
  ArbiterVerdict verdict;
  verdict.innovation = innovation;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(innovation[k]) > limits[k]) verdict.violating_axes.push_back(k);
  }
  verdict.accepted = verdict.violating_axes.empty();
  return verdict;
}

Eigen::Vector3d suggest_limits(std::span<const Eigen::Vector3d> innovation_history,
                               double safety_factor, const Eigen::Vector3d& floor) {
  if (innovation_history.size() < 100) {
    throw Error("suggest_limits: need at least 100 innovation samples, got " +
                std::to_string(innovation_history.size()));
  }
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& v : innovation_history) mean += v;
  mean /= static_cast<double>(innovation_history.size());

  Eigen::Vector3d max_dev = Eigen::Vector3d::Zero();
  for (const auto& v : innovation_history) {
    max_dev = max_dev.cwiseMax((v - mean).cwiseAbs());
  }
  return (max_dev * safety_factor).cwiseMax(floor);
}

}  // namespace msf
