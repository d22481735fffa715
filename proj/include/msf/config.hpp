#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "msf/measurement.hpp"
#include "msf/state.hpp"

namespace msf {

// Per-block initial covariance diagonals (per-axis).
struct InitialCovariance {
  Eigen::Vector3d p = Eigen::Vector3d::Constant(1e-2);
  Eigen::Vector3d v = Eigen::Vector3d::Constant(1e-2);
  Eigen::Vector3d theta = Eigen::Vector3d::Constant(1e-3);
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Constant(1e-4);
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Constant(1e-4);
  Eigen::Vector3d gravity = Eigen::Vector3d::Constant(1e-6);
  Eigen::Vector3d drift_p = Eigen::Vector3d::Constant(1e-2);
  Eigen::Vector3d drift_theta = Eigen::Vector3d::Constant(1e-2);
};

struct ReplayOptions {
  double staleness = 0.1;  // [s]
  std::optional<double> start;
  std::optional<double> end;
};

// Full run description: filter tuning, sensor registry and replay window.
struct RunConfig {
  ProcessNoiseParams process_noise;
  InitialCovariance initial_cov;
  NominalState initial_state;  // drift poses come from the sensor registry
  bool reset_jacobian = true;
  ReplayOptions replay;
  std::vector<SensorConfig> sensors;

  void validate() const;
  StateLayout make_layout() const;  // drift sensors in registry order
  NominalState make_initial_state(const StateLayout& layout) const;
  Eigen::VectorXd initial_cov_diag(const StateLayout& layout) const;
  const SensorConfig* find_sensor(const std::string& id) const;
};

// Strict schema: unknown keys and malformed values are errors with the
// offending path in the message. Missing optional fields take defaults.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& config);

}  // namespace msf
