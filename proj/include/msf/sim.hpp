#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "msf/measurement.hpp"
#include "msf/state.hpp"

namespace msf::sim {

enum class TrajectoryKind { hover, line, circle, lissajous, waypoint_spline };
enum class YawProfile { fixed, tangent, sinusoid };

const char* to_string(TrajectoryKind k);
const char* to_string(YawProfile p);

// Analytic C^2 trajectory description. Attitude is a pure yaw profile;
// vehicle dynamics are out of scope.
struct TrajectoryProfile {
  TrajectoryKind kind = TrajectoryKind::circle;
  double amplitude = 1.0;  // [m]
  double period = 10.0;    // [s]
  YawProfile yaw = YawProfile::fixed;
  double yaw_amplitude = 0.5;  // [rad], sinusoid profile
  double duration = 60.0;      // [s]
  std::uint64_t seed = 0;
  Eigen::Vector3d origin = Eigen::Vector3d(0, 0, 1);
};

struct GroundTruthSample {
  double t = 0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  Eigen::Vector3d a = Eigen::Vector3d::Zero();  // world frame
  so3::Quat q = so3::Quat::identity();
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();  // body frame
};

// Samples the analytic trajectory at the given rate. Deterministic per
// seed. Throws when the rate undersamples a periodic profile.
std::vector<GroundTruthSample> generate_truth(const TrajectoryProfile& profile, double rate_hz);

struct ImuNoise {
  Eigen::Vector3d sigma_accel = Eigen::Vector3d::Zero();  // [m/s^2]
  Eigen::Vector3d sigma_gyro = Eigen::Vector3d::Zero();   // [rad/s]
};

// Inverts the specific-force model: a_mv = R' (a - g) + a_b + noise,
// w_mv = omega + w_b + noise. Running the filter prediction on a clean
// stream reproduces the truth.
std::vector<ImuSample> synthesize_imu(const std::vector<GroundTruthSample>& truth,
                                      const Eigen::Vector3d& accel_bias,
                                      const Eigen::Vector3d& gyro_bias, const ImuNoise& noise,
                                      const Eigen::Vector3d& gravity, std::uint64_t seed);

enum class DriftModel { none, constant_offset, random_walk };

const char* to_string(DriftModel m);

struct SensorSpec {
  std::string id;
  bool position = false;
  bool orientation = false;
  bool velocity = false;
  double rate_hz = 10.0;
  Eigen::Vector3d noise_pos = Eigen::Vector3d::Zero();  // sigma [m]
  Eigen::Vector3d noise_att = Eigen::Vector3d::Zero();  // sigma [rad], angle-axis
  Eigen::Vector3d noise_vel = Eigen::Vector3d::Zero();  // sigma [m/s]
  DriftModel drift_model = DriftModel::none;
  DriftPose drift_offset;           // constant value / walk start
  double drift_walk_pos = 0.0;      // [m/sqrt(s)]
  double drift_walk_att = 0.0;      // [rad/sqrt(s)]
  double outlier_probability = 0.0; // position spikes
  double outlier_magnitude = 0.0;   // [m]
  double latency = 0.0;             // [s], delivery delay
};

struct SimulatedSensor {
  std::vector<Measurement> measurements;  // outlier_label set on injected spikes
  std::vector<std::pair<double, DriftPose>> drift_trace;  // ground-truth drift
};

// Applies the forward drift transform, Gaussian noise, labeled outliers and
// latency. Sensor samples land exactly on truth timestamps.
SimulatedSensor synthesize_sensor(const std::vector<GroundTruthSample>& truth,
                                  const SensorSpec& spec, std::uint64_t seed);

}  // namespace msf::sim
