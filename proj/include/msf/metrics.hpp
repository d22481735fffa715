#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msf/log_io.hpp"
#include "msf/measurement.hpp"

namespace msf {

// Nearest-neighbor timestamp matching: for each query time the closest
// reference time within the window (default 20 ms, half the slowest lab
// sensor period). reference must be sorted ascending.
std::vector<std::pair<size_t, size_t>> match_nearest(std::span<const double> query,
                                                     std::span<const double> reference,
                                                     double window = 0.02);

double rmse(std::span<const double> errors);  // requires >= 2 samples

// Yaw difference in degrees from the log-map z-component of the relative
// rotation R{truth}' R{est}, in (-180, 180].
double yaw_error_deg(const so3::Quat& estimate, const so3::Quat& truth);

struct SourceRmse {
  std::string source;
  double x = 0, y = 0, z = 0;     // [m]
  std::optional<double> yaw_deg;  // absent for position-only sources
  std::optional<double> roll_deg;   // secondary, JSON report only
  std::optional<double> pitch_deg;  // secondary, JSON report only
  size_t samples = 0;
  std::string note;
};

struct RmseReport {
  std::vector<SourceRmse> entries;
  std::string to_text() const;  // Table-style summary
  std::string to_json() const;
};

struct ErrorHistogram {
  std::vector<double> edges;      // bins + 1
  std::vector<double> densities;  // normalized: sum(density * width) == 1
};

// Requires >= 100 samples. Degenerate all-equal inputs occupy one bin.
ErrorHistogram histogram(std::span<const double> errors, int bins);

// Removes the estimated drift from raw position/orientation measurements
// so sensors become comparable against truth. The trace is sampled at the
// nearest timestamp at or before each measurement.
std::vector<Measurement> align_for_reporting(
    const std::vector<Measurement>& measurements,
    const std::vector<std::pair<double, DriftPose>>& drift_trace);

// Per-axis/yaw RMSE of an estimate series against ground truth.
SourceRmse evaluate_estimates(const std::vector<EstimateRecord>& estimates,
                              const std::vector<sim::GroundTruthSample>& truth,
                              const std::string& source_name, double window = 0.02);

// Same for a (drift-aligned) measurement stream; yaw present only when the
// stream carries orientation.
SourceRmse evaluate_measurements(const std::vector<Measurement>& measurements,
                                 const std::vector<sim::GroundTruthSample>& truth,
                                 const std::string& source_name, double window = 0.02);

}  // namespace msf
