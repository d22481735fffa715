#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "msf/measurement.hpp"
#include "msf/sim.hpp"
#include "msf/state.hpp"

namespace msf {

// Arbiter outcome as logged by the replay driver. reason is "gate" for
// limit-test rejections and "stale" for measurements older than the
// staleness bound (those never reach the gate).
struct VerdictRecord {
  double t = 0;
  std::string sensor_id;
  MeasurementKind kind = MeasurementKind::position;
  bool accepted = true;
  std::vector<int> violating_axes;
  Eigen::Vector3d innovation = Eigen::Vector3d::Zero();
  std::string reason = "gate";
};

struct EstimateRecord {
  double t = 0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  so3::Quat q = so3::Quat::identity();
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Zero();
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();
  Eigen::Vector3d gravity = Eigen::Vector3d::Zero();
  std::vector<std::pair<std::string, DriftPose>> drift;
  Eigen::VectorXd cov_diag;
};

// Ground-truth drift trace emitted by the simulator for evaluation.
struct DriftTruthRecord {
  double t = 0;
  std::string sensor_id;
  DriftPose pose;
};

// Fixed origin adopted for a sensor when its first measurement bootstraps
// the transform.
struct SensorOriginRecord {
  double t = 0;
  std::string sensor_id;
  DriftPose pose;
};

using LogRecord = std::variant<ImuSample, Measurement, sim::GroundTruthSample, VerdictRecord,
                               EstimateRecord, DriftTruthRecord, SensorOriginRecord>;

double record_time(const LogRecord& r);

// One line-delimited JSON record. Timestamps are emitted as float seconds;
// the parser also accepts ISO-8601 strings.
std::string to_line(const LogRecord& r);

struct ParseResult {
  std::vector<LogRecord> records;  // file order
  size_t malformed = 0;
  std::vector<std::string> warnings;  // per skipped line, with line numbers
};

// Reads a line-delimited record file. Malformed lines are skipped and
// reported; unknown record types are skipped with a warning. Throws when
// the file is unreadable or more than 10% of lines are malformed.
ParseResult parse_log(const std::filesystem::path& path);
ParseResult parse_records(std::istream& in);

void write_log(const std::filesystem::path& path, const std::vector<LogRecord>& records);

class LogWriter {
public:
  explicit LogWriter(const std::filesystem::path& path);
  void write(const LogRecord& r);
  void flush();

private:
  std::ofstream out_;
};

}  // namespace msf
