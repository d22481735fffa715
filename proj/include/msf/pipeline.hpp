#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "msf/config.hpp"
#include "msf/log_io.hpp"
#include "msf/metrics.hpp"
#include "msf/replay.hpp"

namespace msf::pipeline {

struct SimulateOptions {
  std::string preset = "lab";
  std::uint64_t seed = 0;
  double duration = 300.0;  // [s]
};

struct Scenario {
  std::vector<LogRecord> log;    // imu + measurements, delivery order
  std::vector<LogRecord> truth;  // ground truth + drift traces
  RunConfig config;
};

// Three-sensor desk-scale scenario: a 10 Hz drifting pose sensor with a
// noisy vertical axis, a 15 Hz drift-free position sensor, and a 30 Hz
// pose+velocity sensor with a small constant extrinsic error, over a 200 Hz
// IMU.
Scenario make_lab_scenario(std::uint64_t seed, double duration);

struct SimulateResult {
  std::filesystem::path log_path;
  std::filesystem::path truth_path;
  std::filesystem::path config_path;
  size_t imu_records = 0;
  size_t measurement_records = 0;
};

SimulateResult run_simulate(const SimulateOptions& options,
                            const std::filesystem::path& out_dir);

struct FuseOptions {
  std::optional<double> start;
  std::optional<double> end;
};

struct FuseResult {
  std::filesystem::path estimate_path;
  std::filesystem::path csv_path;
  ReplayStats stats;
};

FuseResult run_fuse(const std::filesystem::path& config_path,
                    const std::filesystem::path& log_path,
                    const std::filesystem::path& out_dir, const FuseOptions& options = {});

struct EvaluateResult {
  std::filesystem::path report_json_path;
  std::filesystem::path report_text_path;
  RmseReport report;
};

// raw_log adds drift-aligned per-sensor rows to the report.
EvaluateResult run_evaluate(const std::filesystem::path& estimate_path,
                            const std::filesystem::path& truth_path,
                            const std::optional<std::filesystem::path>& raw_log,
                            const std::filesystem::path& out_dir);

}  // namespace msf::pipeline
