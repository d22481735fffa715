#pragma once

#include <map>
#include <vector>

#include "msf/config.hpp"
#include "msf/filter.hpp"
#include "msf/log_io.hpp"

namespace msf {

// Sequencing core shared by log replay and the streaming C API: IMU samples
// drive prediction; measurements run through staleness rejection, sensor-
// origin bootstrap, the drift-aware measurement models, the arbiter gate
// and (on acceptance) correction + injection.
class FusionPipeline {
public:
  explicit FusionPipeline(RunConfig config);

  void process_imu(const ImuSample& u);
  VerdictRecord process_measurement(const Measurement& m);

  const RunConfig& config() const { return config_; }
  const StateLayout& layout() const { return layout_; }
  const EsEkf& filter() const { return ekf_; }

  bool knows_sensor(const std::string& sensor_id) const;
  // Current transform: the filter estimate for drift sensors, the fixed
  // (possibly bootstrapped) pose otherwise.
  DriftPose sensor_pose(const std::string& sensor_id) const;
  // Origins adopted so far, in adoption order.
  const std::vector<SensorOriginRecord>& origins() const { return origins_; }

  EstimateRecord snapshot(double t) const;

private:
  struct SensorState {
    const SensorConfig* config = nullptr;
    std::optional<int> slot;
    DriftPose fixed_pose;
    bool origin_position_set = false;
    bool origin_orientation_set = false;
  };

  DriftPose pose_of(const SensorState& s) const;
  void adopt_pose(SensorState& s, const DriftPose& pose, double t);

  RunConfig config_;
  StateLayout layout_;
  EsEkf ekf_;
  std::map<std::string, SensorState> sensors_;
  std::vector<SensorOriginRecord> origins_;
};

struct ReplayStats {
  size_t imu_samples = 0;
  size_t measurements = 0;
  size_t accepted = 0;
  size_t rejected_gate = 0;
  size_t rejected_stale = 0;
  size_t max_reject_streak = 0;  // diagnostic only, no recovery behavior
};

struct ReplayResult {
  std::vector<EstimateRecord> estimates;  // one per IMU sample
  std::vector<VerdictRecord> verdicts;    // one per measurement
  std::vector<SensorOriginRecord> origins;
  ReplayStats stats;
};

// Timestamp-ordered replay over a parsed record set. Records are sequenced
// on delivery time, IMU before measurements at equal stamps. Deterministic
// for a given config and record set. Filter faults are rethrown with the
// offending record's timestamp and index.
ReplayResult replay(const RunConfig& config, std::vector<LogRecord> records);

}  // namespace msf
