#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msf/error.hpp"
#include "msf/replay.hpp"
#include "msf/sim.hpp"
#include "test_util.hpp"

using namespace msf;

namespace {

const Eigen::Vector3d kGravity(0, 0, -9.81);

RunConfig base_config() {
  RunConfig c;
  c.process_noise.sigma_v2 = Eigen::Vector3d::Constant(1e-6);
  c.process_noise.sigma_theta2 = Eigen::Vector3d::Constant(1e-8);
  c.process_noise.sigma_a2 = Eigen::Vector3d::Constant(1e-10);
  c.process_noise.sigma_w2 = Eigen::Vector3d::Constant(1e-12);
  c.initial_state.p = Eigen::Vector3d(0, 0, 1);
  c.initial_state.gravity = kGravity;
  return c;
}

SensorConfig position_sensor(const std::string& id, double sigma) {
  SensorConfig s;
  s.sensor_id = id;
  s.provides_position = true;
  s.var_position = Eigen::Vector3d::Constant(sigma * sigma);
  s.limit_position = Eigen::Vector3d::Constant(1.0);
  s.bootstrap_origin = false;
  return s;
}

std::vector<LogRecord> hover_imu(double duration, double rate) {
  sim::TrajectoryProfile prof;
  prof.kind = sim::TrajectoryKind::hover;
  prof.duration = duration;
  auto truth = sim::generate_truth(prof, rate);
  auto imu = sim::synthesize_imu(truth, Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                                 sim::ImuNoise{}, kGravity, 1);
  std::vector<LogRecord> records;
  for (const auto& u : imu) records.emplace_back(u);
  return records;
}

Measurement position_measurement(double t, const std::string& id, const Eigen::Vector3d& p) {
  Measurement m;
  m.t = m.t_delivery = t;
  m.sensor_id = id;
  m.kind = MeasurementKind::position;
  m.vec = p;
  return m;
}

}  // namespace

TEST_CASE("IMU-only log is pure dead reckoning with one estimate per sample") {
  RunConfig cfg = base_config();
  auto records = hover_imu(5.0, 100.0);
  ReplayResult res = replay(cfg, records);
  CHECK(res.estimates.size() == records.size());
  CHECK(res.verdicts.empty());
  CHECK(res.stats.imu_samples == records.size());
  // hover with exact IMU stays put
  CHECK((res.estimates.back().p - Eigen::Vector3d(0, 0, 1)).norm() <= 1e-9);
}

TEST_CASE("single perfect position sensor converges at the 1/sqrt(n) rate") {
  RunConfig cfg = base_config();
  // the 1/sqrt(n) oracle assumes pure measurement averaging: push the
  // process-noise floor far below it, keep the position prior weak and pin
  // the states the scalar model treats as known (attitude, biases)
  cfg.process_noise.sigma_v2 = Eigen::Vector3d::Constant(1e-14);
  cfg.process_noise.sigma_theta2 = Eigen::Vector3d::Constant(1e-14);
  cfg.process_noise.sigma_a2 = Eigen::Vector3d::Constant(1e-16);
  cfg.process_noise.sigma_w2 = Eigen::Vector3d::Constant(1e-16);
  cfg.initial_cov.p = Eigen::Vector3d::Constant(1.0);
  cfg.initial_cov.v = Eigen::Vector3d::Constant(1e-10);
  cfg.initial_cov.theta = Eigen::Vector3d::Constant(1e-8);
  cfg.initial_cov.accel_bias = Eigen::Vector3d::Constant(1e-10);
  cfg.initial_cov.gyro_bias = Eigen::Vector3d::Constant(1e-10);
  cfg.initial_cov.gravity = Eigen::Vector3d::Constant(1e-12);
  cfg.initial_state.p = Eigen::Vector3d(0.3, -0.2, 1.4);  // start off truth
  cfg.sensors.push_back(position_sensor("anchor", 0.1));

  auto records = hover_imu(60.0, 100.0);
  const Eigen::Vector3d truth_p(0, 0, 1);
  std::mt19937_64 rng(61);
  std::normal_distribution<double> gauss(0.0, 0.1);
  size_t n_updates = 0;
  for (int k = 1; k <= 600; ++k) {  // 10 Hz over 60 s
    double t = 0.1 * k - 0.001;
    records.emplace_back(position_measurement(
        t, "anchor", truth_p + Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng))));
    ++n_updates;
  }
  ReplayResult res = replay(cfg, records);
  CHECK(res.stats.accepted == n_updates);
  const double bound = 5.0 * 0.1 / std::sqrt(static_cast<double>(n_updates));
  CHECK((res.estimates.back().p - truth_p).norm() <= bound);
}

TEST_CASE("rejected measurements leave the trajectory bitwise unchanged") {
  RunConfig cfg = base_config();
  cfg.sensors.push_back(position_sensor("anchor", 0.05));

  auto with_outlier = hover_imu(1.0, 100.0);
  auto clean = with_outlier;
  // 40 m spike, far beyond the 1 m limit
  with_outlier.emplace_back(
      position_measurement(0.5005, "anchor", Eigen::Vector3d(40, 0, 1)));

  ReplayResult res_bad = replay(cfg, with_outlier);
  ReplayResult res_clean = replay(cfg, clean);

  REQUIRE(res_bad.verdicts.size() == 1);
  CHECK_FALSE(res_bad.verdicts[0].accepted);
  CHECK(res_bad.verdicts[0].violating_axes == std::vector<int>{0});
  REQUIRE(res_bad.estimates.size() == res_clean.estimates.size());
  for (size_t i = 0; i < res_bad.estimates.size(); ++i) {
    CHECK(res_bad.estimates[i].p == res_clean.estimates[i].p);
    CHECK(res_bad.estimates[i].v == res_clean.estimates[i].v);
    CHECK(res_bad.estimates[i].q.w == res_clean.estimates[i].q.w);
    CHECK(res_bad.estimates[i].cov_diag == res_clean.estimates[i].cov_diag);
  }
}

TEST_CASE("accepted measurements change the state") {
  RunConfig cfg = base_config();
  cfg.sensors.push_back(position_sensor("anchor", 0.05));
  auto records = hover_imu(1.0, 100.0);
  records.emplace_back(position_measurement(0.5005, "anchor", Eigen::Vector3d(0.2, 0, 1)));
  ReplayResult res = replay(cfg, records);
  REQUIRE(res.verdicts.size() == 1);
  CHECK(res.verdicts[0].accepted);
  CHECK(res.estimates.back().p.x() > 1e-4);
}

TEST_CASE("measurements older than the staleness bound are rejected as stale") {
  RunConfig cfg = base_config();
  cfg.replay.staleness = 0.1;
  cfg.sensors.push_back(position_sensor("anchor", 0.05));

  auto records = hover_imu(2.0, 100.0);
  Measurement late = position_measurement(0.5, "anchor", Eigen::Vector3d(0, 0, 1));
  late.t_delivery = 1.5;  // 1.0 s late, bound is 0.1
  records.emplace_back(late);
  Measurement ok = position_measurement(1.45, "anchor", Eigen::Vector3d(0, 0, 1));
  ok.t_delivery = 1.5;  // 50 ms late, inside the bound
  records.emplace_back(ok);

  ReplayResult res = replay(cfg, records);
  REQUIRE(res.verdicts.size() == 2);
  CHECK_FALSE(res.verdicts[0].accepted);
  CHECK(res.verdicts[0].reason == "stale");
  CHECK(res.verdicts[1].accepted);
  CHECK(res.stats.rejected_stale == 1);
  CHECK(res.stats.accepted == 1);
}

TEST_CASE("every measurement appears exactly once in the verdict log") {
  RunConfig cfg = base_config();
  cfg.sensors.push_back(position_sensor("anchor", 0.1));
  auto records = hover_imu(10.0, 100.0);
  std::mt19937_64 rng(62);
  std::normal_distribution<double> gauss(0.0, 0.1);
  size_t n_meas = 0;
  for (int k = 1; k <= 50; ++k) {
    records.emplace_back(position_measurement(
        0.2 * k - 0.05, "anchor", Eigen::Vector3d(gauss(rng), gauss(rng), 1 + gauss(rng))));
    ++n_meas;
  }
  ReplayResult res = replay(cfg, records);
  CHECK(res.verdicts.size() == n_meas);
  CHECK(res.stats.accepted + res.stats.rejected_gate + res.stats.rejected_stale == n_meas);
}

TEST_CASE("replay is deterministic: identical runs emit identical estimate lines") {
  RunConfig cfg = base_config();
  cfg.sensors.push_back(position_sensor("anchor", 0.1));
  auto records = hover_imu(5.0, 100.0);
  std::mt19937_64 rng(63);
  std::normal_distribution<double> gauss(0.0, 0.1);
  for (int k = 1; k <= 25; ++k) {
    records.emplace_back(position_measurement(
        0.2 * k - 0.05, "anchor", Eigen::Vector3d(gauss(rng), gauss(rng), 1 + gauss(rng))));
  }
  ReplayResult a = replay(cfg, records);
  ReplayResult b = replay(cfg, records);
  REQUIRE(a.estimates.size() == b.estimates.size());
  for (size_t i = 0; i < a.estimates.size(); ++i) {
    CHECK(to_line(a.estimates[i]) == to_line(b.estimates[i]));
  }
}

TEST_CASE("unsorted records are ordered before replay") {
  RunConfig cfg = base_config();
  auto records = hover_imu(1.0, 50.0);
  std::reverse(records.begin(), records.end());
  ReplayResult res = replay(cfg, records);  // would throw on decreasing stamps otherwise
  CHECK(res.estimates.size() == records.size());
}

TEST_CASE("unknown sensors in the log abort before the run starts") {
  RunConfig cfg = base_config();
  auto records = hover_imu(1.0, 50.0);
  records.emplace_back(position_measurement(0.5, "mystery", Eigen::Vector3d::Zero()));
  CHECK_THROWS_WITH_AS(replay(cfg, records),
                       doctest::Contains("missing from the registry"), Error);
}

TEST_CASE("a measurement kind without configured limits fails loudly") {
  RunConfig cfg = base_config();
  SensorConfig s = position_sensor("anchor", 0.1);
  s.provides_velocity = true;
  s.var_velocity = Eigen::Vector3d::Constant(1e-2);
  // no velocity limits configured
  cfg.sensors.push_back(s);

  auto records = hover_imu(1.0, 50.0);
  Measurement m;
  m.t = m.t_delivery = 0.5;
  m.sensor_id = "anchor";
  m.kind = MeasurementKind::velocity;
  m.vec = Eigen::Vector3d::Zero();
  records.emplace_back(m);
  CHECK_THROWS_WITH_AS(replay(cfg, records), doctest::Contains("no arbiter limits"), Error);
}

TEST_CASE("origin bootstrap maps the first measurement onto the filter state") {
  RunConfig cfg = base_config();
  SensorConfig s = position_sensor("offsensor", 0.05);
  s.bootstrap_origin = true;
  s.estimate_drift = true;
  s.provides_orientation = true;
  s.var_orientation = Eigen::Vector3d::Constant(1e-4);
  s.limit_orientation = Eigen::Vector3d::Constant(0.5);
  cfg.sensors.push_back(s);

  auto records = hover_imu(1.0, 100.0);
  // measurements offset by a constant transform from the filter state
  Measurement q_meas;
  q_meas.t = q_meas.t_delivery = 0.105;
  q_meas.sensor_id = "offsensor";
  q_meas.kind = MeasurementKind::orientation;
  q_meas.quat = so3::quat_from_angle_axis({0, 0, 0.3});
  records.emplace_back(q_meas);
  records.emplace_back(
      position_measurement(0.1051, "offsensor", Eigen::Vector3d(2.0, -1.0, 0.5)));

  ReplayResult res = replay(cfg, records);
  REQUIRE(res.origins.size() == 2);
  // both bootstrap measurements are zero-innovation, hence accepted
  CHECK(res.verdicts[0].accepted);
  CHECK(res.verdicts[0].innovation.norm() <= 1e-9);
  CHECK(res.verdicts[1].accepted);
  CHECK(res.verdicts[1].innovation.norm() <= 1e-9);
  // the adopted origin reproduces the measurement exactly at the state
  const auto& drift = res.estimates.back().drift;
  REQUIRE(drift.size() == 1);
  CHECK(std::abs(drift[0].second.q.z - q_meas.quat.z) <= 1e-9);
}

TEST_CASE("replay errors carry the offending record index and timestamp") {
  RunConfig cfg = base_config();
  auto records = hover_imu(1.0, 100.0);
  ImuSample bad;
  bad.t = 1.5;
  bad.accel = Eigen::Vector3d(std::numeric_limits<double>::quiet_NaN(), 0, 0);
  records.emplace_back(bad);
  CHECK_THROWS_WITH_AS(replay(cfg, records), doctest::Contains("t=1.5"), Error);
}

TEST_CASE("start/end window trims the replayed records") {
  RunConfig cfg = base_config();
  cfg.replay.start = 1.0;
  cfg.replay.end = 2.0;
  auto records = hover_imu(5.0, 100.0);
  ReplayResult res = replay(cfg, records);
  CHECK(res.estimates.front().t >= 1.0);
  CHECK(res.estimates.back().t <= 2.0);
}
