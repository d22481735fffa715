#include "msf/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "msf/error.hpp"
#include "msf/sim.hpp"

namespace msf::pipeline {

namespace {

constexpr double kImuRate = 200.0;
const Eigen::Vector3d kGravity(0, 0, -9.81);

std::uint64_t substream(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 step keeps sensor streams decorrelated across seeds
  std::uint64_t z = seed + salt * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SensorConfig sensor_config_for(const sim::SensorSpec& spec, bool estimate_drift,
                               const Eigen::Vector3d& lim_pos, const Eigen::Vector3d& lim_att,
                               const Eigen::Vector3d& lim_vel) {
  SensorConfig c;
  c.sensor_id = spec.id;
  c.provides_position = spec.position;
  c.provides_orientation = spec.orientation;
  c.provides_velocity = spec.velocity;
  c.estimate_drift = estimate_drift;
  if (spec.position) {
    c.var_position = spec.noise_pos.cwiseAbs2().cwiseMax(1e-8);
    c.limit_position = lim_pos;
  }
  if (spec.orientation) {
    c.var_orientation = spec.noise_att.cwiseAbs2().cwiseMax(1e-8);
    c.limit_orientation = lim_att;
  }
  if (spec.velocity) {
    c.var_velocity = spec.noise_vel.cwiseAbs2().cwiseMax(1e-8);
    c.limit_velocity = lim_vel;
  }
  return c;
}

void append_sensor(std::vector<LogRecord>& log, std::vector<LogRecord>& truth,
                   const sim::SimulatedSensor& sensor, const std::string& id) {
  for (const auto& m : sensor.measurements) log.emplace_back(m);
  for (const auto& [t, pose] : sensor.drift_trace) {
    DriftTruthRecord r;
    r.t = t;
    r.sensor_id = id;
    r.pose = pose;
    truth.emplace_back(r);
  }
}

double record_sequence_time(const LogRecord& r) {
  if (const auto* m = std::get_if<Measurement>(&r)) return m->t_delivery;
  return record_time(r);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

Scenario make_lab_scenario(std::uint64_t seed, double duration) {
  if (duration <= 0.0) throw Error("simulate: duration must be > 0");
  Scenario out;

  sim::TrajectoryProfile traj;
  traj.kind = sim::TrajectoryKind::lissajous;
  traj.amplitude = 1.5;
  traj.period = 20.0;
  traj.yaw = sim::YawProfile::sinusoid;
  traj.yaw_amplitude = 0.6;
  traj.duration = duration;
  traj.seed = seed;

  auto truth = sim::generate_truth(traj, kImuRate);

  const Eigen::Vector3d accel_bias(0.05, -0.03, 0.02);
  const Eigen::Vector3d gyro_bias(0.002, -0.001, 0.0015);
  sim::ImuNoise imu_noise;
  imu_noise.sigma_accel = Eigen::Vector3d::Constant(0.02);
  imu_noise.sigma_gyro = Eigen::Vector3d::Constant(0.002);
  auto imu = sim::synthesize_imu(truth, accel_bias, gyro_bias, imu_noise, kGravity,
                                 substream(seed, 1));

  // slam: 10 Hz pose, slow random-walk drift, poor vertical axis
  sim::SensorSpec slam;
  slam.id = "slam";
  slam.position = true;
  slam.orientation = true;
  slam.rate_hz = 10.0;
  slam.noise_pos = Eigen::Vector3d(0.02, 0.02, 0.20);
  slam.noise_att = Eigen::Vector3d(0.005, 0.005, 0.010);
  slam.drift_model = sim::DriftModel::random_walk;
  slam.drift_walk_pos = 1e-3;
  slam.drift_walk_att = 2e-4;
  slam.latency = 0.03;

  // uwb: 15 Hz position only, no drift, noisy vertical axis
  sim::SensorSpec uwb;
  uwb.id = "uwb";
  uwb.position = true;
  uwb.rate_hz = 15.0;
  uwb.noise_pos = Eigen::Vector3d(0.08, 0.08, 0.25);

  // vio: 30 Hz pose + velocity, small constant extrinsic error
  sim::SensorSpec vio;
  vio.id = "vio";
  vio.position = true;
  vio.orientation = true;
  vio.velocity = true;
  vio.rate_hz = 30.0;
  vio.noise_pos = Eigen::Vector3d(0.05, 0.05, 0.05);
  vio.noise_att = Eigen::Vector3d(0.008, 0.008, 0.012);
  vio.noise_vel = Eigen::Vector3d(0.05, 0.05, 0.05);
  vio.drift_model = sim::DriftModel::constant_offset;
  vio.drift_offset.p = Eigen::Vector3d(0.10, -0.05, 0.08);
  vio.drift_offset.q = so3::quat_from_angle_axis({0, 0, 2.0 * M_PI / 180.0});

  auto slam_sim = sim::synthesize_sensor(truth, slam, substream(seed, 2));
  auto uwb_sim = sim::synthesize_sensor(truth, uwb, substream(seed, 3));
  auto vio_sim = sim::synthesize_sensor(truth, vio, substream(seed, 4));

  for (const auto& u : imu) out.log.emplace_back(u);
  append_sensor(out.log, out.truth, slam_sim, slam.id);
  append_sensor(out.log, out.truth, uwb_sim, uwb.id);
  append_sensor(out.log, out.truth, vio_sim, vio.id);
  for (const auto& s : truth) out.truth.emplace_back(s);

  std::stable_sort(out.log.begin(), out.log.end(), [](const LogRecord& a, const LogRecord& b) {
    const double ta = record_sequence_time(a), tb = record_sequence_time(b);
    if (ta != tb) return ta < tb;
    return std::holds_alternative<ImuSample>(a) && !std::holds_alternative<ImuSample>(b);
  });
  std::stable_sort(out.truth.begin(), out.truth.end(),
                   [](const LogRecord& a, const LogRecord& b) {
                     return record_time(a) < record_time(b);
                   });

  // matching filter configuration
  RunConfig cfg;
  cfg.process_noise.sigma_v2 = Eigen::Vector3d::Constant(4e-4);
  cfg.process_noise.sigma_theta2 = Eigen::Vector3d::Constant(4e-6);
  cfg.process_noise.sigma_a2 = Eigen::Vector3d::Constant(1e-8);
  cfg.process_noise.sigma_w2 = Eigen::Vector3d::Constant(1e-10);
  cfg.initial_state.p = truth.front().p;
  cfg.initial_state.v = truth.front().v;
  cfg.initial_state.q = truth.front().q;
  cfg.initial_state.gravity = kGravity;
  cfg.replay.staleness = 0.1;

  SensorConfig slam_cfg = sensor_config_for(slam, true, {0.5, 0.5, 1.5}, {0.15, 0.15, 0.2}, {});
  slam_cfg.drift_noise_pos = Eigen::Vector3d::Constant(slam.drift_walk_pos * slam.drift_walk_pos);
  slam_cfg.drift_noise_theta =
      Eigen::Vector3d::Constant(slam.drift_walk_att * slam.drift_walk_att);
  SensorConfig uwb_cfg = sensor_config_for(uwb, false, {0.6, 0.6, 1.8}, {}, {});
  // surveyed anchors: the UWB frame IS the world frame, so it must not
  // re-origin itself from a noisy first fix
  uwb_cfg.bootstrap_origin = false;
  SensorConfig vio_cfg =
      sensor_config_for(vio, true, {0.4, 0.4, 0.4}, {0.12, 0.12, 0.15}, {0.5, 0.5, 0.5});

  cfg.sensors = {slam_cfg, uwb_cfg, vio_cfg};
  cfg.validate();
  out.config = cfg;
  return out;
}

SimulateResult run_simulate(const SimulateOptions& options,
                            const std::filesystem::path& out_dir) {
  if (options.preset != "lab") {
    throw Error("simulate: unknown preset '" + options.preset + "' (available: lab)");
  }
  std::filesystem::create_directories(out_dir);
  Scenario scenario = make_lab_scenario(options.seed, options.duration);

  SimulateResult result;
  result.log_path = out_dir / "sim.jsonl";
  result.truth_path = out_dir / "truth.jsonl";
  result.config_path = out_dir / "config.json";

  write_log(result.log_path, scenario.log);
  write_log(result.truth_path, scenario.truth);
  std::ofstream cfg(result.config_path);
  if (!cfg) throw Error("cannot write " + result.config_path.string());
  cfg << run_config_to_json(scenario.config) << "\n";

  for (const auto& r : scenario.log) {
    if (std::holds_alternative<ImuSample>(r)) {
      ++result.imu_records;
    } else {
      ++result.measurement_records;
    }
  }
  return result;
}

FuseResult run_fuse(const std::filesystem::path& config_path,
                    const std::filesystem::path& log_path,
                    const std::filesystem::path& out_dir, const FuseOptions& options) {
  std::filesystem::create_directories(out_dir);
  RunConfig config = load_run_config(config_path);
  if (options.start) config.replay.start = options.start;
  if (options.end) config.replay.end = options.end;

  ParseResult parsed = parse_log(log_path);
  for (const auto& w : parsed.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  ReplayResult res = replay(config, std::move(parsed.records));

  FuseResult out;
  out.estimate_path = out_dir / "estimate.jsonl";
  out.csv_path = out_dir / "estimate.csv";
  out.stats = res.stats;

  LogWriter writer(out.estimate_path);
  for (const auto& r : res.origins) writer.write(r);
  for (const auto& r : res.estimates) writer.write(r);
  for (const auto& r : res.verdicts) writer.write(r);
  writer.flush();

  // rejection counters; a large reject streak means the filter and a sensor
  // disagreed persistently (e.g. a replay window starting away from the
  // configured initial state)
  {
    nlohmann::json stats;
    stats["imu_samples"] = res.stats.imu_samples;
    stats["measurements"] = res.stats.measurements;
    stats["accepted"] = res.stats.accepted;
    stats["rejected_gate"] = res.stats.rejected_gate;
    stats["rejected_stale"] = res.stats.rejected_stale;
    stats["max_reject_streak"] = res.stats.max_reject_streak;
    std::ofstream sf(out_dir / "stats.json");
    if (!sf) throw Error("cannot write " + (out_dir / "stats.json").string());
    sf << stats.dump(2) << "\n";
  }

  std::ofstream csv(out.csv_path);
  if (!csv) throw Error("cannot write " + out.csv_path.string());
  csv << "t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,yaw_deg\n";
  for (const auto& e : res.estimates) {
    const double yaw = yaw_error_deg(e.q, so3::Quat::identity());
    csv << format_double(e.t) << ',' << format_double(e.p.x()) << ',' << format_double(e.p.y())
        << ',' << format_double(e.p.z()) << ',' << format_double(e.v.x()) << ','
        << format_double(e.v.y()) << ',' << format_double(e.v.z()) << ','
        << format_double(e.q.w) << ',' << format_double(e.q.x) << ',' << format_double(e.q.y)
        << ',' << format_double(e.q.z) << ',' << format_double(yaw) << "\n";
  }
  return out;
}

EvaluateResult run_evaluate(const std::filesystem::path& estimate_path,
                            const std::filesystem::path& truth_path,
                            const std::optional<std::filesystem::path>& raw_log,
                            const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  std::vector<EstimateRecord> estimates;
  std::map<std::string, SensorOriginRecord> origins;
  for (auto& r : parse_log(estimate_path).records) {
    if (auto* e = std::get_if<EstimateRecord>(&r)) estimates.push_back(std::move(*e));
    if (auto* o = std::get_if<SensorOriginRecord>(&r)) origins[o->sensor_id] = *o;
  }
  if (estimates.empty()) throw Error("evaluate: no estimate records in " + estimate_path.string());

  std::vector<sim::GroundTruthSample> truth;
  for (auto& r : parse_log(truth_path).records) {
    if (auto* s = std::get_if<sim::GroundTruthSample>(&r)) truth.push_back(*s);
  }
  if (truth.empty()) throw Error("evaluate: no truth records in " + truth_path.string());

  RmseReport report;
  report.entries.push_back(evaluate_estimates(estimates, truth, "fused"));

  if (raw_log) {
    std::map<std::string, std::vector<Measurement>> by_sensor;
    for (auto& r : parse_log(*raw_log).records) {
      if (auto* m = std::get_if<Measurement>(&r)) by_sensor[m->sensor_id].push_back(*m);
    }
    for (auto& [id, ms] : by_sensor) {
      // drift trace from the estimate log; fixed origin if never estimated
      std::vector<std::pair<double, DriftPose>> trace;
      for (const auto& e : estimates) {
        for (const auto& [did, pose] : e.drift) {
          if (did == id) trace.emplace_back(e.t, pose);
        }
      }
      if (trace.empty()) {
        DriftPose fixed;
        if (auto it = origins.find(id); it != origins.end()) fixed = it->second.pose;
        trace.emplace_back(0.0, fixed);
      }
      SourceRmse entry = evaluate_measurements(align_for_reporting(ms, trace), truth, id);
      entry.note = "drift-aligned raw sensor";
      report.entries.push_back(entry);
    }
  }

  EvaluateResult out;
  out.report = report;
  out.report_json_path = out_dir / "report.json";
  out.report_text_path = out_dir / "report.txt";
  {
    std::ofstream j(out.report_json_path);
    if (!j) throw Error("cannot write " + out.report_json_path.string());
    j << report.to_json() << "\n";
    std::ofstream t(out.report_text_path);
    t << report.to_text();
  }

  // per-axis fused error series + histograms for plotting
  std::vector<double> tt(truth.size());
  for (size_t i = 0; i < truth.size(); ++i) tt[i] = truth[i].t;
  std::vector<double> te(estimates.size());
  for (size_t i = 0; i < estimates.size(); ++i) te[i] = estimates[i].t;
  auto pairs = match_nearest(te, tt);

  std::ofstream err_csv(out_dir / "errors.csv");
  err_csv << "t,ex,ey,ez,eyaw_deg\n";
  std::vector<double> ex, ey, ez;
  for (auto [i, j] : pairs) {
    Eigen::Vector3d d = estimates[i].p - truth[j].p;
    double dyaw = yaw_error_deg(estimates[i].q, truth[j].q);
    ex.push_back(d.x());
    ey.push_back(d.y());
    ez.push_back(d.z());
    err_csv << format_double(estimates[i].t) << ',' << format_double(d.x()) << ','
            << format_double(d.y()) << ',' << format_double(d.z()) << ','
            << format_double(dyaw) << "\n";
  }
  if (ex.size() >= 100) {
    std::ofstream hist_csv(out_dir / "histogram.csv");
    hist_csv << "axis,bin_lo,bin_hi,density\n";
    const char* names[3] = {"x", "y", "z"};
    const std::vector<double>* series[3] = {&ex, &ey, &ez};
    for (int a = 0; a < 3; ++a) {
      ErrorHistogram h = histogram(*series[a], 30);
      for (size_t b = 0; b + 1 < h.edges.size(); ++b) {
        hist_csv << names[a] << ',' << format_double(h.edges[b]) << ','
                 << format_double(h.edges[b + 1]) << ',' << format_double(h.densities[b])
                 << "\n";
      }
    }
  }
  return out;
}

}  // namespace msf::pipeline
