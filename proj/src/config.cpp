#include "msf/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "msf/error.hpp"

namespace msf {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error("config: " + path + ": " + msg);
}

void check_keys(const json& j, const std::string& path, std::set<std::string> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) fail(path + "." + key, "unknown key");
  }
}

// scalar broadcast or explicit 3-vector
Eigen::Vector3d vec3(const json& j, const std::string& path) {
  if (j.is_number()) return Eigen::Vector3d::Constant(j.get<double>());
  if (j.is_array() && j.size() == 3) {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  }
  fail(path, "expected a number or a 3-element array");
}

so3::Quat quat(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4) fail(path, "expected a [w,x,y,z] array");
  return so3::canonical(
      {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()});
}

json vec_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }
json quat_json(const so3::Quat& q) { return json::array({q.w, q.x, q.y, q.z}); }

SensorConfig parse_sensor(const json& j, const std::string& path) {
  check_keys(j, path,
             {"id", "kinds", "estimate_drift", "bootstrap_origin", "body_frame_velocity",
              "initial_drift", "variance", "limits", "drift_process_noise"});
  SensorConfig c;
  if (!j.contains("id")) fail(path, "missing 'id'");
  c.sensor_id = j["id"].get<std::string>();
  if (!j.contains("kinds") || !j["kinds"].is_array() || j["kinds"].empty()) {
    fail(path + ".kinds", "must list at least one measurement kind");
  }
  for (const auto& k : j["kinds"]) {
    auto kind = measurement_kind_from_string(k.get<std::string>());
    if (!kind) fail(path + ".kinds", "unknown kind '" + k.get<std::string>() + "'");
    if (*kind == MeasurementKind::position) c.provides_position = true;
    if (*kind == MeasurementKind::orientation) c.provides_orientation = true;
    if (*kind == MeasurementKind::velocity) c.provides_velocity = true;
  }
  c.estimate_drift = j.value("estimate_drift", false);
  c.bootstrap_origin = j.value("bootstrap_origin", true);
  c.body_frame_velocity = j.value("body_frame_velocity", false);

  if (j.contains("initial_drift")) {
    const json& d = j["initial_drift"];
    check_keys(d, path + ".initial_drift", {"p", "q"});
    if (d.contains("p")) c.initial_drift.p = vec3(d["p"], path + ".initial_drift.p");
    if (d.contains("q")) c.initial_drift.q = quat(d["q"], path + ".initial_drift.q");
  }

  if (!j.contains("variance")) fail(path, "missing 'variance'");
  const json& var = j["variance"];
  check_keys(var, path + ".variance", {"position", "orientation", "velocity"});
  auto need_var = [&](bool provided, const char* kind, Eigen::Vector3d& out) {
    if (provided) {
      if (!var.contains(kind)) fail(path + ".variance", std::string("missing '") + kind + "'");
      out = vec3(var[kind], path + ".variance." + kind);
    }
  };
  need_var(c.provides_position, "position", c.var_position);
  need_var(c.provides_orientation, "orientation", c.var_orientation);
  need_var(c.provides_velocity, "velocity", c.var_velocity);

  if (j.contains("limits")) {
    const json& lim = j["limits"];
    check_keys(lim, path + ".limits", {"position", "orientation", "velocity"});
    if (lim.contains("position")) c.limit_position = vec3(lim["position"], path + ".limits.position");
    if (lim.contains("orientation")) {
      c.limit_orientation = vec3(lim["orientation"], path + ".limits.orientation");
    }
    if (lim.contains("velocity")) c.limit_velocity = vec3(lim["velocity"], path + ".limits.velocity");
  }

  if (j.contains("drift_process_noise")) {
    const json& dn = j["drift_process_noise"];
    check_keys(dn, path + ".drift_process_noise", {"position", "theta"});
    if (dn.contains("position")) {
      c.drift_noise_pos = vec3(dn["position"], path + ".drift_process_noise.position");
    }
    if (dn.contains("theta")) {
      c.drift_noise_theta = vec3(dn["theta"], path + ".drift_process_noise.theta");
    }
  }
  c.validate();
  return c;
}

}  // namespace

void RunConfig::validate() const {
  process_noise.validate();
  std::set<std::string> ids;
  for (const auto& s : sensors) {
    s.validate();
    if (!ids.insert(s.sensor_id).second) {
      throw Error("config: duplicate sensor id '" + s.sensor_id + "'");
    }
  }
  if (replay.staleness < 0.0) throw Error("config: staleness bound must be >= 0");
  if (replay.start && replay.end && *replay.start > *replay.end) {
    throw Error("config: replay start is after end");
  }
}

StateLayout RunConfig::make_layout() const {
  std::vector<std::string> drift_ids;
  for (const auto& s : sensors) {
    if (s.estimate_drift) drift_ids.push_back(s.sensor_id);
  }
  return StateLayout(std::move(drift_ids));
}

NominalState RunConfig::make_initial_state(const StateLayout& layout) const {
  NominalState s = initial_state;
  s.q = so3::canonical(s.q);
  s.drift.clear();
  for (const auto& id : layout.drift_ids()) {
    const SensorConfig* cfg = find_sensor(id);
    s.drift.push_back(cfg ? cfg->initial_drift : DriftPose{});
  }
  return s;
}

Eigen::VectorXd RunConfig::initial_cov_diag(const StateLayout& layout) const {
  Eigen::VectorXd d(layout.dim());
  d.segment<3>(StateLayout::kPos) = initial_cov.p;
  d.segment<3>(StateLayout::kVel) = initial_cov.v;
  d.segment<3>(StateLayout::kAtt) = initial_cov.theta;
  d.segment<3>(StateLayout::kAccBias) = initial_cov.accel_bias;
  d.segment<3>(StateLayout::kGyroBias) = initial_cov.gyro_bias;
  d.segment<3>(StateLayout::kGravity) = initial_cov.gravity;
  for (int i = 0; i < layout.drift_count(); ++i) {
    d.segment<3>(layout.drift_pos(i)) = initial_cov.drift_p;
    d.segment<3>(layout.drift_att(i)) = initial_cov.drift_theta;
  }
  return d;
}

const SensorConfig* RunConfig::find_sensor(const std::string& id) const {
  for (const auto& s : sensors) {
    if (s.sensor_id == id) return &s;
  }
  return nullptr;
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(j, "$",
             {"process_noise", "initial_covariance", "initial_state", "reset_jacobian", "replay",
              "sensors"});

  RunConfig c;
  if (j.contains("process_noise")) {
    const json& pn = j["process_noise"];
    check_keys(pn, "$.process_noise", {"sigma_v2", "sigma_theta2", "sigma_a2", "sigma_w2"});
    if (pn.contains("sigma_v2")) c.process_noise.sigma_v2 = vec3(pn["sigma_v2"], "$.process_noise.sigma_v2");
    if (pn.contains("sigma_theta2")) {
      c.process_noise.sigma_theta2 = vec3(pn["sigma_theta2"], "$.process_noise.sigma_theta2");
    }
    if (pn.contains("sigma_a2")) c.process_noise.sigma_a2 = vec3(pn["sigma_a2"], "$.process_noise.sigma_a2");
    if (pn.contains("sigma_w2")) c.process_noise.sigma_w2 = vec3(pn["sigma_w2"], "$.process_noise.sigma_w2");
  }
  if (j.contains("initial_covariance")) {
    const json& ic = j["initial_covariance"];
    check_keys(ic, "$.initial_covariance",
               {"p", "v", "theta", "accel_bias", "gyro_bias", "gravity", "drift_p", "drift_theta"});
    auto get = [&](const char* k, Eigen::Vector3d& out) {
      if (ic.contains(k)) out = vec3(ic[k], std::string("$.initial_covariance.") + k);
    };
    get("p", c.initial_cov.p);
    get("v", c.initial_cov.v);
    get("theta", c.initial_cov.theta);
    get("accel_bias", c.initial_cov.accel_bias);
    get("gyro_bias", c.initial_cov.gyro_bias);
    get("gravity", c.initial_cov.gravity);
    get("drift_p", c.initial_cov.drift_p);
    get("drift_theta", c.initial_cov.drift_theta);
  }
  if (j.contains("initial_state")) {
    const json& st = j["initial_state"];
    check_keys(st, "$.initial_state", {"p", "v", "q", "accel_bias", "gyro_bias", "gravity"});
    if (st.contains("p")) c.initial_state.p = vec3(st["p"], "$.initial_state.p");
    if (st.contains("v")) c.initial_state.v = vec3(st["v"], "$.initial_state.v");
    if (st.contains("q")) c.initial_state.q = quat(st["q"], "$.initial_state.q");
    if (st.contains("accel_bias")) {
      c.initial_state.accel_bias = vec3(st["accel_bias"], "$.initial_state.accel_bias");
    }
    if (st.contains("gyro_bias")) {
      c.initial_state.gyro_bias = vec3(st["gyro_bias"], "$.initial_state.gyro_bias");
    }
    if (st.contains("gravity")) c.initial_state.gravity = vec3(st["gravity"], "$.initial_state.gravity");
  }
  c.reset_jacobian = j.value("reset_jacobian", true);
  if (j.contains("replay")) {
    const json& rp = j["replay"];
    check_keys(rp, "$.replay", {"staleness", "start", "end"});
    c.replay.staleness = rp.value("staleness", 0.1);
    if (rp.contains("start") && !rp["start"].is_null()) c.replay.start = rp["start"].get<double>();
    if (rp.contains("end") && !rp["end"].is_null()) c.replay.end = rp["end"].get<double>();
  }
  if (j.contains("sensors")) {
    if (!j["sensors"].is_array()) fail("$.sensors", "expected an array");
    int i = 0;
    for (const auto& s : j["sensors"]) {
      c.sensors.push_back(parse_sensor(s, "$.sensors[" + std::to_string(i) + "]"));
      ++i;
    }
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

std::string run_config_to_json(const RunConfig& config) {
  json j;
  j["process_noise"] = {{"sigma_v2", vec_json(config.process_noise.sigma_v2)},
                        {"sigma_theta2", vec_json(config.process_noise.sigma_theta2)},
                        {"sigma_a2", vec_json(config.process_noise.sigma_a2)},
                        {"sigma_w2", vec_json(config.process_noise.sigma_w2)}};
  j["initial_covariance"] = {{"p", vec_json(config.initial_cov.p)},
                             {"v", vec_json(config.initial_cov.v)},
                             {"theta", vec_json(config.initial_cov.theta)},
                             {"accel_bias", vec_json(config.initial_cov.accel_bias)},
                             {"gyro_bias", vec_json(config.initial_cov.gyro_bias)},
                             {"gravity", vec_json(config.initial_cov.gravity)},
                             {"drift_p", vec_json(config.initial_cov.drift_p)},
                             {"drift_theta", vec_json(config.initial_cov.drift_theta)}};
  j["initial_state"] = {{"p", vec_json(config.initial_state.p)},
                        {"v", vec_json(config.initial_state.v)},
                        {"q", quat_json(config.initial_state.q)},
                        {"accel_bias", vec_json(config.initial_state.accel_bias)},
                        {"gyro_bias", vec_json(config.initial_state.gyro_bias)},
                        {"gravity", vec_json(config.initial_state.gravity)}};
  j["reset_jacobian"] = config.reset_jacobian;
  json rp;
  rp["staleness"] = config.replay.staleness;
  if (config.replay.start) rp["start"] = *config.replay.start;
  if (config.replay.end) rp["end"] = *config.replay.end;
  j["replay"] = rp;

  json sensors = json::array();
  for (const auto& s : config.sensors) {
    json sj;
    sj["id"] = s.sensor_id;
    json kinds = json::array();
    if (s.provides_position) kinds.push_back("position");
    if (s.provides_orientation) kinds.push_back("orientation");
    if (s.provides_velocity) kinds.push_back("velocity");
    sj["kinds"] = kinds;
    sj["estimate_drift"] = s.estimate_drift;
    sj["bootstrap_origin"] = s.bootstrap_origin;
    sj["body_frame_velocity"] = s.body_frame_velocity;
    sj["initial_drift"] = {{"p", vec_json(s.initial_drift.p)}, {"q", quat_json(s.initial_drift.q)}};
    json var;
    if (s.provides_position) var["position"] = vec_json(s.var_position);
    if (s.provides_orientation) var["orientation"] = vec_json(s.var_orientation);
    if (s.provides_velocity) var["velocity"] = vec_json(s.var_velocity);
    sj["variance"] = var;
    json lim;
    if (s.limit_position) lim["position"] = vec_json(*s.limit_position);
    if (s.limit_orientation) lim["orientation"] = vec_json(*s.limit_orientation);
    if (s.limit_velocity) lim["velocity"] = vec_json(*s.limit_velocity);
    if (!lim.empty()) sj["limits"] = lim;
    if (!s.drift_noise_pos.isZero() || !s.drift_noise_theta.isZero()) {
      sj["drift_process_noise"] = {{"position", vec_json(s.drift_noise_pos)},
                                   {"theta", vec_json(s.drift_noise_theta)}};
    }
    sensors.push_back(sj);
  }
  j["sensors"] = sensors;
  return j.dump(2);
}

}  // namespace msf
