#include "msf/log_io.hpp"

#include <json.hpp>

#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "msf/error.hpp"

namespace msf {

using nlohmann::json;

namespace {

json vec_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }
json quat_json(const so3::Quat& q) { return json::array({q.w, q.x, q.y, q.z}); }

Eigen::Vector3d vec_from(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(std::string("field '") + field + "' must be a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// stored verbatim: re-normalizing here would break bit-exact round trips
so3::Quat quat_from(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(std::string("field '") + field + "' must be a [w,x,y,z] array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

// Accepts float seconds or an ISO-8601 UTC stamp like
// 2024-05-01T12:30:05.250Z.
double time_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    std::tm tm = {};
    std::istringstream in(s);
    in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
    if (in.fail()) throw Error("unparseable ISO-8601 timestamp: " + s);
    double frac = 0.0;
    if (in.peek() == '.') {
      in.get();
      std::string digits;
      while (std::isdigit(in.peek())) digits.push_back(static_cast<char>(in.get()));
      if (!digits.empty()) frac = std::stod("0." + digits);
    }
    return static_cast<double>(timegm(&tm)) + frac;
  }
  throw Error("timestamp must be a number or ISO-8601 string");
}

const json& require(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw Error(std::string("missing field '") + field + "'");
  return *it;
}

LogRecord record_from_json(const json& j) {
  const std::string type = require(j, "type").get<std::string>();
  if (type == "imu") {
    ImuSample u;
    u.t = time_from(require(j, "t"));
    u.accel = vec_from(require(j, "a"), "a");
    u.gyro = vec_from(require(j, "w"), "w");
    return u;
  }
  if (type == "measurement") {
    Measurement m;
    m.t = time_from(require(j, "t"));
    m.t_delivery = j.contains("td") ? time_from(j["td"]) : m.t;
    m.sensor_id = require(j, "sensor").get<std::string>();
    auto kind = measurement_kind_from_string(require(j, "kind").get<std::string>());
    if (!kind) throw Error("unknown measurement kind: " + j["kind"].get<std::string>());
    m.kind = *kind;
    if (m.kind == MeasurementKind::orientation) {
      m.quat = quat_from(require(j, "q"), "q");
    } else {
      m.vec = vec_from(require(j, "value"), "value");
    }
    if (j.contains("var")) m.variance = vec_from(j["var"], "var");
    if (j.contains("outlier")) m.outlier_label = j["outlier"].get<bool>();
    return m;
  }
  if (type == "truth") {
    sim::GroundTruthSample s;
    s.t = time_from(require(j, "t"));
    s.p = vec_from(require(j, "p"), "p");
    s.v = vec_from(require(j, "v"), "v");
    s.a = vec_from(require(j, "a"), "a");
    s.q = quat_from(require(j, "q"), "q");
    s.omega = vec_from(require(j, "w"), "w");
    return s;
  }
  if (type == "truth_drift") {
    DriftTruthRecord r;
    r.t = time_from(require(j, "t"));
    r.sensor_id = require(j, "sensor").get<std::string>();
    r.pose.p = vec_from(require(j, "p"), "p");
    r.pose.q = quat_from(require(j, "q"), "q");
    return r;
  }
  if (type == "verdict") {
    VerdictRecord r;
    r.t = time_from(require(j, "t"));
    r.sensor_id = require(j, "sensor").get<std::string>();
    auto kind = measurement_kind_from_string(require(j, "kind").get<std::string>());
    if (!kind) throw Error("unknown measurement kind in verdict");
    r.kind = *kind;
    r.accepted = require(j, "accepted").get<bool>();
    r.violating_axes = require(j, "violating").get<std::vector<int>>();
    r.innovation = vec_from(require(j, "innovation"), "innovation");
    r.reason = j.value("reason", "gate");
    return r;
  }
  if (type == "estimate") {
    EstimateRecord r;
    r.t = time_from(require(j, "t"));
    r.p = vec_from(require(j, "p"), "p");
    r.v = vec_from(require(j, "v"), "v");
    r.q = quat_from(require(j, "q"), "q");
    r.accel_bias = vec_from(require(j, "ab"), "ab");
    r.gyro_bias = vec_from(require(j, "wb"), "wb");
    r.gravity = vec_from(require(j, "g"), "g");
    for (const auto& [id, pose] : require(j, "drift").items()) {
      DriftPose d;
      d.p = vec_from(require(pose, "p"), "drift.p");
      d.q = quat_from(require(pose, "q"), "drift.q");
      r.drift.emplace_back(id, d);
    }
    const json& diag = require(j, "pdiag");
    r.cov_diag.resize(static_cast<int>(diag.size()));
    for (size_t i = 0; i < diag.size(); ++i) r.cov_diag[static_cast<int>(i)] = diag[i].get<double>();
    return r;
  }
  if (type == "sensor_origin") {
    SensorOriginRecord r;
    r.t = time_from(require(j, "t"));
    r.sensor_id = require(j, "sensor").get<std::string>();
    r.pose.p = vec_from(require(j, "p"), "p");
    r.pose.q = quat_from(require(j, "q"), "q");
    return r;
  }
  throw Error("unknown record type: " + type);
}

}  // namespace

double record_time(const LogRecord& r) {
  return std::visit([](const auto& rec) { return rec.t; }, r);
}

std::string to_line(const LogRecord& r) {
  json j;
  if (const auto* u = std::get_if<ImuSample>(&r)) {
    j["type"] = "imu";
    j["t"] = u->t;
    j["a"] = vec_json(u->accel);
    j["w"] = vec_json(u->gyro);
  } else if (const auto* m = std::get_if<Measurement>(&r)) {
    j["type"] = "measurement";
    j["t"] = m->t;
    if (m->t_delivery != m->t) j["td"] = m->t_delivery;
    j["sensor"] = m->sensor_id;
    j["kind"] = to_string(m->kind);
    if (m->kind == MeasurementKind::orientation) {
      j["q"] = quat_json(m->quat);
    } else {
      j["value"] = vec_json(m->vec);
    }
    if (m->variance) j["var"] = vec_json(*m->variance);
    if (m->outlier_label) j["outlier"] = true;
  } else if (const auto* s = std::get_if<sim::GroundTruthSample>(&r)) {
    j["type"] = "truth";
    j["t"] = s->t;
    j["p"] = vec_json(s->p);
    j["v"] = vec_json(s->v);
    j["a"] = vec_json(s->a);
    j["q"] = quat_json(s->q);
    j["w"] = vec_json(s->omega);
  } else if (const auto* d = std::get_if<DriftTruthRecord>(&r)) {
    j["type"] = "truth_drift";
    j["t"] = d->t;
    j["sensor"] = d->sensor_id;
    j["p"] = vec_json(d->pose.p);
    j["q"] = quat_json(d->pose.q);
  } else if (const auto* v = std::get_if<VerdictRecord>(&r)) {
    j["type"] = "verdict";
    j["t"] = v->t;
    j["sensor"] = v->sensor_id;
    j["kind"] = to_string(v->kind);
    j["accepted"] = v->accepted;
    j["violating"] = v->violating_axes;
    j["innovation"] = vec_json(v->innovation);
    j["reason"] = v->reason;
  } else if (const auto* e = std::get_if<EstimateRecord>(&r)) {
    j["type"] = "estimate";
    j["t"] = e->t;
    j["p"] = vec_json(e->p);
    j["v"] = vec_json(e->v);
    j["q"] = quat_json(e->q);
    j["ab"] = vec_json(e->accel_bias);
    j["wb"] = vec_json(e->gyro_bias);
    j["g"] = vec_json(e->gravity);
    json drift = json::object();
    for (const auto& [id, pose] : e->drift) {
      drift[id] = {{"p", vec_json(pose.p)}, {"q", quat_json(pose.q)}};
    }
    j["drift"] = drift;
    json diag = json::array();
    for (int i = 0; i < e->cov_diag.size(); ++i) diag.push_back(e->cov_diag[i]);
    j["pdiag"] = diag;
  } else if (const auto* o = std::get_if<SensorOriginRecord>(&r)) {
    j["type"] = "sensor_origin";
    j["t"] = o->t;
    j["sensor"] = o->sensor_id;
    j["p"] = vec_json(o->pose.p);
    j["q"] = quat_json(o->pose.q);
  }
  return j.dump();
}

ParseResult parse_records(std::istream& in) {
  ParseResult result;
  std::string line;
  size_t line_no = 0;
  size_t content_lines = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++content_lines;
    try {
      json j = json::parse(line);
      try {
        result.records.push_back(record_from_json(j));
      } catch (const Error& e) {
        const std::string what = e.what();
        if (what.rfind("unknown record type", 0) == 0) {
          result.warnings.push_back("line " + std::to_string(line_no) + ": " + what +
                                    " (skipped)");
        } else {
          ++result.malformed;
          result.warnings.push_back("line " + std::to_string(line_no) + ": " + what);
        }
      }
    } catch (const json::exception& e) {
      ++result.malformed;
      result.warnings.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (content_lines > 0 &&
      static_cast<double>(result.malformed) > 0.10 * static_cast<double>(content_lines)) {
    throw Error("more than 10% malformed lines (" + std::to_string(result.malformed) + " of " +
                std::to_string(content_lines) + "); wrong file?");
  }
  return result;
}

ParseResult parse_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open log file: " + path.string());
  return parse_records(in);
}

void write_log(const std::filesystem::path& path, const std::vector<LogRecord>& records) {
  LogWriter w(path);
  for (const auto& r : records) w.write(r);
  w.flush();
}

LogWriter::LogWriter(const std::filesystem::path& path) : out_(path) {
  if (!out_) throw Error("cannot open output file: " + path.string());
}

void LogWriter::write(const LogRecord& r) { out_ << to_line(r) << '\n'; }

void LogWriter::flush() { out_.flush(); }

}  // namespace msf
