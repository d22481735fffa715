#include "msf/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "msf/error.hpp"

namespace msf {

std::vector<std::pair<size_t, size_t>> match_nearest(std::span<const double> query,
                                                     std::span<const double> reference,
                                                     double window) {
  std::vector<std::pair<size_t, size_t>> out;
  if (reference.empty()) return out;
  for (size_t i = 0; i < query.size(); ++i) {
    auto it = std::lower_bound(reference.begin(), reference.end(), query[i]);
    size_t best = (it == reference.end()) ? reference.size() - 1
                                          : static_cast<size_t>(it - reference.begin());
    if (best > 0 &&
        std::abs(reference[best - 1] - query[i]) <= std::abs(reference[best] - query[i])) {
      --best;
    }
    if (std::abs(reference[best] - query[i]) <= window) out.emplace_back(i, best);
  }
  return out;
}

double rmse(std::span<const double> errors) {
  if (errors.size() < 2) throw Error("rmse: need at least 2 matched samples");
  double acc = 0.0;
  for (double e : errors) acc += e * e;
  return std::sqrt(acc / static_cast<double>(errors.size()));
}

double yaw_error_deg(const so3::Quat& estimate, const so3::Quat& truth) {
  const Eigen::Vector3d rel =
      so3::log_vee(so3::quat_to_rotmat(truth).transpose() * so3::quat_to_rotmat(estimate));
  return rel.z() * 180.0 / M_PI;  // |log_vee| <= pi keeps this in (-180, 180]
}

std::string RmseReport::to_text() const {
  std::ostringstream os;
  os << "source            x[m]      y[m]      z[m]      yaw[deg]  samples\n";
  for (const auto& e : entries) {
    char line[160];
    if (e.yaw_deg) {
      std::snprintf(line, sizeof(line), "%-16s  %-8.4f  %-8.4f  %-8.4f  %-8.4f  %zu\n",
                    e.source.c_str(), e.x, e.y, e.z, *e.yaw_deg, e.samples);
    } else {
      std::snprintf(line, sizeof(line), "%-16s  %-8.4f  %-8.4f  %-8.4f  %-8s  %zu\n",
                    e.source.c_str(), e.x, e.y, e.z, "N/A", e.samples);
    }
    os << line;
    if (!e.note.empty()) os << "  note: " << e.note << "\n";
  }
  return os.str();
}

std::string RmseReport::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json ej;
    ej["source"] = e.source;
    ej["x"] = e.x;
    ej["y"] = e.y;
    ej["z"] = e.z;
    if (e.yaw_deg) {
      ej["yaw_deg"] = *e.yaw_deg;
    } else {
      ej["yaw_deg"] = nullptr;
    }
    if (e.roll_deg) ej["roll_deg"] = *e.roll_deg;
    if (e.pitch_deg) ej["pitch_deg"] = *e.pitch_deg;
    ej["samples"] = e.samples;
    if (!e.note.empty()) ej["note"] = e.note;
    j.push_back(ej);
  }
  return j.dump(2);
}

ErrorHistogram histogram(std::span<const double> errors, int bins) {
  if (errors.size() < 100) {
    throw Error("histogram: need at least 100 samples, got " + std::to_string(errors.size()));
  }
  if (bins < 1) throw Error("histogram: need at least one bin");
  double lo = *std::min_element(errors.begin(), errors.end());
  double hi = *std::max_element(errors.begin(), errors.end());
  if (hi <= lo) hi = lo + 1e-12;  // all-equal inputs: one occupied bin

  ErrorHistogram h;
  const double width = (hi - lo) / bins;
  h.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) h.edges[i] = lo + width * i;
  std::vector<size_t> counts(bins, 0);
  for (double e : errors) {
    int b = static_cast<int>((e - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    ++counts[b];
  }
  h.densities.resize(bins);
  for (int i = 0; i < bins; ++i) {
    h.densities[i] = static_cast<double>(counts[i]) /
                     (static_cast<double>(errors.size()) * width);
  }
  return h;
}

std::vector<Measurement> align_for_reporting(
    const std::vector<Measurement>& measurements,
    const std::vector<std::pair<double, DriftPose>>& drift_trace) {
  if (drift_trace.empty()) throw Error("align_for_reporting: empty drift trace");
  std::vector<Measurement> out;
  out.reserve(measurements.size());
  for (const auto& m : measurements) {
    // latest trace entry at or before the measurement
    auto it = std::upper_bound(
        drift_trace.begin(), drift_trace.end(), m.t,
        [](double t, const std::pair<double, DriftPose>& e) { return t < e.first; });
    const DriftPose& pose = (it == drift_trace.begin()) ? it->second : std::prev(it)->second;
    Measurement aligned = m;
    if (m.kind == MeasurementKind::position) {
      aligned.vec = remove_drift_position(m.vec, pose);
    } else if (m.kind == MeasurementKind::orientation) {
      aligned.quat = remove_drift_orientation(m.quat, pose.q);
    }
    out.push_back(aligned);
  }
  return out;
}

namespace {

SourceRmse rmse_from_pose_pairs(const std::vector<Eigen::Vector3d>& p_est,
                                const std::vector<Eigen::Vector3d>& p_truth,
                                const std::vector<so3::Quat>& q_est,
                                const std::vector<so3::Quat>& q_truth,
                                const std::string& source_name) {
  SourceRmse r;
  r.source = source_name;
  const size_t n = p_est.size();
  std::vector<double> ex(n), ey(n), ez(n);
  for (size_t i = 0; i < n; ++i) {
    ex[i] = p_est[i].x() - p_truth[i].x();
    ey[i] = p_est[i].y() - p_truth[i].y();
    ez[i] = p_est[i].z() - p_truth[i].z();
  }
  r.x = rmse(ex);
  r.y = rmse(ey);
  r.z = rmse(ez);
  r.samples = n;
  if (!q_est.empty()) {
    const size_t m = q_est.size();
    std::vector<double> eroll(m), epitch(m), eyaw(m);
    for (size_t i = 0; i < m; ++i) {
      const Eigen::Vector3d rel =
          so3::log_vee(so3::quat_to_rotmat(q_truth[i]).transpose() *
                       so3::quat_to_rotmat(q_est[i])) *
          (180.0 / M_PI);
      eroll[i] = rel.x();
      epitch[i] = rel.y();
      eyaw[i] = rel.z();
    }
    r.yaw_deg = rmse(eyaw);
    r.roll_deg = rmse(eroll);
    r.pitch_deg = rmse(epitch);
  }
  return r;
}

}  // namespace

SourceRmse evaluate_estimates(const std::vector<EstimateRecord>& estimates,
                              const std::vector<sim::GroundTruthSample>& truth,
                              const std::string& source_name, double window) {
  std::vector<double> ts(estimates.size()), tt(truth.size());
  for (size_t i = 0; i < estimates.size(); ++i) ts[i] = estimates[i].t;
  for (size_t i = 0; i < truth.size(); ++i) tt[i] = truth[i].t;
  auto pairs = match_nearest(ts, tt, window);
  if (pairs.size() < 2) throw Error("evaluate_estimates: no timestamp overlap with truth");

  std::vector<Eigen::Vector3d> pe, pt;
  std::vector<so3::Quat> qe, qt;
  for (auto [i, j] : pairs) {
    pe.push_back(estimates[i].p);
    pt.push_back(truth[j].p);
    qe.push_back(estimates[i].q);
    qt.push_back(truth[j].q);
  }
  return rmse_from_pose_pairs(pe, pt, qe, qt, source_name);
}

SourceRmse evaluate_measurements(const std::vector<Measurement>& measurements,
                                 const std::vector<sim::GroundTruthSample>& truth,
                                 const std::string& source_name, double window) {
  std::vector<double> tt(truth.size());
  for (size_t i = 0; i < truth.size(); ++i) tt[i] = truth[i].t;

  std::vector<double> tp, tq;
  std::vector<const Measurement*> pos, ori;
  for (const auto& m : measurements) {
    if (m.kind == MeasurementKind::position) {
      pos.push_back(&m);
      tp.push_back(m.t);
    } else if (m.kind == MeasurementKind::orientation) {
      ori.push_back(&m);
      tq.push_back(m.t);
    }
  }
  auto pos_pairs = match_nearest(tp, tt, window);
  if (pos_pairs.size() < 2) throw Error("evaluate_measurements: no position overlap with truth");

  std::vector<Eigen::Vector3d> pe, pt;
  for (auto [i, j] : pos_pairs) {
    pe.push_back(pos[i]->vec);
    pt.push_back(truth[j].p);
  }
  std::vector<so3::Quat> qe, qt;
  for (auto [i, j] : match_nearest(tq, tt, window)) {
    qe.push_back(ori[i]->quat);
    qt.push_back(truth[j].q);
  }
  return rmse_from_pose_pairs(pe, pt, qe, qt, source_name);
}

}  // namespace msf
