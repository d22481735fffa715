#include "msf/state.hpp"

#include <set>

#include "msf/error.hpp"

namespace msf {

void ProcessNoiseParams::validate() const {
  auto positive = [](const Eigen::Vector3d& v) { return (v.array() > 0.0).all(); };
  if (!positive(sigma_v2) || !positive(sigma_theta2) || !positive(sigma_a2) ||
      !positive(sigma_w2)) {
    throw Error("process noise variances must all be > 0");
  }
}

StateLayout::StateLayout(std::vector<std::string> drift_sensor_ids)
    : drift_ids_(std::move(drift_sensor_ids)) {
  std::set<std::string> seen;
  for (const auto& id : drift_ids_) {
    if (id.empty()) throw Error("drift sensor id must not be empty");
    if (!seen.insert(id).second) throw Error("duplicate drift sensor id: " + id);
  }
}

std::optional<int> StateLayout::slot_of(const std::string& sensor_id) const {
  for (size_t i = 0; i < drift_ids_.size(); ++i) {
    if (drift_ids_[i] == sensor_id) return static_cast<int>(i);
  }
  return std::nullopt;
}

}  // namespace msf
