#include "odcal/measurements.hpp"

#include <stdexcept>

namespace odcal {

Eigen::VectorXd measured_time_vector(const NetworkIndex& idx, const FieldMeasurements& m) {
  Eigen::VectorXd y(idx.measured_paths.size());
  for (std::size_t j = 0; j < idx.measured_paths.size(); ++j) {
    const std::string& pid = idx.path_ids[idx.measured_paths[j]];
    auto it = m.path_travel_time_min.find(pid);
    if (it == m.path_travel_time_min.end()) {
      throw std::invalid_argument("measurements missing travel time for path " + pid);
    }
    y(static_cast<Eigen::Index>(j)) = it->second;
  }
  return y;
}

Eigen::VectorXd measured_count_vector(const NetworkIndex& idx, const FieldMeasurements& m) {
  Eigen::VectorXd x(idx.measured_segments.size());
  for (std::size_t j = 0; j < idx.measured_segments.size(); ++j) {
    const std::string& sid = idx.segments[idx.measured_segments[j]].id;
    auto it = m.segment_counts.find(sid);
    if (it == m.segment_counts.end()) {
      throw std::invalid_argument("measurements missing count for segment " + sid);
    }
    x(static_cast<Eigen::Index>(j)) = it->second;
  }
  return x;
}

std::vector<Violation> validate_measurements(const Network& net, const FieldMeasurements& m) {
  std::vector<Violation> out;
  if (!(m.penetration > 0.0) || m.penetration > 1.0) {
    out.push_back({"measurements", "penetration must be in (0, 1]"});
  }
  for (const std::string& pid : net.measured_paths) {
    auto it = m.path_travel_time_min.find(pid);
    if (it == m.path_travel_time_min.end()) {
      out.push_back({pid, "missing travel time for measured path"});
    } else if (!(it->second > 0.0)) {
      out.push_back({pid, "measured travel time must be positive"});
    }
  }
  for (const std::string& sid : net.measured_segments) {
    auto it = m.segment_counts.find(sid);
    if (it == m.segment_counts.end()) {
      out.push_back({sid, "missing count for measured segment"});
    } else if (!(it->second > 0.0)) {
      out.push_back({sid, "measured count must be positive"});
    }
  }
  return out;
}

}  // namespace odcal
