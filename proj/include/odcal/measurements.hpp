#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "odcal/network.hpp"

namespace odcal {

/// Field observations on the measured subsets of the network: travel times
/// per measured path (minutes) and sampled vehicle counts per measured
/// segment. Counts are a partial observation at the nominal penetration rate.
struct FieldMeasurements {
  std::map<std::string, double> path_travel_time_min;
  std::map<std::string, double> segment_counts;
  double penetration = 1.0;
  std::vector<std::string> warnings;  // zero-sample fallbacks applied
};

/// Measured path travel times aligned to idx.measured_paths order.
Eigen::VectorXd measured_time_vector(const NetworkIndex& idx, const FieldMeasurements& m);

/// Measured segment counts aligned to idx.measured_segments order.
Eigen::VectorXd measured_count_vector(const NetworkIndex& idx, const FieldMeasurements& m);

/// Nonempty when the measurements do not cover the network's measured sets,
/// contain non-positive values, or have a penetration outside (0, 1].
std::vector<Violation> validate_measurements(const Network& net, const FieldMeasurements& m);

}  // namespace odcal
