#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "odcal/measurements.hpp"
#include "odcal/network.hpp"
#include "odcal/simulator.hpp"

namespace odcal {

struct MetricsTriple {
  double nrmse_demand = 0.0;
  double nrmse_time = 0.0;
  double nrmse_count = 0.0;
};

/// Root mean squared error normalized by the mean of the truth vector.
/// Throws std::invalid_argument on empty input, size mismatch, or a
/// non-positive truth mean.
double nrmse(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);

/// Simulates the candidate demand over `rollouts` rollouts and scores it:
/// travel times against the measured paths, penetration-scaled counts
/// against the measured segments, and the demand vector against the ground
/// truth.
MetricsTriple evaluate_solution(const DemandVector& d, const DemandVector& gt_demand,
                                const FieldMeasurements& meas, const Network& net,
                                const SimulatorConfig& cfg, int rollouts, std::uint64_t seed);

/// Metrics computed from an existing expectation estimate (no fresh
/// simulation); demand nRMSE is NaN when no ground truth is supplied.
MetricsTriple metrics_from_estimate(const ExpectationEstimate& est, const DemandVector& d,
                                    const DemandVector* gt_demand, const NetworkIndex& idx,
                                    const FieldMeasurements& meas);

struct ComparisonRow {
  std::string scenario;
  std::string method;
  MetricsTriple metrics;
};

/// Comparison report: one row per method plus a signed percent-change row of
/// the second method relative to the first.
std::string comparison_report_csv(const ComparisonRow& a, const ComparisonRow& b);

}  // namespace odcal
