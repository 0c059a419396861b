#include "odcal/eval.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace odcal {

double nrmse(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
  if (truth.size() == 0 || estimate.size() != truth.size()) {
    throw std::invalid_argument("nrmse: vectors must be nonempty and of equal length");
  }
  const double mean_truth = truth.mean();
  if (!(mean_truth > 0.0)) {
    throw std::invalid_argument("nrmse: truth vector must have positive mean");
  }
  const double mse = (estimate - truth).squaredNorm() / static_cast<double>(truth.size());
  return std::sqrt(mse) / mean_truth;
}

MetricsTriple metrics_from_estimate(const ExpectationEstimate& est, const DemandVector& d,
                                    const DemandVector* gt_demand, const NetworkIndex& idx,
                                    const FieldMeasurements& meas) {
  MetricsTriple t;
  const Eigen::VectorXd y_gt = measured_time_vector(idx, meas);
  const Eigen::VectorXd x_gt = measured_count_vector(idx, meas);
  Eigen::VectorXd y_sim(y_gt.size());
  for (std::size_t j = 0; j < idx.measured_paths.size(); ++j) {
    y_sim(static_cast<Eigen::Index>(j)) = est.mean_path_times(idx.measured_paths[j]);
  }
  Eigen::VectorXd x_sim(x_gt.size());
  for (std::size_t j = 0; j < idx.measured_segments.size(); ++j) {
    x_sim(static_cast<Eigen::Index>(j)) = est.mean_counts(idx.measured_segments[j]);
  }
  t.nrmse_time = nrmse(y_sim, y_gt);
  // Simulated counts are full flows; the measured counts are a sample, so
  // scale by the nominal penetration before comparing.
  t.nrmse_count = nrmse(meas.penetration * x_sim, x_gt);
  t.nrmse_demand = gt_demand ? nrmse(d, *gt_demand) : std::nan("");
  return t;
}

MetricsTriple evaluate_solution(const DemandVector& d, const DemandVector& gt_demand,
                                const FieldMeasurements& meas, const Network& net,
                                const SimulatorConfig& cfg, int rollouts, std::uint64_t seed) {
  const NetworkIndex idx = NetworkIndex::build(net);
  const ExpectationEstimate est = estimate_expectations(idx, d, cfg, rollouts, seed);
  return metrics_from_estimate(est, d, &gt_demand, idx, meas);
}

namespace {

std::string format_row(const std::string& scenario, const std::string& method,
                       double a, double b, double c) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%s,%.12g,%.12g,%.12g\n", scenario.c_str(), method.c_str(),
                a, b, c);
  return buf;
}

double percent_change(double from, double to) {
  if (from == 0.0) return to == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return 100.0 * (to - from) / from;
}

}  // namespace

std::string comparison_report_csv(const ComparisonRow& a, const ComparisonRow& b) {
  std::string csv = "scenario,method,nrmse_demand,nrmse_time,nrmse_count\n";
  csv += format_row(a.scenario, a.method, a.metrics.nrmse_demand, a.metrics.nrmse_time,
                    a.metrics.nrmse_count);
  csv += format_row(b.scenario, b.method, b.metrics.nrmse_demand, b.metrics.nrmse_time,
                    b.metrics.nrmse_count);
  csv += format_row(a.scenario, "change_pct",
                    percent_change(a.metrics.nrmse_demand, b.metrics.nrmse_demand),
                    percent_change(a.metrics.nrmse_time, b.metrics.nrmse_time),
                    percent_change(a.metrics.nrmse_count, b.metrics.nrmse_count));
  return csv;
}

}  // namespace odcal
