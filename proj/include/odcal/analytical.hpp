#pragma once

#include <Eigen/Dense>

#include "odcal/measurements.hpp"
#include "odcal/network.hpp"

namespace odcal {

/// Physical parameters of the analytical traffic model, shared with the
/// simulator. Units: velocities km/h, densities veh/km/lane; kappa converts
/// per-interval segment demand into a fraction of jam density.
struct AnalyticalParams {
  double v_min_kmh = 10.0;
  double k_jam = 160.0;
  double k_crit = 40.0;
  double kappa = 8e-4;
  double gamma1 = 2.0;
  double gamma2 = 2.0;

  /// Throws std::invalid_argument when an invariant is broken
  /// (0 < k_crit < k_jam, kappa > 0, exponents > 0, v_min > 0).
  void validate() const;
};

/// Scale + affine correction coefficients for one iteration of the metamodel.
/// Layout per term: [0] scale applied to the physical term, [1] constant
/// offset, [2 + z] coefficient of demand coordinate z.
struct CorrectionParams {
  Eigen::VectorXd beta;   // travel-time term
  Eigen::VectorXd alpha;  // count-ratio regularization term

  static CorrectionParams identity(int n_ods);
};

struct ObjectiveWeights {
  double w1 = 1.0;
  double w2 = 1.0;
};

/// Per-segment analytical quantities induced by a demand vector, plus the
/// analytical travel times of the measured paths (minutes).
struct AnalyticalState {
  Eigen::VectorXd link_demand;   // veh/interval, all segments
  Eigen::VectorXd density;       // veh/km/lane
  Eigen::VectorXd velocity;      // km/h
  Eigen::VectorXd path_time_min; // measured paths, idx.measured_paths order
};

Eigen::VectorXd link_demand(const AssignmentMatrix& a, const DemandVector& d);

double density(double link_demand, int lanes, const AnalyticalParams& p);

/// Fundamental-diagram speed. Exactly v_max up to the critical density,
/// exactly v_min once the excess density reaches the jam density, and smooth
/// monotone nonincreasing in between.
double velocity(double density, double v_max_kmh, const AnalyticalParams& p);

/// dv/dk. Zero on the free-flow branch and at the critical-density kink
/// (one-sided free-flow choice), zero again past the jam plateau.
double velocity_density_derivative(double density, double v_max_kmh, const AnalyticalParams& p);

/// Travel time in minutes over the given segments at the given velocities.
double path_travel_time_min(const std::vector<int>& segments,
                            const std::vector<Segment>& segment_data,
                            const Eigen::VectorXd& velocity);

/// Population variance of the ratios lambda_i / x_i. Exactly zero when all
/// ratios are equal (the regularizer constrains shape, not scale).
double ratio_variance(const Eigen::VectorXd& lambda, const Eigen::VectorXd& x);

/// Precomputed context binding a network, its measurements, and physical
/// parameters. All evaluation entry points are const and safe to share
/// across threads.
class MetamodelContext {
 public:
  MetamodelContext(const Network& net, const FieldMeasurements& meas,
                   const AnalyticalParams& params);

  const NetworkIndex& index() const { return idx_; }
  const AssignmentMatrix& assignment() const { return assignment_; }
  const AnalyticalParams& params() const { return params_; }
  const Eigen::VectorXd& measured_times() const { return y_gt_; }
  const Eigen::VectorXd& measured_counts() const { return x_gt_; }
  int n_ods() const { return idx_.n_ods(); }

  AnalyticalState state(const DemandVector& d) const;

  /// Analytical objective terms f1 (mean squared travel-time deviation over
  /// measured paths) and f2 (variance of count ratios over measured segments).
  void objective_terms(const DemandVector& d, double* f1, double* f2) const;

  /// Corrected metamodel value and, when grad is non-null, its exact gradient
  /// assembled by the chain rule through link demand, density, velocity and
  /// path times.
  double value_and_gradient(const DemandVector& d, const CorrectionParams& c,
                            const ObjectiveWeights& w, Eigen::VectorXd* grad) const;

 private:
  NetworkIndex idx_;
  AnalyticalParams params_;
  AssignmentMatrix assignment_;
  Eigen::VectorXd y_gt_;  // measured path travel times
  Eigen::VectorXd x_gt_;  // measured segment counts
  std::vector<std::vector<int>> measured_paths_by_segment_;  // positions into measured path list
};

// Spec-shaped convenience wrappers; tests and small callers use these, the
// solver holds a MetamodelContext.
double f1_analytical(const DemandVector& d, const Network& net,
                     const FieldMeasurements& meas, const AnalyticalParams& p);
double f2_analytical(const DemandVector& d, const Network& net,
                     const FieldMeasurements& meas, const AnalyticalParams& p);

/// Simulation-based calibration objective: travel-time mean squared deviation
/// plus count-ratio variance, weighted.
double simulated_objective(const Eigen::VectorXd& mean_counts,
                           const Eigen::VectorXd& mean_path_times,
                           const Network& net, const FieldMeasurements& meas,
                           const ObjectiveWeights& w);

std::pair<double, Eigen::VectorXd> metamodel_value_and_gradient(
    const DemandVector& d, const CorrectionParams& c, const ObjectiveWeights& w,
    const Network& net, const FieldMeasurements& meas, const AnalyticalParams& p);

}  // namespace odcal
