#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "odcal/analytical.hpp"
#include "odcal/eval.hpp"
#include "odcal/measurements.hpp"
#include "odcal/network.hpp"
#include "odcal/simulator.hpp"

namespace odcal {

/// One simulation evaluation of a candidate demand vector.
struct EvaluationRecord {
  DemandVector d;
  double sim_f1 = 0.0;  // travel-time mean squared deviation
  double sim_f2 = 0.0;  // count-ratio variance
  int iteration = 0;
  std::uint64_t seed = 0;
};

struct SubproblemOptions {
  // The default iteration budget is deliberately small: each calibration
  // iteration descends partway from the incumbent, which keeps candidates in
  // the region where the fitted correction is trustworthy. Oracle-style exact
  // solves should raise it.
  int max_iters = 60;
  double tolerance = 1e-9;     // sup-norm of the unit-step projected gradient step
  double initial_step = 1.0;
  double armijo_c = 0.25;      // strict enough to reject near-reflection steps
};

struct SolverConfig {
  ObjectiveWeights weights;
  bool auto_balance_w2 = true;  // rescale w2 at the initial point so both terms match
  double d_max = 1000.0;        // per-OD upper bound, veh/interval
  int rollouts = 5;
  int max_iterations = 30;
  double fit_prior_mu = 1e-3;   // ridge strength toward the identity correction
  double fit_decay_rho = 0.0;   // distance-decay length; <=0 picks a d_max-based default
  SubproblemOptions subproblem;
  std::uint64_t seed = 1;
  std::optional<DemandVector> initial_demand;  // default: uniform in [0, d_max/2]

  double effective_rho(int n_ods) const;
};

struct TraceRow {
  int iteration = 0;
  DemandVector candidate;
  double objective = 0.0;  // candidate's simulated objective
  double f1_sim = 0.0;
  double f2_sim = 0.0;
  // Metrics of the incumbent after this iteration's update (the solution the
  // run would return if stopped here). Demand nRMSE is NaN without ground truth.
  MetricsTriple metrics;
  bool is_incumbent = false;  // candidate accepted as new incumbent
  double incumbent_objective = 0.0;
  bool failed = false;
};

struct CalibrationTrace {
  std::vector<TraceRow> rows;
  std::vector<EvaluationRecord> history;  // includes the initial point (iteration 0)
  DemandVector initial_demand;
  DemandVector final_demand;
  double final_objective = 0.0;
  MetricsTriple final_metrics;
  double w1 = 1.0, w2 = 1.0;  // weights actually used
};

/// Weighted ridge least-squares fit of the correction parameters to the
/// accumulated evaluations. Records near the current incumbent weigh more
/// (1 / (1 + distance/rho)); the ridge prior pulls toward the identity
/// correction (scale 1, affine part 0), which is also the empty-history
/// result. mu > 0 makes the fit unique for any history.
CorrectionParams fit_correction_params(const std::vector<EvaluationRecord>& history,
                                       const DemandVector& d_current, double mu, double rho,
                                       const MetamodelContext& ctx);

/// Objective callable: fills the gradient and returns the value.
using ObjectiveFn = std::function<double(const DemandVector&, Eigen::VectorXd&)>;

struct PgdResult {
  DemandVector x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Projected gradient descent with backtracking line search over the box
/// [lo, hi]. Monotone: the returned value never exceeds the starting value.
PgdResult projected_gradient_minimize(const ObjectiveFn& f, DemandVector x0,
                                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                      const SubproblemOptions& opts);

/// Minimizes the corrected metamodel from d_init over [0, d_max]. Always
/// returns a feasible point no worse than d_init under the metamodel.
DemandVector solve_subproblem(const CorrectionParams& correction, const DemandVector& d_init,
                              const SolverConfig& cfg, const MetamodelContext& ctx);

/// The full iterative calibration: fit corrections on history, solve the
/// metamodel subproblem from the incumbent, evaluate the candidate in
/// simulation (common random numbers across iterations), keep the best.
/// Deterministic for fixed seeds.
CalibrationTrace run_calibration(const Network& net, const FieldMeasurements& meas,
                                 const std::optional<DemandVector>& gt_demand,
                                 const SolverConfig& solver_cfg, const SimulatorConfig& sim_cfg);

/// Fixed trace CSV schema:
/// iteration,objective,f1_sim,f2_sim,nrmse_demand,nrmse_time,nrmse_count,incumbent
std::string trace_to_csv(const CalibrationTrace& trace);

}  // namespace odcal
