#include "odcal/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "odcal/rng.hpp"

namespace odcal {

namespace {

constexpr std::uint64_t kInitSalt = 0xd011;

struct SimulatedTerms {
  double f1 = 0.0;
  double f2 = 0.0;
};

SimulatedTerms simulated_terms(const ExpectationEstimate& est, const MetamodelContext& ctx) {
  const NetworkIndex& idx = ctx.index();
  const Eigen::VectorXd& y_gt = ctx.measured_times();
  const Eigen::VectorXd& x_gt = ctx.measured_counts();
  SimulatedTerms t;
  for (std::size_t j = 0; j < idx.measured_paths.size(); ++j) {
    const double r = y_gt(static_cast<Eigen::Index>(j)) - est.mean_path_times(idx.measured_paths[j]);
    t.f1 += r * r;
  }
  t.f1 /= static_cast<double>(idx.measured_paths.size());
  Eigen::VectorXd counts(x_gt.size());
  for (Eigen::Index j = 0; j < x_gt.size(); ++j) {
    counts(j) = est.mean_counts(idx.measured_segments[static_cast<std::size_t>(j)]);
  }
  t.f2 = ratio_variance(counts, x_gt);
  return t;
}

/// Solves one weighted ridge system (X' W X + mu I) b = X' W y + mu prior.
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& weights, double mu,
                            const Eigen::VectorXd& prior) {
  const Eigen::Index p = x.cols();
  Eigen::MatrixXd lhs = mu * Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd rhs = mu * prior;
  if (x.rows() > 0) {
    const Eigen::MatrixXd xw = weights.asDiagonal() * x;
    lhs += x.transpose() * xw;
    rhs += xw.transpose() * y;
  }
  return lhs.ldlt().solve(rhs);
}

}  // namespace

double SolverConfig::effective_rho(int n_ods) const {
  if (fit_decay_rho > 0.0) return fit_decay_rho;
  return 0.25 * d_max * std::sqrt(static_cast<double>(n_ods));
}

CorrectionParams fit_correction_params(const std::vector<EvaluationRecord>& history,
                                       const DemandVector& d_current, double mu, double rho,
                                       const MetamodelContext& ctx) {
  if (!(rho > 0.0)) throw std::invalid_argument("fit decay length rho must be positive");
  const double mu_eff = std::max(mu, 1e-12);  // keeps the system positive definite
  const int nz = ctx.n_ods();
  const Eigen::Index n = static_cast<Eigen::Index>(history.size());

  Eigen::MatrixXd x1(n, 2 + nz), x2(n, 2 + nz);
  Eigen::VectorXd y1(n), y2(n), weights(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const EvaluationRecord& rec = history[static_cast<std::size_t>(j)];
    double f1 = 0.0, f2 = 0.0;
    ctx.objective_terms(rec.d, &f1, &f2);
    x1(j, 0) = f1;
    x2(j, 0) = f2;
    x1(j, 1) = 1.0;
    x2(j, 1) = 1.0;
    x1.row(j).tail(nz) = rec.d.transpose();
    x2.row(j).tail(nz) = rec.d.transpose();
    y1(j) = rec.sim_f1;
    y2(j) = rec.sim_f2;
    weights(j) = 1.0 / (1.0 + (rec.d - d_current).norm() / rho);
  }

  Eigen::VectorXd prior = Eigen::VectorXd::Zero(2 + nz);
  prior(0) = 1.0;
  CorrectionParams out;
  out.beta = ridge_solve(x1, y1, weights, mu_eff, prior);
  out.alpha = ridge_solve(x2, y2, weights, mu_eff, prior);
  return out;
}

PgdResult projected_gradient_minimize(const ObjectiveFn& f, DemandVector x0,
                                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                      const SubproblemOptions& opts) {
  auto project = [&lo, &hi](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return v.cwiseMax(lo).cwiseMin(hi);
  };
  PgdResult res;
  res.x = project(std::move(x0));
  Eigen::VectorXd grad(res.x.size());
  res.value = f(res.x, grad);
  double step = opts.initial_step;

  for (res.iterations = 0; res.iterations < opts.max_iters; ++res.iterations) {
    const double stationarity = (project(res.x - grad) - res.x).lpNorm<Eigen::Infinity>();
    if (stationarity <= opts.tolerance) {
      res.converged = true;
      break;
    }
    step *= 2.0;  // try growing again after previous backtracks
    bool accepted = false;
    Eigen::VectorXd cand_grad(res.x.size());
    for (int halvings = 0; halvings < 60; ++halvings) {
      const Eigen::VectorXd cand = project(res.x - step * grad);
      const Eigen::VectorXd dir = cand - res.x;
      const double slope = grad.dot(dir);  // <= 0 along the projection arc
      if (dir.lpNorm<Eigen::Infinity>() > 0.0) {
        const double cand_value = f(cand, cand_grad);
        if (cand_value <= res.value + opts.armijo_c * slope) {
          res.x = cand;
          res.value = cand_value;
          grad = cand_grad;
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No improving step found at any scale: numerically stationary.
      res.converged = true;
      break;
    }
  }
  return res;
}

DemandVector solve_subproblem(const CorrectionParams& correction, const DemandVector& d_init,
                              const SolverConfig& cfg, const MetamodelContext& ctx) {
  const int nz = ctx.n_ods();
  if (d_init.size() != nz) throw std::invalid_argument("d_init has wrong dimension");
  const Eigen::VectorXd lo = Eigen::VectorXd::Zero(nz);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(nz, cfg.d_max);
  const ObjectiveFn objective = [&](const DemandVector& d, Eigen::VectorXd& grad) {
    return ctx.value_and_gradient(d, correction, cfg.weights, &grad);
  };
  return projected_gradient_minimize(objective, d_init, lo, hi, cfg.subproblem).x;
}

CalibrationTrace run_calibration(const Network& net, const FieldMeasurements& meas,
                                 const std::optional<DemandVector>& gt_demand,
                                 const SolverConfig& solver_cfg, const SimulatorConfig& sim_cfg) {
  if (solver_cfg.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (solver_cfg.rollouts < 1) throw std::invalid_argument("rollouts must be >= 1");
  if (!(solver_cfg.d_max > 0.0)) throw std::invalid_argument("d_max must be positive");

  const MetamodelContext ctx(net, meas, sim_cfg.physics);
  const NetworkIndex& idx = ctx.index();
  const int nz = idx.n_ods();
  if (gt_demand && gt_demand->size() != nz) {
    throw std::invalid_argument("ground-truth demand has wrong dimension");
  }

  SimulatorConfig eval_cfg = sim_cfg;
  eval_cfg.retain_trips = false;

  // Common random numbers: every candidate is evaluated with the same rollout
  // seeds, so simulated objectives are directly comparable across iterations.
  auto evaluate = [&](const DemandVector& d) {
    return estimate_expectations(idx, d, eval_cfg, solver_cfg.rollouts, solver_cfg.seed);
  };

  DemandVector d0;
  if (solver_cfg.initial_demand) {
    d0 = *solver_cfg.initial_demand;
    if (d0.size() != nz) throw std::invalid_argument("initial demand has wrong dimension");
    d0 = d0.cwiseMax(0.0).cwiseMin(solver_cfg.d_max);
  } else {
    Rng rng(mix_seed(solver_cfg.seed, kInitSalt));
    d0.resize(nz);
    for (int z = 0; z < nz; ++z) d0(z) = rng.uniform(0.0, solver_cfg.d_max / 2.0);
  }

  CalibrationTrace trace;
  trace.initial_demand = d0;

  const ExpectationEstimate est0 = evaluate(d0);
  const SimulatedTerms t0 = simulated_terms(est0, ctx);

  const double w1 = solver_cfg.weights.w1;
  double w2 = solver_cfg.weights.w2;
  if (solver_cfg.auto_balance_w2 && w2 > 0.0 && t0.f2 > 1e-300) {
    w2 = w1 * t0.f1 / t0.f2;  // both objective terms start at similar magnitude
  }
  trace.w1 = w1;
  trace.w2 = w2;
  SolverConfig cfg = solver_cfg;
  cfg.weights = {w1, w2};

  trace.history.push_back({d0, t0.f1, t0.f2, 0, solver_cfg.seed});
  const DemandVector* gt = gt_demand ? &*gt_demand : nullptr;

  DemandVector incumbent = d0;
  double incumbent_obj = w1 * t0.f1 + w2 * t0.f2;
  MetricsTriple incumbent_metrics = metrics_from_estimate(est0, d0, gt, idx, meas);

  const double rho = cfg.effective_rho(nz);
  for (int k = 1; k <= cfg.max_iterations; ++k) {
    const CorrectionParams correction =
        fit_correction_params(trace.history, incumbent, cfg.fit_prior_mu, rho, ctx);
    const DemandVector candidate = solve_subproblem(correction, incumbent, cfg, ctx);

    TraceRow row;
    row.iteration = k;
    row.candidate = candidate;
    try {
      const ExpectationEstimate est = evaluate(candidate);
      const SimulatedTerms t = simulated_terms(est, ctx);
      row.f1_sim = t.f1;
      row.f2_sim = t.f2;
      row.objective = w1 * t.f1 + w2 * t.f2;
      trace.history.push_back({candidate, t.f1, t.f2, k, solver_cfg.seed});
      if (row.objective < incumbent_obj) {
        incumbent = candidate;
        incumbent_obj = row.objective;
        incumbent_metrics = metrics_from_estimate(est, candidate, gt, idx, meas);
        row.is_incumbent = true;
      }
    } catch (const std::exception&) {
      // Simulator failure: keep the incumbent and move on.
      row.failed = true;
      row.objective = std::numeric_limits<double>::infinity();
      row.f1_sim = row.f2_sim = std::numeric_limits<double>::quiet_NaN();
    }
    row.metrics = incumbent_metrics;
    row.incumbent_objective = incumbent_obj;
    trace.rows.push_back(std::move(row));
  }

  trace.final_demand = incumbent;
  trace.final_objective = incumbent_obj;
  trace.final_metrics = incumbent_metrics;
  return trace;
}

std::string trace_to_csv(const CalibrationTrace& trace) {
  std::string csv = "iteration,objective,f1_sim,f2_sim,nrmse_demand,nrmse_time,nrmse_count,incumbent\n";
  char buf[320];
  for (const TraceRow& row : trace.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d\n", row.iteration,
                  row.objective, row.f1_sim, row.f2_sim, row.metrics.nrmse_demand,
                  row.metrics.nrmse_time, row.metrics.nrmse_count, row.is_incumbent ? 1 : 0);
    csv += buf;
  }
  return csv;
}

}  // namespace odcal
