#include "odcal/analytical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace odcal {

void AnalyticalParams::validate() const {
  if (!(v_min_kmh > 0.0)) throw std::invalid_argument("v_min_kmh must be positive");
  if (!(k_crit > 0.0)) throw std::invalid_argument("k_crit must be positive");
  if (!(k_crit < k_jam)) throw std::invalid_argument("k_crit must be below k_jam");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) {
    throw std::invalid_argument("fundamental diagram exponents must be positive");
  }
}

CorrectionParams CorrectionParams::identity(int n_ods) {
  CorrectionParams c;
  c.beta = Eigen::VectorXd::Zero(2 + n_ods);
  c.alpha = Eigen::VectorXd::Zero(2 + n_ods);
  c.beta(0) = 1.0;
  c.alpha(0) = 1.0;
  return c;
}

Eigen::VectorXd link_demand(const AssignmentMatrix& a, const DemandVector& d) {
  if (a.cols() != d.size()) {
    throw std::invalid_argument("assignment matrix and demand vector dimensions disagree");
  }
  return a * d;
}

double density(double link_demand, int lanes, const AnalyticalParams& p) {
  return p.kappa * p.k_jam * link_demand / static_cast<double>(lanes);
}

double velocity(double k, double v_max_kmh, const AnalyticalParams& p) {
  const double u = (std::max(k, p.k_crit) - p.k_crit) / p.k_jam;
  if (u <= 0.0) return v_max_kmh;
  if (u >= 1.0) return p.v_min_kmh;
  const double w = std::pow(1.0 - std::pow(u, p.gamma1), p.gamma2);
  const double v = p.v_min_kmh + (v_max_kmh - p.v_min_kmh) * w;
  return std::clamp(v, p.v_min_kmh, v_max_kmh);
}

double velocity_density_derivative(double k, double v_max_kmh, const AnalyticalParams& p) {
  if (k <= p.k_crit) return 0.0;  // free-flow branch, one-sided zero at the kink
  const double u = (k - p.k_crit) / p.k_jam;
  if (u >= 1.0) return 0.0;
  const double inner = 1.0 - std::pow(u, p.gamma1);
  return -(v_max_kmh - p.v_min_kmh) * p.gamma2 * std::pow(inner, p.gamma2 - 1.0) *
         p.gamma1 * std::pow(u, p.gamma1 - 1.0) / p.k_jam;
}

double path_travel_time_min(const std::vector<int>& segments,
                            const std::vector<Segment>& segment_data,
                            const Eigen::VectorXd& velocity) {
  double t = 0.0;
  for (int i : segments) t += 60.0 * segment_data[i].length_km / velocity(i);
  return t;
}

double ratio_variance(const Eigen::VectorXd& lambda, const Eigen::VectorXd& x) {
  const Eigen::Index n = lambda.size();
  if (n != x.size()) throw std::invalid_argument("ratio_variance: size mismatch");
  if (n <= 1) return 0.0;
  // Deviations from the first ratio; a constant ratio vector yields an exact
  // zero instead of accumulated rounding noise.
  Eigen::VectorXd delta(n);
  const double base = lambda(0) / x(0);
  for (Eigen::Index i = 0; i < n; ++i) delta(i) = lambda(i) / x(i) - base;
  const double mean_delta = delta.mean();
  return (delta.array() - mean_delta).square().mean();
}

MetamodelContext::MetamodelContext(const Network& net, const FieldMeasurements& meas,
                                   const AnalyticalParams& params)
    : idx_(NetworkIndex::build(net)), params_(params) {
  params_.validate();
  for (const Segment& s : idx_.segments) {
    if (!(params_.v_min_kmh < s.speed_limit_kmh)) {
      throw std::invalid_argument("v_min must be below the speed limit of segment " + s.id);
    }
  }
  if (idx_.measured_paths.empty()) {
    throw std::invalid_argument("network has no measured paths");
  }
  if (idx_.measured_segments.empty()) {
    throw std::invalid_argument("network has no measured segments");
  }
  const auto violations = validate_measurements(net, meas);
  if (!violations.empty()) {
    throw std::invalid_argument("invalid measurements: " + violations.front().entity + ": " +
                                violations.front().rule);
  }
  assignment_ = build_assignment_matrix(idx_);
  y_gt_ = measured_time_vector(idx_, meas);
  x_gt_ = measured_count_vector(idx_, meas);
  measured_paths_by_segment_.resize(idx_.n_segments());
  for (std::size_t j = 0; j < idx_.measured_paths.size(); ++j) {
    for (int i : idx_.path_segments[idx_.measured_paths[j]]) {
      measured_paths_by_segment_[i].push_back(static_cast<int>(j));
    }
  }
}

AnalyticalState MetamodelContext::state(const DemandVector& d) const {
  AnalyticalState s;
  s.link_demand = link_demand(assignment_, d);
  const int n = idx_.n_segments();
  s.density.resize(n);
  s.velocity.resize(n);
  for (int i = 0; i < n; ++i) {
    s.density(i) = density(s.link_demand(i), idx_.segments[i].lanes, params_);
    s.velocity(i) = velocity(s.density(i), idx_.segments[i].speed_limit_kmh, params_);
  }
  s.path_time_min.resize(idx_.measured_paths.size());
  for (std::size_t j = 0; j < idx_.measured_paths.size(); ++j) {
    s.path_time_min(static_cast<Eigen::Index>(j)) =
        path_travel_time_min(idx_.path_segments[idx_.measured_paths[j]], idx_.segments, s.velocity);
  }
  return s;
}

void MetamodelContext::objective_terms(const DemandVector& d, double* f1, double* f2) const {
  const AnalyticalState s = state(d);
  if (f1) *f1 = (y_gt_ - s.path_time_min).squaredNorm() / static_cast<double>(y_gt_.size());
  if (f2) {
    Eigen::VectorXd lambda_measured(x_gt_.size());
    for (Eigen::Index j = 0; j < x_gt_.size(); ++j) {
      lambda_measured(j) = s.link_demand(idx_.measured_segments[static_cast<std::size_t>(j)]);
    }
    *f2 = ratio_variance(lambda_measured, x_gt_);
  }
}

double MetamodelContext::value_and_gradient(const DemandVector& d, const CorrectionParams& c,
                                            const ObjectiveWeights& w,
                                            Eigen::VectorXd* grad) const {
  const int nz = idx_.n_ods();
  if (d.size() != nz) throw std::invalid_argument("demand vector has wrong dimension");
  if (c.beta.size() != nz + 2 || c.alpha.size() != nz + 2) {
    throw std::invalid_argument("correction parameters have wrong dimension");
  }

  const AnalyticalState s = state(d);
  const Eigen::Index np = y_gt_.size();
  const Eigen::Index ni = x_gt_.size();

  const double f1 = (y_gt_ - s.path_time_min).squaredNorm() / static_cast<double>(np);

  Eigen::VectorXd ratios(ni);
  for (Eigen::Index j = 0; j < ni; ++j) {
    ratios(j) = s.link_demand(idx_.measured_segments[static_cast<std::size_t>(j)]) / x_gt_(j);
  }
  double f2 = 0.0;
  Eigen::VectorXd centered = Eigen::VectorXd::Zero(ni);
  if (ni > 1) {
    const Eigen::VectorXd delta = (ratios.array() - ratios(0)).matrix();
    centered = (delta.array() - delta.mean()).matrix();
    f2 = centered.squaredNorm() / static_cast<double>(ni);
  }

  const double value = w.w1 * (c.beta(0) * f1 + c.beta(1) + c.beta.tail(nz).dot(d)) +
                       w.w2 * (c.alpha(0) * f2 + c.alpha(1) + c.alpha.tail(nz).dot(d));
  if (!grad) return value;

  // df1/dlambda_i via the chain lambda -> density -> velocity -> path time.
  Eigen::VectorXd dfl = Eigen::VectorXd::Zero(idx_.n_segments());
  for (int i = 0; i < idx_.n_segments(); ++i) {
    if (measured_paths_by_segment_[i].empty()) continue;
    const double dv = velocity_density_derivative(s.density(i), idx_.segments[i].speed_limit_kmh,
                                                  params_);
    if (dv == 0.0) continue;
    double df1_dv = 0.0;
    const double vi = s.velocity(i);
    const double li = idx_.segments[i].length_km;
    for (int j : measured_paths_by_segment_[i]) {
      const double resid = y_gt_(j) - s.path_time_min(j);
      df1_dv += (2.0 / static_cast<double>(np)) * resid * 60.0 * li / (vi * vi);
    }
    const double dk_dl = params_.kappa * params_.k_jam / static_cast<double>(idx_.segments[i].lanes);
    dfl(i) = df1_dv * dv * dk_dl;
  }
  Eigen::VectorXd g1 = assignment_.transpose() * dfl;

  // df2/dlambda through the centered ratios; the mean term drops out because
  // the centered ratios sum to zero.
  Eigen::VectorXd dfl2 = Eigen::VectorXd::Zero(idx_.n_segments());
  if (ni > 1) {
    for (Eigen::Index j = 0; j < ni; ++j) {
      const int i = idx_.measured_segments[static_cast<std::size_t>(j)];
      dfl2(i) += (2.0 / static_cast<double>(ni)) * centered(j) / x_gt_(j);
    }
  }
  Eigen::VectorXd g2 = assignment_.transpose() * dfl2;

  *grad = w.w1 * (c.beta(0) * g1 + c.beta.tail(nz)) +
          w.w2 * (c.alpha(0) * g2 + c.alpha.tail(nz));
  return value;
}

double f1_analytical(const DemandVector& d, const Network& net,
                     const FieldMeasurements& meas, const AnalyticalParams& p) {
  double f1 = 0.0;
  MetamodelContext(net, meas, p).objective_terms(d, &f1, nullptr);
  return f1;
}

double f2_analytical(const DemandVector& d, const Network& net,
                     const FieldMeasurements& meas, const AnalyticalParams& p) {
  double f2 = 0.0;
  MetamodelContext(net, meas, p).objective_terms(d, nullptr, &f2);
  return f2;
}

double simulated_objective(const Eigen::VectorXd& mean_counts,
                           const Eigen::VectorXd& mean_path_times,
                           const Network& net, const FieldMeasurements& meas,
                           const ObjectiveWeights& w) {
  const NetworkIndex idx = NetworkIndex::build(net);
  if (mean_counts.size() != idx.n_segments() || mean_path_times.size() != idx.n_paths()) {
    throw std::invalid_argument("simulated quantities have wrong dimensions");
  }
  const Eigen::VectorXd y_gt = measured_time_vector(idx, meas);
  const Eigen::VectorXd x_gt = measured_count_vector(idx, meas);
  double msd = 0.0;
  for (std::size_t j = 0; j < idx.measured_paths.size(); ++j) {
    const double r = y_gt(static_cast<Eigen::Index>(j)) - mean_path_times(idx.measured_paths[j]);
    msd += r * r;
  }
  msd /= static_cast<double>(idx.measured_paths.size());
  Eigen::VectorXd counts_measured(x_gt.size());
  for (Eigen::Index j = 0; j < x_gt.size(); ++j) {
    counts_measured(j) = mean_counts(idx.measured_segments[static_cast<std::size_t>(j)]);
  }
  return w.w1 * msd + w.w2 * ratio_variance(counts_measured, x_gt);
}

std::pair<double, Eigen::VectorXd> metamodel_value_and_gradient(
    const DemandVector& d, const CorrectionParams& c, const ObjectiveWeights& w,
    const Network& net, const FieldMeasurements& meas, const AnalyticalParams& p) {
  const MetamodelContext ctx(net, meas, p);
  Eigen::VectorXd grad;
  const double value = ctx.value_and_gradient(d, c, w, &grad);
  return {value, std::move(grad)};
}

}  // namespace odcal
