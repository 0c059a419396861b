#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "odcal/eval.hpp"
#include "odcal/network.hpp"
#include "odcal/rng.hpp"
#include "odcal/simulator.hpp"

using namespace odcal;

TEST_CASE("nrmse hand values") {
  Eigen::VectorXd truth(2), est(2);
  truth << 10.0, 10.0;
  est << 12.0, 8.0;
  CHECK(nrmse(est, truth) == doctest::Approx(0.2));
  CHECK(nrmse(truth, truth) == 0.0);
}

TEST_CASE("nrmse of a doubled estimate follows the algebraic closed form") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd truth(6);
    for (int i = 0; i < 6; ++i) truth(i) = rng.uniform(1.0, 50.0);
    const double expected = std::sqrt(truth.squaredNorm() / 6.0) / truth.mean();
    CHECK(nrmse(2.0 * truth, truth) == doctest::Approx(expected));
    CHECK(nrmse(2.0 * truth, truth) >= 1.0);
  }
  // Equality holds exactly for a constant truth vector.
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(4, 7.0);
  CHECK(nrmse(2.0 * c, c) == doctest::Approx(1.0));
}

TEST_CASE("nrmse is invariant under joint positive rescaling") {
  Rng rng(9);
  Eigen::VectorXd truth(5), est(5);
  for (int i = 0; i < 5; ++i) {
    truth(i) = rng.uniform(5.0, 20.0);
    est(i) = rng.uniform(5.0, 20.0);
  }
  const double base = nrmse(est, truth);
  CHECK(nrmse(13.7 * est, 13.7 * truth) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("nrmse rejects degenerate inputs") {
  Eigen::VectorXd empty(0), a(2), zero(2);
  a << 1.0, 2.0;
  zero << 0.0, 0.0;
  CHECK_THROWS_AS(nrmse(empty, empty), std::invalid_argument);
  CHECK_THROWS_AS(nrmse(a, zero), std::invalid_argument);
  Eigen::VectorXd negative(2);
  negative << 1.0, -3.0;
  CHECK_THROWS_AS(nrmse(a, negative), std::invalid_argument);
}

namespace {

struct EvalScene {
  Network net;
  DemandVector gt;
  FieldMeasurements meas;
  SimulatorConfig cfg;
};

EvalScene noise_free_scene() {
  SyntheticNetworkSpec spec;
  spec.segments = 10;
  spec.od_pairs = 4;
  spec.seed = 8;
  EvalScene s;
  s.net = generate_synthetic_network(spec);
  const NetworkIndex idx = NetworkIndex::build(s.net);
  s.cfg.demand_noise = DemandNoise::deterministic;
  s.cfg.velocity_noise = 0.0;
  s.gt.resize(idx.n_ods());
  Rng rng(2);
  for (int z = 0; z < idx.n_ods(); ++z) s.gt(z) = std::floor(rng.uniform(50.0, 400.0));
  SimulatorConfig gen_cfg = s.cfg;
  gen_cfg.retain_trips = true;
  const SimulationResult rollout = simulate(s.net, s.gt, gen_cfg, 5);
  s.meas = sample_measurements(rollout, s.net, 1.0, 6);
  return s;
}

}  // namespace

TEST_CASE("evaluating the ground truth in a noise-free scene scores zero") {
  const EvalScene s = noise_free_scene();
  const MetricsTriple t = evaluate_solution(s.gt, s.gt, s.meas, s.net, s.cfg, 5, 123);
  CHECK(t.nrmse_demand == 0.0);
  CHECK(t.nrmse_time < 1e-9);
  CHECK(t.nrmse_count < 1e-12);
}

TEST_CASE("zero demand scores the closed-form demand nrmse") {
  const EvalScene s = noise_free_scene();
  const DemandVector zero = DemandVector::Zero(s.gt.size());
  const MetricsTriple t = evaluate_solution(zero, s.gt, s.meas, s.net, s.cfg, 2, 123);
  const double expected = std::sqrt(s.gt.squaredNorm() / s.gt.size()) / s.gt.mean();
  CHECK(t.nrmse_demand == doctest::Approx(expected));
}

TEST_CASE("evaluate_solution is deterministic in the seed") {
  const EvalScene s = noise_free_scene();
  SimulatorConfig noisy = s.cfg;
  noisy.demand_noise = DemandNoise::poisson;
  noisy.velocity_noise = 0.1;
  const MetricsTriple a = evaluate_solution(s.gt, s.gt, s.meas, s.net, noisy, 5, 77);
  const MetricsTriple b = evaluate_solution(s.gt, s.gt, s.meas, s.net, noisy, 5, 77);
  CHECK(a.nrmse_demand == b.nrmse_demand);
  CHECK(a.nrmse_time == b.nrmse_time);
  CHECK(a.nrmse_count == b.nrmse_count);
  const MetricsTriple c = evaluate_solution(s.gt, s.gt, s.meas, s.net, noisy, 5, 78);
  CHECK(c.nrmse_time != a.nrmse_time);
}

TEST_CASE("evaluate_solution equals metrics from a retained expectation estimate") {
  const EvalScene s = noise_free_scene();
  SimulatorConfig noisy = s.cfg;
  noisy.velocity_noise = 0.08;
  const NetworkIndex idx = NetworkIndex::build(s.net);
  const ExpectationEstimate est = estimate_expectations(idx, s.gt, noisy, 5, 321);
  const MetricsTriple direct = metrics_from_estimate(est, s.gt, &s.gt, idx, s.meas);
  const MetricsTriple via_eval = evaluate_solution(s.gt, s.gt, s.meas, s.net, noisy, 5, 321);
  CHECK(direct.nrmse_time == via_eval.nrmse_time);
  CHECK(direct.nrmse_count == via_eval.nrmse_count);
  CHECK(direct.nrmse_demand == via_eval.nrmse_demand);
}

TEST_CASE("comparison report: identical runs have zero percent change") {
  ComparisonRow row{"abc123", "baseline", {0.4, 0.2, 0.3}};
  const std::string csv = comparison_report_csv(row, row);
  CHECK(csv.find("change_pct,0,0,0") != std::string::npos);
  CHECK(csv.rfind("scenario,method,", 0) == 0);
}

TEST_CASE("comparison report carries signed percent changes") {
  ComparisonRow a{"abc", "baseline", {0.50, 0.20, 0.40}};
  ComparisonRow b{"abc", "regularized", {0.25, 0.22, 0.30}};
  const std::string csv = comparison_report_csv(a, b);
  // demand improves 50%, time degrades 10%, counts improve 25%
  CHECK(csv.find("change_pct,-50,") != std::string::npos);
  CHECK(csv.find(",10,") != std::string::npos);
  CHECK(csv.find(",-25") != std::string::npos);
}
