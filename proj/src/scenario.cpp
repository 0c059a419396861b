#include "odcal/scenario.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "odcal/rng.hpp"

namespace odcal {

using nlohmann::json;

namespace {

constexpr std::uint64_t kGtDemandSalt = 0x61d;

template <typename T>
void read_into(const json& j, const char* key, T& field, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(where + "." + key + ": wrong type");
  }
}

void read_physics(const json& j, AnalyticalParams& p, const std::string& where) {
  read_into(j, "v_min_kmh", p.v_min_kmh, where);
  read_into(j, "k_jam", p.k_jam, where);
  read_into(j, "k_crit", p.k_crit, where);
  read_into(j, "kappa", p.kappa, where);
  read_into(j, "gamma1", p.gamma1, where);
  read_into(j, "gamma2", p.gamma2, where);
}

}  // namespace

void ScenarioSpec::resolve() {
  if (total_demand <= 0.0) {
    if (congestion == "low") {
      total_demand = 2000.0;
    } else if (congestion == "medium") {
      total_demand = 3500.0;
    } else if (congestion == "high") {
      total_demand = 5000.0;
    } else {
      throw std::invalid_argument(
          "congestion: expected low|medium|high, or set total_demand explicitly");
    }
  }
  if (!(penetration > 0.0) || penetration > 1.0) {
    throw std::invalid_argument("penetration: must be in (0, 1]");
  }
  physics.validate();
  simulator.physics = physics;
  topology.seed = seed;
  simulator.seed = seed;
  solver.seed = seed;
  const int n_ods = topology.od_pairs;
  if (n_ods < 1) throw std::invalid_argument("topology.od_pairs: must be at least 1");
  if (solver.d_max <= 0.0) {
    solver.d_max = std::ceil(3.0 * total_demand / static_cast<double>(n_ods));
  }
}

ScenarioSpec scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
  }
  ScenarioSpec spec;
  if (j.contains("topology")) {
    const json& jt = j.at("topology");
    std::string type = "corridor";
    read_into(jt, "type", type, "topology");
    if (type == "corridor") {
      spec.topology.topology = SyntheticNetworkSpec::Topology::corridor;
    } else if (type == "grid") {
      spec.topology.topology = SyntheticNetworkSpec::Topology::grid;
    } else {
      throw std::invalid_argument("topology.type: expected corridor|grid");
    }
    read_into(jt, "segments", spec.topology.segments, "topology");
    read_into(jt, "od_pairs", spec.topology.od_pairs, "topology");
    read_into(jt, "grid_rows", spec.topology.grid_rows, "topology");
    read_into(jt, "grid_cols", spec.topology.grid_cols, "topology");
    read_into(jt, "paths_per_od", spec.topology.paths_per_od, "topology");
    read_into(jt, "measured_path_fraction", spec.topology.measured_path_fraction, "topology");
    read_into(jt, "measured_segment_fraction", spec.topology.measured_segment_fraction,
              "topology");
  }
  read_into(j, "congestion", spec.congestion, "scenario");
  read_into(j, "total_demand", spec.total_demand, "scenario");
  read_into(j, "penetration", spec.penetration, "scenario");
  read_into(j, "seed", spec.seed, "scenario");
  if (j.contains("physics")) read_physics(j.at("physics"), spec.physics, "physics");
  if (j.contains("simulator")) {
    const json& js = j.at("simulator");
    std::string noise = "poisson";
    read_into(js, "demand_noise", noise, "simulator");
    if (noise == "poisson") {
      spec.simulator.demand_noise = DemandNoise::poisson;
    } else if (noise == "deterministic") {
      spec.simulator.demand_noise = DemandNoise::deterministic;
    } else {
      throw std::invalid_argument("simulator.demand_noise: expected poisson|deterministic");
    }
    read_into(js, "velocity_noise", spec.simulator.velocity_noise, "simulator");
    read_into(js, "interval_h", spec.simulator.interval_h, "simulator");
    read_into(js, "fp_tolerance", spec.simulator.fp_tolerance, "simulator");
    read_into(js, "fp_max_iters", spec.simulator.fp_max_iters, "simulator");
    if (spec.simulator.velocity_noise < 0.0) {
      throw std::invalid_argument("simulator.velocity_noise: must be nonnegative");
    }
  }
  if (j.contains("solver")) {
    const json& js = j.at("solver");
    read_into(js, "w1", spec.solver.weights.w1, "solver");
    read_into(js, "w2", spec.solver.weights.w2, "solver");
    read_into(js, "auto_balance_w2", spec.solver.auto_balance_w2, "solver");
    read_into(js, "d_max", spec.solver.d_max, "solver");
    if (!js.contains("d_max")) spec.solver.d_max = 0.0;  // resolve() derives it
    read_into(js, "rollouts", spec.solver.rollouts, "solver");
    read_into(js, "iterations", spec.solver.max_iterations, "solver");
    read_into(js, "fit_prior_mu", spec.solver.fit_prior_mu, "solver");
    read_into(js, "fit_decay_rho", spec.solver.fit_decay_rho, "solver");
    read_into(js, "subproblem_max_iters", spec.solver.subproblem.max_iters, "solver");
    read_into(js, "subproblem_tolerance", spec.solver.subproblem.tolerance, "solver");
  } else {
    spec.solver.d_max = 0.0;
  }
  spec.resolve();
  return spec;
}

std::string scenario_to_json(const ScenarioSpec& spec) {
  json j;
  j["topology"] = {
      {"type",
       spec.topology.topology == SyntheticNetworkSpec::Topology::corridor ? "corridor" : "grid"},
      {"segments", spec.topology.segments},
      {"od_pairs", spec.topology.od_pairs},
      {"grid_rows", spec.topology.grid_rows},
      {"grid_cols", spec.topology.grid_cols},
      {"paths_per_od", spec.topology.paths_per_od},
      {"measured_path_fraction", spec.topology.measured_path_fraction},
      {"measured_segment_fraction", spec.topology.measured_segment_fraction}};
  j["congestion"] = spec.congestion;
  j["total_demand"] = spec.total_demand;
  j["penetration"] = spec.penetration;
  j["seed"] = spec.seed;
  j["physics"] = {{"v_min_kmh", spec.physics.v_min_kmh}, {"k_jam", spec.physics.k_jam},
                  {"k_crit", spec.physics.k_crit},       {"kappa", spec.physics.kappa},
                  {"gamma1", spec.physics.gamma1},       {"gamma2", spec.physics.gamma2}};
  j["simulator"] = {
      {"demand_noise",
       spec.simulator.demand_noise == DemandNoise::poisson ? "poisson" : "deterministic"},
      {"velocity_noise", spec.simulator.velocity_noise},
      {"interval_h", spec.simulator.interval_h},
      {"fp_tolerance", spec.simulator.fp_tolerance},
      {"fp_max_iters", spec.simulator.fp_max_iters}};
  j["solver"] = {{"w1", spec.solver.weights.w1},
                 {"w2", spec.solver.weights.w2},
                 {"auto_balance_w2", spec.solver.auto_balance_w2},
                 {"d_max", spec.solver.d_max},
                 {"rollouts", spec.solver.rollouts},
                 {"iterations", spec.solver.max_iterations},
                 {"fit_prior_mu", spec.solver.fit_prior_mu},
                 {"fit_decay_rho", spec.solver.fit_decay_rho},
                 {"subproblem_max_iters", spec.solver.subproblem.max_iters},
                 {"subproblem_tolerance", spec.solver.subproblem.tolerance}};
  return j.dump(2) + "\n";
}

DemandVector make_ground_truth_demand(const ScenarioSpec& spec, int n_ods) {
  Rng rng(mix_seed(spec.seed, kGtDemandSalt));
  DemandVector shares(n_ods);
  for (int z = 0; z < n_ods; ++z) shares(z) = rng.uniform(0.5, 1.5);
  return spec.total_demand * shares / shares.sum();
}

}  // namespace odcal
