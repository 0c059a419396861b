#pragma once

#include <cstdint>
#include <string>

#include "odcal/analytical.hpp"
#include "odcal/network.hpp"
#include "odcal/simulator.hpp"
#include "odcal/solver.hpp"

namespace odcal {

/// Full experiment description: synthetic topology, demand scale, sampling
/// penetration, and the three module configurations. Loaded from a single
/// JSON file; every field has a default so a minimal spec works.
struct ScenarioSpec {
  SyntheticNetworkSpec topology;
  std::string congestion = "medium";  // low | medium | high | custom
  double total_demand = 0.0;          // resolved from the congestion preset when 0
  double penetration = 0.15;
  std::uint64_t seed = 1;
  AnalyticalParams physics;
  SimulatorConfig simulator;  // simulator.physics mirrors `physics`
  SolverConfig solver;        // solver.d_max of 0 resolves to a demand-based default

  /// Fills derived values: preset demand totals (low 2000, medium 3500,
  /// high 5000), d_max, seeds. Throws on inconsistent fields.
  void resolve();
};

ScenarioSpec scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioSpec& spec);

/// Ground-truth demand: per-OD shares drawn uniformly in [0.5, 1.5] and
/// normalized to the scenario's total. Deterministic per scenario seed.
DemandVector make_ground_truth_demand(const ScenarioSpec& spec, int n_ods);

}  // namespace odcal
