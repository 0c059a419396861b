#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "odcal/analytical.hpp"
#include "odcal/measurements.hpp"
#include "odcal/network.hpp"

namespace odcal {

enum class DemandNoise { poisson, deterministic };

/// Exogenous simulator parameters. The physical parameters are shared with
/// the analytical model; the rest control the simulator's own dynamics:
/// demand noise, multiplicative lognormal velocity noise, and the
/// quasi-static congestion fixed point.
struct SimulatorConfig {
  AnalyticalParams physics;
  DemandNoise demand_noise = DemandNoise::poisson;
  double velocity_noise = 0.05;  // sigma of log-velocity perturbation
  double interval_h = 0.1;      // analysis interval duration, hours
  double fp_tolerance = 1e-8;    // relative velocity change per sweep
  int fp_max_iters = 200;
  bool retain_trips = false;     // keep per-trip records for sampling
  std::uint64_t seed = 1;        // base seed for orchestration layers
};

struct TripRecord {
  int od;
  int path;
  double travel_time_min;
};

/// One stochastic rollout: vehicles per segment over the interval and mean
/// travel time per path (minutes). Trip records are kept only when the
/// config asks for them.
struct SimulationResult {
  Eigen::VectorXd counts;      // all segments, network order
  Eigen::VectorXd path_times;  // all paths, network order
  std::vector<TripRecord> trips;
  bool fixed_point_converged = true;
  int fixed_point_iters = 0;
};

/// Pure function of (network, demand, config, seed). Trips are generated per
/// OD (Poisson or rounded-deterministic), assigned to paths by split
/// fractions, and congestion is resolved by iterating the fundamental-diagram
/// velocity law against flow-derived densities with per-segment lognormal
/// velocity noise. A non-converged fixed point flags the result but still
/// returns the last iterate.
SimulationResult simulate(const Network& net, const DemandVector& demand,
                          const SimulatorConfig& cfg, std::uint64_t seed);
SimulationResult simulate(const NetworkIndex& idx, const DemandVector& demand,
                          const SimulatorConfig& cfg, std::uint64_t seed);

struct ExpectationEstimate {
  Eigen::VectorXd mean_counts;
  Eigen::VectorXd mean_path_times;
  int rollouts = 0;
};

/// Elementwise mean of `rollouts` simulate() calls with seeds
/// seed+1 ... seed+rollouts, reduced in seed order.
ExpectationEstimate estimate_expectations(const Network& net, const DemandVector& demand,
                                          const SimulatorConfig& cfg, int rollouts,
                                          std::uint64_t seed);
ExpectationEstimate estimate_expectations(const NetworkIndex& idx, const DemandVector& demand,
                                          const SimulatorConfig& cfg, int rollouts,
                                          std::uint64_t seed);

/// Bernoulli-samples the rollout's trips at the given penetration and
/// aggregates travel times at the path level and counts at the segment
/// level, over the network's measured sets. Zero-sample fallbacks: a
/// measured segment with no sampled trips gets a count of 1, a measured path
/// with no sampled trips falls back to the all-trip mean; both are recorded
/// as warnings.
FieldMeasurements sample_measurements(const SimulationResult& result, const Network& net,
                                      double penetration, std::uint64_t seed);
FieldMeasurements sample_measurements(const SimulationResult& result, const NetworkIndex& idx,
                                      double penetration, std::uint64_t seed);

}  // namespace odcal
