#include "odcal/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "odcal/rng.hpp"

namespace odcal {

namespace {

/// Trips per path for one OD. Deterministic mode rounds each path's share
/// independently, which keeps per-path trips monotone in demand.
void generate_trips(const NetworkIndex& idx, const DemandVector& d, const SimulatorConfig& cfg,
                    Rng& rng, std::vector<std::int64_t>& path_trips) {
  path_trips.assign(idx.n_paths(), 0);
  for (int z = 0; z < idx.n_ods(); ++z) {
    const std::vector<int>& paths = idx.od_paths[z];
    if (cfg.demand_noise == DemandNoise::deterministic) {
      for (int p : paths) {
        path_trips[p] = std::llround(idx.path_split[p] * d(z));
      }
      continue;
    }
    const std::uint64_t n = rng.poisson(d(z));
    if (paths.size() == 1) {
      path_trips[paths[0]] = static_cast<std::int64_t>(n);
      continue;
    }
    for (std::uint64_t t = 0; t < n; ++t) {
      double u = rng.uniform();
      int chosen = paths.back();
      for (int p : paths) {
        u -= idx.path_split[p];
        if (u < 0.0) {
          chosen = p;
          break;
        }
      }
      ++path_trips[chosen];
    }
  }
}

}  // namespace

SimulationResult simulate(const NetworkIndex& idx, const DemandVector& demand,
                          const SimulatorConfig& cfg, std::uint64_t seed) {
  if (demand.size() != idx.n_ods()) {
    throw std::invalid_argument("demand vector has wrong dimension");
  }
  for (Eigen::Index z = 0; z < demand.size(); ++z) {
    if (!std::isfinite(demand(z)) || demand(z) < 0.0) {
      throw std::invalid_argument("demand must be finite and nonnegative (OD " +
                                  idx.od_ids[static_cast<std::size_t>(z)] + ")");
    }
  }
  cfg.physics.validate();
  if (!(cfg.fp_tolerance > 0.0)) throw std::invalid_argument("fixed-point tolerance must be positive");
  if (!(cfg.interval_h > 0.0)) throw std::invalid_argument("interval duration must be positive");

  const int n_seg = idx.n_segments();
  Rng rng(seed);

  std::vector<std::int64_t> path_trips;
  generate_trips(idx, demand, cfg, rng, path_trips);

  SimulationResult out;
  out.counts = Eigen::VectorXd::Zero(n_seg);
  for (int p = 0; p < idx.n_paths(); ++p) {
    if (path_trips[p] == 0) continue;
    for (int i : idx.path_segments[p]) out.counts(i) += static_cast<double>(path_trips[p]);
  }

  // Velocity noise perturbs only segments that carry vehicles; an empty
  // segment stays exactly at its speed limit.
  Eigen::VectorXd noise = Eigen::VectorXd::Ones(n_seg);
  if (cfg.velocity_noise > 0.0) {
    for (int i = 0; i < n_seg; ++i) {
      const double factor = std::exp(cfg.velocity_noise * rng.normal());
      if (out.counts(i) > 0.0) noise(i) = factor;
    }
  }

  // Quasi-static congestion fixed point: density follows from flow and the
  // current speed (vehicles present = flow rate x time spent on the segment),
  // speed follows from density through the fundamental diagram with the
  // per-segment noise factor, damped 0.5 per sweep.
  Eigen::VectorXd v(n_seg);
  for (int i = 0; i < n_seg; ++i) {
    const double vmax = idx.segments[i].speed_limit_kmh;
    v(i) = std::clamp(vmax * noise(i), cfg.physics.v_min_kmh, vmax);
  }
  out.fixed_point_converged = false;
  int iter = 0;
  while (iter < cfg.fp_max_iters) {
    ++iter;
    double max_rel = 0.0;
    for (int i = 0; i < n_seg; ++i) {
      if (out.counts(i) == 0.0) continue;  // empty segment, already at free flow
      const Segment& s = idx.segments[i];
      const double k = out.counts(i) / (cfg.interval_h * s.lanes * v(i));
      const double target = std::clamp(velocity(k, s.speed_limit_kmh, cfg.physics) * noise(i),
                                       cfg.physics.v_min_kmh, s.speed_limit_kmh);
      const double v_new = 0.5 * v(i) + 0.5 * target;
      max_rel = std::max(max_rel, std::abs(v_new - v(i)) / v(i));
      v(i) = v_new;
    }
    if (max_rel < cfg.fp_tolerance) {
      out.fixed_point_converged = true;
      break;
    }
  }
  out.fixed_point_iters = iter;

  out.path_times.resize(idx.n_paths());
  for (int p = 0; p < idx.n_paths(); ++p) {
    out.path_times(p) = path_travel_time_min(idx.path_segments[p], idx.segments, v);
  }

  if (cfg.retain_trips) {
    std::size_t total = 0;
    for (std::int64_t n : path_trips) total += static_cast<std::size_t>(n);
    out.trips.reserve(total);
    for (int p = 0; p < idx.n_paths(); ++p) {
      for (std::int64_t t = 0; t < path_trips[p]; ++t) {
        out.trips.push_back({idx.path_od[p], p, out.path_times(p)});
      }
    }
  }
  return out;
}

SimulationResult simulate(const Network& net, const DemandVector& demand,
                          const SimulatorConfig& cfg, std::uint64_t seed) {
  return simulate(NetworkIndex::build(net), demand, cfg, seed);
}

ExpectationEstimate estimate_expectations(const NetworkIndex& idx, const DemandVector& demand,
                                          const SimulatorConfig& cfg, int rollouts,
                                          std::uint64_t seed) {
  if (rollouts < 1) throw std::invalid_argument("rollouts must be at least 1");
  ExpectationEstimate est;
  est.rollouts = rollouts;
  est.mean_counts = Eigen::VectorXd::Zero(idx.n_segments());
  est.mean_path_times = Eigen::VectorXd::Zero(idx.n_paths());
  for (int r = 1; r <= rollouts; ++r) {
    const SimulationResult res = simulate(idx, demand, cfg, seed + static_cast<std::uint64_t>(r));
    est.mean_counts += res.counts;
    est.mean_path_times += res.path_times;
  }
  est.mean_counts /= static_cast<double>(rollouts);
  est.mean_path_times /= static_cast<double>(rollouts);
  return est;
}

ExpectationEstimate estimate_expectations(const Network& net, const DemandVector& demand,
                                          const SimulatorConfig& cfg, int rollouts,
                                          std::uint64_t seed) {
  return estimate_expectations(NetworkIndex::build(net), demand, cfg, rollouts, seed);
}

FieldMeasurements sample_measurements(const SimulationResult& result, const NetworkIndex& idx,
                                      double penetration, std::uint64_t seed) {
  if (!(penetration > 0.0) || penetration > 1.0) {
    throw std::invalid_argument("penetration must be in (0, 1]");
  }
  if (result.trips.empty() && result.counts.sum() > 0.0) {
    throw std::invalid_argument("sample_measurements requires retained trip records");
  }

  Rng rng(seed);
  std::vector<std::int64_t> kept_per_path(idx.n_paths(), 0);
  std::vector<double> time_sum_per_path(idx.n_paths(), 0.0);
  for (const TripRecord& trip : result.trips) {
    if (rng.uniform() < penetration) {
      ++kept_per_path[trip.path];
      time_sum_per_path[trip.path] += trip.travel_time_min;
    }
  }

  std::vector<double> kept_per_segment(idx.n_segments(), 0.0);
  for (int p = 0; p < idx.n_paths(); ++p) {
    if (kept_per_path[p] == 0) continue;
    for (int i : idx.path_segments[p]) {
      kept_per_segment[i] += static_cast<double>(kept_per_path[p]);
    }
  }

  FieldMeasurements m;
  m.penetration = penetration;
  for (int j : idx.measured_segments) {
    double count = kept_per_segment[j];
    if (count == 0.0) {
      count = 1.0;  // the calibration objective divides by measured counts
      m.warnings.push_back("segment " + idx.segments[j].id +
                           ": no sampled trips, count floored at 1");
    }
    m.segment_counts[idx.segments[j].id] = count;
  }
  for (int p : idx.measured_paths) {
    double t;
    if (kept_per_path[p] > 0) {
      t = time_sum_per_path[p] / static_cast<double>(kept_per_path[p]);
    } else {
      t = result.path_times(p);
      m.warnings.push_back("path " + idx.path_ids[p] +
                           ": no sampled trips, using all-trip mean travel time");
    }
    m.path_travel_time_min[idx.path_ids[p]] = t;
  }
  return m;
}

FieldMeasurements sample_measurements(const SimulationResult& result, const Network& net,
                                      double penetration, std::uint64_t seed) {
  return sample_measurements(result, NetworkIndex::build(net), penetration, seed);
}

}  // namespace odcal
