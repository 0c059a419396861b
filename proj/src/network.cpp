#include "odcal/network.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "odcal/rng.hpp"

namespace odcal {

double NetworkIndex::freeflow_time_min(int path) const {
  double t = 0.0;
  for (int i : path_segments[path]) {
    t += 60.0 * segments[i].length_km / segments[i].speed_limit_kmh;
  }
  return t;
}

NetworkIndex NetworkIndex::build(const Network& net) {
  NetworkIndex idx;
  idx.segments = net.segments;
  idx.od_ids = net.od_pairs;
  for (int i = 0; i < static_cast<int>(net.segments.size()); ++i) {
    if (!idx.segment_index.emplace(net.segments[i].id, i).second) {
      throw std::invalid_argument("duplicate segment id: " + net.segments[i].id);
    }
  }
  for (int z = 0; z < static_cast<int>(net.od_pairs.size()); ++z) {
    if (!idx.od_index.emplace(net.od_pairs[z], z).second) {
      throw std::invalid_argument("duplicate OD id: " + net.od_pairs[z]);
    }
  }
  idx.od_paths.resize(net.od_pairs.size());
  for (int p = 0; p < static_cast<int>(net.paths.size()); ++p) {
    const Path& path = net.paths[p];
    if (!idx.path_index.emplace(path.id, p).second) {
      throw std::invalid_argument("duplicate path id: " + path.id);
    }
    auto od_it = idx.od_index.find(path.od);
    if (od_it == idx.od_index.end()) {
      throw std::invalid_argument("path " + path.id + " references unknown OD: " + path.od);
    }
    std::vector<int> segs;
    segs.reserve(path.segments.size());
    for (const std::string& sid : path.segments) {
      auto it = idx.segment_index.find(sid);
      if (it == idx.segment_index.end()) {
        throw std::invalid_argument("path " + path.id + " references unknown segment: " + sid);
      }
      segs.push_back(it->second);
    }
    idx.path_ids.push_back(path.id);
    idx.path_od.push_back(od_it->second);
    idx.path_split.push_back(path.split);
    idx.path_segments.push_back(std::move(segs));
    idx.od_paths[od_it->second].push_back(p);
  }
  for (const std::string& pid : net.measured_paths) {
    auto it = idx.path_index.find(pid);
    if (it == idx.path_index.end()) {
      throw std::invalid_argument("measured path not in network: " + pid);
    }
    idx.measured_paths.push_back(it->second);
  }
  for (const std::string& sid : net.measured_segments) {
    auto it = idx.segment_index.find(sid);
    if (it == idx.segment_index.end()) {
      throw std::invalid_argument("measured segment not in network: " + sid);
    }
    idx.measured_segments.push_back(it->second);
  }
  return idx;
}

AssignmentMatrix build_assignment_matrix(const NetworkIndex& idx) {
  AssignmentMatrix a = AssignmentMatrix::Zero(idx.n_segments(), idx.n_ods());
  for (int p = 0; p < idx.n_paths(); ++p) {
    const int z = idx.path_od[p];
    for (int i : idx.path_segments[p]) {
      a(i, z) += idx.path_split[p];
    }
  }
  return a;
}

AssignmentMatrix build_assignment_matrix(const Network& net) {
  return build_assignment_matrix(NetworkIndex::build(net));
}

std::vector<Violation> validate_network(const Network& net) {
  std::vector<Violation> out;
  auto add = [&out](const std::string& entity, const std::string& rule) {
    out.push_back({entity, rule});
  };

  if (net.od_pairs.empty()) add("network", "at least one OD pair required");

  std::set<std::string> seg_ids;
  for (const Segment& s : net.segments) {
    if (!seg_ids.insert(s.id).second) add(s.id, "duplicate segment id");
    if (!(s.length_km > 0.0)) add(s.id, "segment length must be positive");
    if (s.lanes < 1) add(s.id, "segment must have at least one lane");
    if (!(s.speed_limit_kmh > 0.0)) add(s.id, "speed limit must be positive");
  }

  std::set<std::string> od_ids(net.od_pairs.begin(), net.od_pairs.end());
  if (od_ids.size() != net.od_pairs.size()) add("network", "duplicate OD id");

  std::set<std::string> path_ids;
  std::unordered_map<std::string, double> split_sum;
  std::unordered_map<std::string, int> od_path_count;
  for (const Path& p : net.paths) {
    if (!path_ids.insert(p.id).second) add(p.id, "duplicate path id");
    if (od_ids.count(p.od) == 0) add(p.id, "path references unknown OD " + p.od);
    if (p.segments.empty()) add(p.id, "path has no segments");
    for (const std::string& sid : p.segments) {
      if (seg_ids.count(sid) == 0) add(p.id, "path references unknown segment " + sid);
    }
    if (p.split < 0.0 || p.split > 1.0) add(p.id, "split outside [0, 1]");
    split_sum[p.od] += p.split;
    od_path_count[p.od] += 1;
  }
  for (const std::string& od : net.od_pairs) {
    if (od_path_count[od] == 0) {
      add(od, "OD pair has no path");
    } else if (std::abs(split_sum[od] - 1.0) > 1e-9) {
      add(od, "path splits sum to " + std::to_string(split_sum[od]) + ", expected 1");
    }
  }
  for (const std::string& pid : net.measured_paths) {
    if (path_ids.count(pid) == 0) add(pid, "measured path not in network");
  }
  for (const std::string& sid : net.measured_segments) {
    if (seg_ids.count(sid) == 0) add(sid, "measured segment not in network");
  }
  return out;
}

namespace {

std::string padded_id(const char* prefix, int n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%03d", prefix, n);
  return buf;
}

Segment draw_segment(const std::string& id, Rng& rng) {
  Segment s;
  s.id = id;
  s.length_km = rng.uniform(0.8, 2.0);
  s.lanes = rng.uniform() < 0.25 ? 3 : 2;
  const double speeds[3] = {90.0, 100.0, 110.0};
  s.speed_limit_kmh = speeds[rng.integer(3)];
  return s;
}

void apply_measurement_masks(Network& net, const SyntheticNetworkSpec& spec, Rng& rng) {
  net.measured_paths.clear();
  net.measured_segments.clear();
  for (const Path& p : net.paths) net.measured_paths.push_back(p.id);
  for (const Segment& s : net.segments) net.measured_segments.push_back(s.id);
  auto thin = [&rng](std::vector<std::string>& ids, double fraction) {
    if (fraction >= 1.0) return;
    std::vector<std::string> kept;
    for (const std::string& id : ids) {
      if (rng.uniform() < fraction) kept.push_back(id);
    }
    if (kept.empty()) kept.push_back(ids.front());  // measured sets stay nonempty
    ids = std::move(kept);
  };
  thin(net.measured_paths, spec.measured_path_fraction);
  thin(net.measured_segments, spec.measured_segment_fraction);
}

Network generate_corridor(const SyntheticNetworkSpec& spec, Rng& rng) {
  const int m = spec.segments;
  if (m < 1) throw std::invalid_argument("corridor needs at least one segment");
  const long max_ods = static_cast<long>(m) * (m + 1) / 2;
  if (spec.od_pairs < 1 || spec.od_pairs > max_ods) {
    throw std::invalid_argument("corridor with " + std::to_string(m) +
                                " segments supports at most " + std::to_string(max_ods) +
                                " OD pairs, got " + std::to_string(spec.od_pairs));
  }

  Network net;
  for (int i = 0; i < m; ++i) net.segments.push_back(draw_segment(padded_id("s", i), rng));

  // Entry/exit node pairs along the chain. The first OD spans the whole
  // corridor so every segment carries traffic; the rest are random subspans.
  std::set<std::pair<int, int>> spans;
  spans.insert({0, m});
  while (static_cast<int>(spans.size()) < spec.od_pairs) {
    int a = static_cast<int>(rng.integer(static_cast<std::uint64_t>(m)));
    int b = a + 1 + static_cast<int>(rng.integer(static_cast<std::uint64_t>(m - a)));
    spans.insert({a, b});
  }
  int z = 0;
  for (const auto& [a, b] : spans) {
    const std::string od_id = padded_id("z", z);
    net.od_pairs.push_back(od_id);
    Path p;
    p.id = padded_id("p", z);
    p.od = od_id;
    p.split = 1.0;
    for (int i = a; i < b; ++i) p.segments.push_back(net.segments[i].id);
    net.paths.push_back(std::move(p));
    ++z;
  }
  return net;
}

Network generate_grid(const SyntheticNetworkSpec& spec, Rng& rng) {
  const int rows = spec.grid_rows, cols = spec.grid_cols;
  if (rows < 2 || cols < 2) throw std::invalid_argument("grid needs at least 2x2 nodes");

  Network net;
  // Directed edges rightward (h) and downward (v) over a rows x cols node grid.
  auto h_id = [](int r, int c) { return "h" + std::to_string(r) + "_" + std::to_string(c); };
  auto v_id = [](int r, int c) { return "v" + std::to_string(r) + "_" + std::to_string(c); };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c + 1 < cols; ++c) net.segments.push_back(draw_segment(h_id(r, c), rng));
  for (int r = 0; r + 1 < rows; ++r)
    for (int c = 0; c < cols; ++c) net.segments.push_back(draw_segment(v_id(r, c), rng));

  // Reachable node pairs: strictly south-east movement.
  long reachable = 0;
  for (int r1 = 0; r1 < rows; ++r1)
    for (int c1 = 0; c1 < cols; ++c1)
      for (int r2 = r1; r2 < rows; ++r2)
        for (int c2 = c1; c2 < cols; ++c2)
          if (r2 != r1 || c2 != c1) ++reachable;
  if (spec.od_pairs < 1 || spec.od_pairs > reachable) {
    throw std::invalid_argument("grid supports at most " + std::to_string(reachable) +
                                " OD pairs, got " + std::to_string(spec.od_pairs));
  }

  std::set<std::array<int, 4>> chosen;
  while (static_cast<int>(chosen.size()) < spec.od_pairs) {
    int r1 = static_cast<int>(rng.integer(rows));
    int c1 = static_cast<int>(rng.integer(cols));
    int r2 = r1 + static_cast<int>(rng.integer(rows - r1));
    int c2 = c1 + static_cast<int>(rng.integer(cols - c1));
    if (r1 == r2 && c1 == c2) continue;
    chosen.insert({r1, c1, r2, c2});
  }

  auto right_then_down = [&](int r1, int c1, int r2, int c2) {
    std::vector<std::string> segs;
    for (int c = c1; c < c2; ++c) segs.push_back(h_id(r1, c));
    for (int r = r1; r < r2; ++r) segs.push_back(v_id(r, c2));
    return segs;
  };
  auto down_then_right = [&](int r1, int c1, int r2, int c2) {
    std::vector<std::string> segs;
    for (int r = r1; r < r2; ++r) segs.push_back(v_id(r, c1));
    for (int c = c1; c < c2; ++c) segs.push_back(h_id(r2, c));
    return segs;
  };

  int z = 0, pn = 0;
  for (const auto& [r1, c1, r2, c2] : chosen) {
    const std::string od_id = padded_id("z", z);
    net.od_pairs.push_back(od_id);
    const bool two_routes = spec.paths_per_od >= 2 && r2 > r1 && c2 > c1;
    Path first;
    first.id = padded_id("p", pn++);
    first.od = od_id;
    first.split = two_routes ? 0.6 : 1.0;
    first.segments = right_then_down(r1, c1, r2, c2);
    net.paths.push_back(std::move(first));
    if (two_routes) {
      Path second;
      second.id = padded_id("p", pn++);
      second.od = od_id;
      second.split = 0.4;
      second.segments = down_then_right(r1, c1, r2, c2);
      net.paths.push_back(std::move(second));
    }
    ++z;
  }
  return net;
}

}  // namespace

Network generate_synthetic_network(const SyntheticNetworkSpec& spec) {
  Rng rng(mix_seed(spec.seed, 0x6e65));
  Network net = spec.topology == SyntheticNetworkSpec::Topology::corridor
                    ? generate_corridor(spec, rng)
                    : generate_grid(spec, rng);
  apply_measurement_masks(net, spec, rng);
  return net;
}

}  // namespace odcal
