#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace odcal {

using DemandVector = Eigen::VectorXd;

/// Demand-to-segment incidence, |segments| x |od_pairs|. Entry (i, z) is the
/// sum of split fractions of OD-z paths that traverse segment i.
using AssignmentMatrix = Eigen::MatrixXd;

struct Segment {
  std::string id;
  double length_km = 1.0;
  int lanes = 1;
  double speed_limit_kmh = 100.0;
};

/// One fixed route of an OD pair; `split` is the fraction of that OD's
/// demand assigned to this route. Splits over one OD's paths sum to 1.
struct Path {
  std::string id;
  std::string od;
  std::vector<std::string> segments;
  double split = 1.0;
};

struct Network {
  std::vector<Segment> segments;
  std::vector<std::string> od_pairs;
  std::vector<Path> paths;
  std::vector<std::string> measured_paths;
  std::vector<std::string> measured_segments;
};

struct Violation {
  std::string entity;
  std::string rule;
};

/// Integer-resolved view of a Network. Construction fails on dangling
/// references; everything downstream (simulator, metamodel, solver) works in
/// index space. Immutable once built.
struct NetworkIndex {
  std::vector<Segment> segments;               // copied, network order
  std::vector<std::string> od_ids;
  std::vector<std::string> path_ids;
  std::vector<int> path_od;                    // per path: OD index
  std::vector<double> path_split;
  std::vector<std::vector<int>> path_segments;  // per path: segment indices
  std::vector<std::vector<int>> od_paths;       // per OD: path indices
  std::vector<int> measured_paths;              // path indices, network order
  std::vector<int> measured_segments;           // segment indices, network order
  std::unordered_map<std::string, int> segment_index;
  std::unordered_map<std::string, int> od_index;
  std::unordered_map<std::string, int> path_index;

  int n_segments() const { return static_cast<int>(segments.size()); }
  int n_ods() const { return static_cast<int>(od_ids.size()); }
  int n_paths() const { return static_cast<int>(path_ids.size()); }

  /// Free-flow travel time of a path in minutes.
  double freeflow_time_min(int path) const;

  /// Throws std::invalid_argument on unknown segment/OD/path references.
  static NetworkIndex build(const Network& net);
};

/// A[i][z] = sum of split fractions of OD-z paths containing segment i.
AssignmentMatrix build_assignment_matrix(const Network& net);
AssignmentMatrix build_assignment_matrix(const NetworkIndex& idx);

/// Reports every broken Network invariant; empty result means well-formed.
std::vector<Violation> validate_network(const Network& net);

struct SyntheticNetworkSpec {
  enum class Topology { corridor, grid };
  Topology topology = Topology::corridor;
  int segments = 30;        // corridor only: chain length
  int od_pairs = 12;
  int grid_rows = 3;        // grid only
  int grid_cols = 3;
  int paths_per_od = 1;     // grid supports 2 (split 0.6/0.4) where routes differ
  std::uint64_t seed = 1;
  double measured_path_fraction = 1.0;     // 1.0 = full coverage
  double measured_segment_fraction = 1.0;
};

/// Deterministic function of the spec (including its seed). Every OD is
/// connected by at least one path; corridor paths are contiguous subchains.
/// Throws std::invalid_argument when the topology cannot host the requested
/// number of OD pairs.
Network generate_synthetic_network(const SyntheticNetworkSpec& spec);

}  // namespace odcal
