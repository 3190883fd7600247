#pragma once

#include <vector>

#include "fingertrack/topo.hpp"

namespace fingertrack {

struct Branch {
  int id = 0;
  std::vector<int> nodes;  // downward path, highest first
  std::vector<int> arcs;   // arcs[i] joins nodes[i] and nodes[i + 1]
  double top_height = 0.0;
  double bottom_height = 0.0;
  double persistence = 0.0;  // top_height - bottom_height
  double length = 0.0;
  int complexity = 0;      // non-regular nodes on the path
  Vec2 centroid_xy;        // horizontal axes, in axis order
  double mean_density = 0.0;
  std::vector<Vec3> polyline;
};

struct BranchConnection {
  int branch_a = 0;  // discovered earlier
  int branch_b = 0;
  int node = 0;
  double height = 0.0;
};

struct BranchDecomposition {
  std::vector<Branch> branches;
  std::vector<BranchConnection> connections;
  int principal = 0;
  std::vector<int> discovery_order;  // FIFO order of the connection search
};

/// Best downward path over the arcs flagged in `available`: maximum height
/// extent, then total polyline length, then smaller smallest node id, then
/// lexicographically smaller node sequence. Empty if no arc is available.
struct DownwardPath {
  std::vector<int> nodes;
  std::vector<int> arcs;
  double extent = 0.0;
  double length = 0.0;
};
DownwardPath longest_downward_path(const SkeletonGraph& g, const std::vector<char>& available);

/// Peels longest downward paths off the remaining arcs until none are left
/// (nodes stay shared between branches), then links branches by FIFO search
/// from the principal branch over shared nodes.
///
/// Throws ValidationError on an empty graph.
BranchDecomposition extract_branches(const SkeletonGraph& g);

double branch_height(const Branch& b);

}  // namespace fingertrack
