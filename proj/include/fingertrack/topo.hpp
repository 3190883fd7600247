#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fingertrack/field.hpp"

namespace fingertrack {

enum class NodeKind { root, tip, saddle_merge, saddle_split, regular };

std::string to_string(NodeKind k);

struct SkeletonNode {
  int id = 0;
  Vec3 position;
  double height = 0.0;
  NodeKind kind = NodeKind::regular;
  friend bool operator==(const SkeletonNode&, const SkeletonNode&) = default;
};

/// u is the upper endpoint, v the lower one. The polyline runs from u to v
/// with non-increasing height.
struct SkeletonArc {
  int id = 0;
  int u = 0;
  int v = 0;
  std::vector<Vec3> polyline;
  double mean_density = 0.0;
  double weight = 0.0;       // voxels averaged into mean_density
  std::vector<int> sources;  // ids of the arcs of the untrimmed skeleton it covers, sorted

  double length() const;
  friend bool operator==(const SkeletonArc&, const SkeletonArc&) = default;
};

/// Node and arc ids are their positions in the vectors.
struct SkeletonGraph {
  int finger_id = 0;
  int height_axis = 2;
  std::vector<SkeletonNode> nodes;
  std::vector<SkeletonArc> arcs;

  int cycle_count() const;  // arcs - nodes + components
  int component_count() const;
  friend bool operator==(const SkeletonGraph&, const SkeletonGraph&) = default;
};

struct TrimParams {
  double min_branch_persistence = 2.0;
  double min_cycle_persistence = 2.0;

  /// Defaults of two voxel sides.
  static TrimParams defaults(double spacing) { return {2.0 * spacing, 2.0 * spacing}; }
  void validate() const;
};

/// Reeb graph of the height function on the union of the core's closed voxel
/// cubes. Level sets inside one layer are 8-connected in-layer components;
/// the level set on the face plane between two layers is one component per
/// connected group of the 26-adjacency between their components. Chains of
/// regular nodes are absorbed into arc polylines. `field` supplies densities;
/// without it every voxel counts as 1.
///
/// Throws ValidationError for an empty or disconnected core.
SkeletonGraph build_reeb_skeleton(std::span<const std::size_t> core, const GridSpec& spec,
                                  const ScalarField* field = nullptr, int finger_id = 0);

/// Leaf arcs shorter (in height) than min_branch_persistence are removed in
/// increasing persistence order, then parallel arcs spanning less than
/// min_cycle_persistence collapse onto their densest member, repeated to a
/// fixpoint. Arcs at the global root and global tip are kept.
SkeletonGraph trim_skeleton(const SkeletonGraph& g, const TrimParams& params);

double finger_height(const SkeletonGraph& g);
int topological_complexity(const SkeletonGraph& g);

/// Recomputes node kinds from arc directions.
void classify_nodes(SkeletonGraph& g);

}  // namespace fingertrack
