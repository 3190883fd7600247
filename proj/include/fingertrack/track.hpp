#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fingertrack/branch.hpp"
#include "fingertrack/segment.hpp"

namespace fingertrack {

enum class LinkKind { grow, merge, split, generic };
enum class WeightMode { count, density };

std::string to_string(LinkKind k);
LinkKind link_kind_from_string(const std::string& name);
std::string to_string(WeightMode m);
WeightMode weight_mode_from_string(const std::string& name);

struct TrackingParams {
  double overlap_fraction = 0.75;
  WeightMode weight_mode = WeightMode::count;
  void validate() const;
};

struct BranchCorrespondence {
  int branch_a = 0;
  int branch_b = 0;
  std::size_t count = 0;
  friend bool operator==(const BranchCorrespondence&, const BranchCorrespondence&) = default;
};

struct TrackLink {
  int t = 0;              // timestep of finger a; b lives at t + 1
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double weight = 0.0;    // shared-cell count, or summed min density
  LinkKind kind = LinkKind::generic;
  double ratio = 0.0;     // weight / volume(a)
  std::vector<std::size_t> shared_cells;  // sorted linear indices
  std::vector<BranchCorrespondence> branches;
};

/// One link per finger pair sharing at least one complete-volume cell. In
/// density mode the weight sums min(f_t, f_t1) over shared cells and needs
/// both fields.
std::vector<TrackLink> overlap_links(const FingerLabelField& labels_t, const FingerLabelField& labels_t1, int t = 0,
                                     WeightMode mode = WeightMode::count, const ScalarField* field_t = nullptr,
                                     const ScalarField* field_t1 = nullptr);

/// Finger volume in the unit the link weights use.
double finger_volume(const FingerLabelField& labels, std::uint32_t id, WeightMode mode = WeightMode::count,
                     const ScalarField* field = nullptr);

/// Kinds by precedence: merge (successor in-degree >= 2 and every incoming
/// link carries >= fraction of its predecessor), split (out-degree >= 2 and
/// no outgoing link reaches the fraction), grow (this link reaches it),
/// otherwise generic. `volumes_t[id - 1]` is the volume of finger id.
void classify_links(std::vector<TrackLink>& links, const std::vector<double>& volumes_t, double fraction = 0.75);

/// Splits the link's shared cells by nearest branch polyline on both sides
/// (ties: smaller branch id).
std::vector<BranchCorrespondence> branch_correspondence(const TrackLink& link, const BranchDecomposition& branches_t,
                                                        const BranchDecomposition& branches_t1, const GridSpec& spec);

/// Index of the branch whose polyline is nearest to p.
int nearest_branch(const BranchDecomposition& bd, const Vec3& p);
double distance_to_polyline(const std::vector<Vec3>& polyline, const Vec3& p);

struct TrackingNode {
  std::uint32_t finger_id = 0;
  int complexity = 0;
  double height = 0.0;
  Vec2 centroid_xy;
  double volume = 0.0;
};

struct TrackingGraph {
  std::vector<int> timesteps;
  std::vector<std::vector<TrackingNode>> columns;
  std::vector<TrackLink> links;
};

}  // namespace fingertrack
