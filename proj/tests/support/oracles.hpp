#pragma once

// Independent reference implementations for the tests. Nothing here calls
// the library routine it checks.

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "fingertrack/field.hpp"
#include "fingertrack/layout.hpp"
#include "fingertrack/topo.hpp"

namespace oracle {

using fingertrack::GridSpec;
using fingertrack::ScalarField;
using fingertrack::SkeletonGraph;
using fingertrack::Vec2;
using fingertrack::Vec3;
using fingertrack::WeightedEdge;

// ---- algebra ----

/// Eigenvalues of a symmetric 3x3 matrix in long double, descending by
/// signed value (trigonometric cubic, no iteration).
std::array<long double, 3> symmetric_eigenvalues(const fingertrack::Sym3& a);

/// Residual |A v - l v| / max(1, |A|) for a claimed eigenpair.
double eigen_residual(const fingertrack::Sym3& a, double value, const Vec3& v);

// ---- fields ----

/// Sum of random anisotropic Gaussians plus a low-order polynomial: smooth,
/// with nonzero Hessians everywhere.
ScalarField random_smooth_field(std::uint64_t seed, std::array<int, 3> dims, double spacing = 1.0);

/// Labels 26- (or 6-) connected components of `member` by breadth-first
/// search; 0 = not a member; ids in order of first visit in linear order.
std::vector<std::uint32_t> flood_components(const GridSpec& spec, const std::vector<char>& member, bool full26,
                                            std::uint32_t* count = nullptr);

/// Follows the strictly steepest face neighbour from v until it reaches a
/// labelled core voxel (returns its label) or a local maximum (returns 0).
std::uint32_t steepest_ascent_label(const ScalarField& f, const std::vector<std::uint32_t>& core_labels,
                                    std::size_t v);

/// First Betti number of the union of closed voxel cubes, from the Euler
/// characteristic of the cubical complex: b1 = b0 + b2 - chi.
int voxel_betti1(const GridSpec& spec, const std::vector<std::size_t>& voxels);

// ---- graphs ----

struct PathChoice {
  std::vector<int> nodes;
  double extent = 0.0;
  double length = 0.0;
};

/// Best downward path by exhaustive enumeration: extent, then length, then
/// smaller smallest node id, then lexicographic node sequence.
PathChoice exhaustive_longest_path(const SkeletonGraph& g);

/// Random connected skeleton with n nodes: a random spanning tree oriented
/// by height, optionally with extra arcs forming cycles.
SkeletonGraph random_skeleton(std::mt19937_64& rng, int n_nodes, int extra_arcs);

/// Betti-1 of the graph by breadth-first components: arcs - nodes + b0.
int graph_betti1(const SkeletonGraph& g);

// ---- layout ----

/// Minimum weighted crossings over all permutations of the free row.
double brute_min_crossings(const std::vector<int>& fixed_pos, int n_free, const std::vector<WeightedEdge>& edges);

/// Direct pairwise crossing count.
double crossings(const std::vector<WeightedEdge>& edges, const std::vector<int>& top_pos,
                 const std::vector<int>& bottom_pos);

/// Points that are vertices of the convex hull: not inside or on the
/// boundary of any triangle of other points, nor on a segment between two.
std::vector<Vec2> brute_hull_vertices(const std::vector<Vec2>& points);

}  // namespace oracle
