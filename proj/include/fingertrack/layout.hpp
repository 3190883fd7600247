#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fingertrack/branch.hpp"
#include "fingertrack/topo.hpp"
#include "fingertrack/track.hpp"

namespace fingertrack {

// ---- crossing minimization ----

/// Edge between position-indexed rows: `top` indexes the fixed row's node
/// list, `bottom` the free row's.
struct WeightedEdge {
  int top = 0;
  int bottom = 0;
  double weight = 1.0;
};

/// Weighted crossings of edges given node positions in each row. Edges
/// (a,b) and (c,d) cross iff (pos(a) - pos(c)) * (pos(b) - pos(d)) < 0 and
/// cost w1 * w2.
double weighted_crossings(const std::vector<WeightedEdge>& edges, const std::vector<int>& top_pos,
                          const std::vector<int>& bottom_pos);

/// One-sided W-GRE greedy. The fixed row order gives top positions
/// (`fixed_pos[i]` is the position of fixed node i); returns a permutation of
/// 0..n_free-1 (left to right). Greedy step: take the remaining node u with
/// the smallest ratio sum_v c(u,v) / sum_v c(v,u) over the other remaining
/// v, where c(u,v) is the weighted crossing cost of u left of v; 0/0 counts
/// as 0. Ties: barycenter of fixed neighbours (isolated nodes use their input
/// index), then index. The greedy order is then refined by adjacent swaps
/// that strictly lower the cost. Falls back to the input order when that
/// crosses less.
std::vector<int> wgre_order(const std::vector<int>& fixed_pos, int n_free, const std::vector<WeightedEdge>& edges);

struct LayeredGraph {
  std::vector<std::vector<double>> centroid_x;  // per row, per node
  std::vector<std::vector<WeightedEdge>> edges; // edges[t]: row t -> row t + 1
};

struct SweepRecord {
  std::string sweep;  // "initial", "down", "up"
  int round = 0;
  double crossings = 0.0;
};

struct IterativeResult {
  std::vector<std::vector<int>> order;  // per row: node indices left to right
  std::vector<SweepRecord> history;
  int rounds = 0;
  bool converged = false;
};

/// Rows start in ascending centroid-x order; then alternating downward and
/// upward W-GRE sweeps until no row changes or max_rounds. A row reorder is
/// kept only when it does not increase the crossings on its two sides.
IterativeResult iterative_minimize(const LayeredGraph& g, int max_rounds = 2);

double total_crossings(const LayeredGraph& g, const std::vector<std::vector<int>>& order);

// ---- glyphs ----

enum class GlyphMode { horizontal, arc };

struct GlyphSegment {
  int branch = 0;
  int slot = 0;
  double x = 0.0;
  double y_top = 0.0;     // 0 = finger root, 1 = deepest point
  double y_bottom = 0.0;
  std::vector<std::pair<double, double>> density;  // (y, normalized density) stops
};

struct GlyphConnector {
  int branch_a = 0;
  int branch_b = 0;
  double x_a = 0.0;
  double x_b = 0.0;
  double y = 0.0;        // attachment depth (horizontal mode)
  double radius = 0.0;   // semicircle above the glyph (arc mode)
  double x_center = 0.0;
};

struct LinearGlyph {
  GlyphMode mode = GlyphMode::horizontal;
  int slot_count = 0;
  std::vector<int> slots;  // per branch id
  std::vector<GlyphSegment> segments;
  std::vector<GlyphConnector> connectors;
  int crossings = 0;
  bool used_baseline = false;
};

/// Connector / segment crossings of a slot assignment.
int glyph_crossings(const BranchDecomposition& bd, const std::vector<int>& slots);

/// Discovery-order slots: the k-th discovered branch takes slot k.
std::vector<int> baseline_slots(const BranchDecomposition& bd);

/// Principal branch at slot 0, then discovery order, each into the free slot
/// causing the fewest connector crossings (ties: smaller slot). The baseline
/// assignment is used instead when it crosses less.
LinearGlyph linear_glyph(const BranchDecomposition& bd, GlyphMode mode = GlyphMode::horizontal);

struct Rect {
  int branch = 0;
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  double area() const { return w * h; }
  double aspect() const;
};

/// Ordered squarified treemap of the weights into [0,width] x [0,height].
/// Rows are closed by remainders, so the rectangles tile exactly.
std::vector<Rect> squarify(const std::vector<double>& weights, double width, double height);
/// Strips along the longer side, same order.
std::vector<Rect> slice_and_dice(const std::vector<double>& weights, double width, double height);

/// Branches in (centroid y, centroid x) order, area proportional to
/// max(1, complexity).
std::vector<Rect> rect_glyph(const BranchDecomposition& bd, double width = 1.0, double height = 1.0);

struct Hull {
  std::vector<Vec2> polygon;  // counter-clockwise, no repeated or collinear vertices
  Vec2 centroid;              // mean of the projected points
  bool degenerate = false;    // a point or a segment
};

Hull convex_hull(const std::vector<Vec2>& points);
/// Hull of the critical nodes projected on the horizontal plane.
Hull hull_projection(const SkeletonGraph& g);

// ---- tracking-graph layout ----

struct LayoutParams {
  int max_rounds = 2;
  std::string color_grow = "#8c510a";
  std::string color_merge = "#2166ac";
  std::string color_split = "#1b7837";
  std::string color_generic = "#878787";
  double min_opacity = 0.05;
  void validate() const;
};

struct FingerView {
  std::uint32_t id = 0;
  const SkeletonGraph* skeleton = nullptr;
  const BranchDecomposition* branches = nullptr;
};

struct FingerGlyph {
  std::uint32_t finger_id = 0;
  double width = 0.0;  // relative, monotone in complexity
  LinearGlyph linear;
  LinearGlyph linear_arc;
  std::vector<Rect> rects;  // unit square
  Hull hull;
};

struct LinkHint {
  double opacity = 1.0;
  std::string color;
};

struct LayoutResult {
  std::vector<std::vector<std::uint32_t>> order;  // finger ids per timestep, left to right
  std::vector<std::vector<FingerGlyph>> glyphs;   // per timestep, in column order
  std::vector<LinkHint> links;                    // parallel to TrackingGraph::links
  std::vector<SweepRecord> history;
  int rounds = 0;
};

LayoutResult compute_layout(const TrackingGraph& tg, const std::vector<std::vector<FingerView>>& fingers,
                            const LayoutParams& params = {});

}  // namespace fingertrack
