#include "fingertrack/layout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "fingertrack/error.hpp"

namespace fingertrack {

double weighted_crossings(const std::vector<WeightedEdge>& edges, const std::vector<int>& top_pos,
                          const std::vector<int>& bottom_pos) {
  double acc = 0.0;
  for (std::size_t i = 0; i < edges.size(); ++i)
    for (std::size_t j = i + 1; j < edges.size(); ++j) {
      const long dt = top_pos[edges[i].top] - top_pos[edges[j].top];
      const long db = bottom_pos[edges[i].bottom] - bottom_pos[edges[j].bottom];
      if (dt * db < 0) acc += edges[i].weight * edges[j].weight;
    }
  return acc;
}

namespace {

// a/b compared to c/d for non-negative terms, with 0/0 = 0 and x/0 = inf.
int compare_ratio(double a, double b, double c, double d) {
  const bool inf1 = a > 0.0 && b == 0.0;
  const bool inf2 = c > 0.0 && d == 0.0;
  if (inf1 || inf2) return inf1 == inf2 ? 0 : (inf1 ? 1 : -1);
  const double l = a == 0.0 ? 0.0 : a * d;
  const double r = c == 0.0 ? 0.0 : c * b;
  // With a zero numerator the ratio is 0 whatever the denominator.
  if (a == 0.0 && c == 0.0) return 0;
  if (a == 0.0) return -1;
  if (c == 0.0) return 1;
  return l < r ? -1 : (l > r ? 1 : 0);
}

}  // namespace

std::vector<int> wgre_order(const std::vector<int>& fixed_pos, int n_free, const std::vector<WeightedEdge>& edges) {
  const auto n = static_cast<std::size_t>(n_free);
  std::vector<std::vector<const WeightedEdge*>> by_node(n);
  for (const auto& e : edges) by_node[e.bottom].push_back(&e);
  // c[u][v]: cost of u placed left of v.
  std::vector<std::vector<double>> c(n, std::vector<double>(n, 0.0));
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v) continue;
      double acc = 0.0;
      for (const auto* eu : by_node[u])
        for (const auto* ev : by_node[v])
          if (fixed_pos[eu->top] > fixed_pos[ev->top]) acc += eu->weight * ev->weight;
      c[u][v] = acc;
    }
  std::vector<double> bary(n);
  for (std::size_t u = 0; u < n; ++u) {
    double sw = 0.0, sp = 0.0;
    for (const auto* e : by_node[u]) {
      sw += e->weight;
      sp += e->weight * fixed_pos[e->top];
    }
    bary[u] = sw > 0.0 ? sp / sw : static_cast<double>(u);
  }

  std::vector<int> remaining(n);
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<int> out;
  out.reserve(n);
  while (!remaining.empty()) {
    std::size_t best = 0;
    double best_num = 0.0, best_den = 0.0;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      const int u = remaining[i];
      double num = 0.0, den = 0.0;
      for (int v : remaining) {
        if (v == u) continue;
        num += c[u][v];
        den += c[v][u];
      }
      if (i == 0) {
        best_num = num;
        best_den = den;
        continue;
      }
      const int cmp = compare_ratio(num, den, best_num, best_den);
      const int b = remaining[best];
      if (cmp < 0 || (cmp == 0 && (bary[u] < bary[b] || (bary[u] == bary[b] && u < b)))) {
        best = i;
        best_num = num;
        best_den = den;
      }
    }
    out.push_back(remaining[best]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }

  // Adjacent exchanges, each strictly lowering the cost, until none applies.
  for (bool swapped = true; swapped;) {
    swapped = false;
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (c[out[i + 1]][out[i]] < c[out[i]][out[i + 1]]) {
        std::swap(out[i], out[i + 1]);
        swapped = true;
      }
  }

  std::vector<int> identity(n), pos(n);
  std::iota(identity.begin(), identity.end(), 0);
  for (std::size_t i = 0; i < n; ++i) pos[out[i]] = static_cast<int>(i);
  if (weighted_crossings(edges, fixed_pos, identity) < weighted_crossings(edges, fixed_pos, pos)) return identity;
  return out;
}

namespace {

std::vector<int> positions(const std::vector<int>& order) {
  std::vector<int> pos(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
  return pos;
}

// Crossings between rows t and t + 1.
double pair_crossings(const LayeredGraph& g, const std::vector<std::vector<int>>& order, std::size_t t) {
  return weighted_crossings(g.edges[t], positions(order[t]), positions(order[t + 1]));
}

double local_crossings(const LayeredGraph& g, const std::vector<std::vector<int>>& order, std::size_t row) {
  double acc = 0.0;
  if (row > 0) acc += pair_crossings(g, order, row - 1);
  if (row + 1 < order.size()) acc += pair_crossings(g, order, row);
  return acc;
}

std::vector<WeightedEdge> flipped(const std::vector<WeightedEdge>& edges) {
  std::vector<WeightedEdge> out(edges);
  for (auto& e : out) std::swap(e.top, e.bottom);
  return out;
}

}  // namespace

double total_crossings(const LayeredGraph& g, const std::vector<std::vector<int>>& order) {
  double acc = 0.0;
  for (std::size_t t = 0; t + 1 < order.size(); ++t) acc += pair_crossings(g, order, t);
  return acc;
}

IterativeResult iterative_minimize(const LayeredGraph& g, int max_rounds) {
  const std::size_t rows = g.centroid_x.size();
  if (g.edges.size() + 1 < rows) throw ValidationError("layered graph needs one edge list per row pair");
  IterativeResult res;
  res.order.resize(rows);
  for (std::size_t t = 0; t < rows; ++t) {
    auto& o = res.order[t];
    o.resize(g.centroid_x[t].size());
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return g.centroid_x[t][a] < g.centroid_x[t][b]; });
  }
  res.history.push_back({"initial", 0, total_crossings(g, res.order)});

  // Reorders `row` against its neighbour; true if the row changed.
  auto sweep_row = [&](std::size_t row, std::size_t fixed, const std::vector<WeightedEdge>& edges) {
    const auto& cur = res.order[row];
    // wgre_order works on free-row positions of the current order, so free
    // node p in its input is cur[p].
    const std::vector<int> cur_pos = positions(cur);
    std::vector<WeightedEdge> local(edges);
    for (auto& e : local) e.bottom = cur_pos[e.bottom];
    const std::vector<int> perm = wgre_order(positions(res.order[fixed]), static_cast<int>(cur.size()), local);
    std::vector<int> next(cur.size());
    for (std::size_t i = 0; i < perm.size(); ++i) next[i] = cur[perm[i]];
    if (next == cur) return false;
    const double before = local_crossings(g, res.order, row);
    std::vector<int> saved = res.order[row];
    res.order[row] = next;
    if (local_crossings(g, res.order, row) > before) {
      res.order[row] = std::move(saved);
      return false;
    }
    return true;
  };

  for (int round = 1; round <= max_rounds; ++round) {
    bool changed = false;
    for (std::size_t t = 1; t < rows; ++t) changed |= sweep_row(t, t - 1, g.edges[t - 1]);
    res.history.push_back({"down", round, total_crossings(g, res.order)});
    for (std::size_t t = rows >= 2 ? rows - 1 : 0; t-- > 0;) changed |= sweep_row(t, t + 1, flipped(g.edges[t]));
    res.history.push_back({"up", round, total_crossings(g, res.order)});
    res.rounds = round;
    if (!changed) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// ---- glyphs ----

namespace {

struct Span {
  double top = 0.0;     // normalized: 0 at the finger root
  double bottom = 0.0;  // 1 at the deepest point
};

struct Frame {
  double hi = 0.0;
  double extent = 0.0;
  double y(double height) const { return extent > 0.0 ? (hi - height) / extent : 0.0; }
};

Frame frame_of(const BranchDecomposition& bd) {
  Frame f;
  if (bd.branches.empty()) return f;
  double hi = bd.branches.front().top_height, lo = bd.branches.front().bottom_height;
  for (const auto& b : bd.branches) {
    hi = std::max(hi, b.top_height);
    lo = std::min(lo, b.bottom_height);
  }
  f.hi = hi;
  f.extent = hi - lo;
  return f;
}

// Crossings among the placed branches only (slot < 0 means unplaced).
int crossings_of(const BranchDecomposition& bd, const std::vector<int>& slots, const Frame& f) {
  int count = 0;
  for (const auto& c : bd.connections) {
    const int sa = slots[c.branch_a], sb = slots[c.branch_b];
    if (sa < 0 || sb < 0) continue;
    const int lo = std::min(sa, sb), hi = std::max(sa, sb);
    const double y = f.y(c.height);
    for (const auto& b : bd.branches) {
      const int s = slots[b.id];
      if (s <= lo || s >= hi) continue;
      if (y >= f.y(b.top_height) && y <= f.y(b.bottom_height)) ++count;
    }
  }
  return count;
}

}  // namespace

int glyph_crossings(const BranchDecomposition& bd, const std::vector<int>& slots) {
  return crossings_of(bd, slots, frame_of(bd));
}

std::vector<int> baseline_slots(const BranchDecomposition& bd) {
  std::vector<int> slots(bd.branches.size(), -1);
  int next = 0;
  for (int b : bd.discovery_order) slots[b] = next++;
  for (auto& s : slots)
    if (s < 0) s = next++;
  return slots;
}

LinearGlyph linear_glyph(const BranchDecomposition& bd, GlyphMode mode) {
  LinearGlyph g;
  g.mode = mode;
  const int n = static_cast<int>(bd.branches.size());
  g.slot_count = n;
  if (n == 0) return g;
  const Frame f = frame_of(bd);

  std::vector<int> order = bd.discovery_order;
  for (int b = 0; b < n; ++b)
    if (std::find(order.begin(), order.end(), b) == order.end()) order.push_back(b);
  std::vector<int> slots(static_cast<std::size_t>(n), -1);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  slots[bd.principal] = 0;
  used[0] = 1;
  for (int b : order) {
    if (slots[b] >= 0) continue;
    int best = -1, best_cost = 0;
    for (int s = 0; s < n; ++s) {
      if (used[s]) continue;
      slots[b] = s;
      const int cost = crossings_of(bd, slots, f);
      if (best < 0 || cost < best_cost) {
        best = s;
        best_cost = cost;
      }
    }
    slots[b] = best;
    used[best] = 1;
  }
  g.crossings = crossings_of(bd, slots, f);
  const std::vector<int> base = baseline_slots(bd);
  const int base_crossings = crossings_of(bd, base, f);
  if (base_crossings < g.crossings) {
    slots = base;
    g.crossings = base_crossings;
    g.used_baseline = true;
  }
  g.slots = slots;

  auto x_of = [&](int slot) { return (slot + 0.5) / n; };
  double max_density = 0.0;
  for (const auto& b : bd.branches) max_density = std::max(max_density, b.mean_density);
  for (const auto& b : bd.branches) {
    GlyphSegment seg;
    seg.branch = b.id;
    seg.slot = slots[b.id];
    seg.x = x_of(seg.slot);
    seg.y_top = f.y(b.top_height);
    seg.y_bottom = f.y(b.bottom_height);
    const double d = max_density > 0.0 ? b.mean_density / max_density : 0.0;
    seg.density = {{seg.y_top, d}, {seg.y_bottom, d}};
    g.segments.push_back(std::move(seg));
  }
  for (const auto& c : bd.connections) {
    GlyphConnector k;
    k.branch_a = c.branch_a;
    k.branch_b = c.branch_b;
    k.x_a = x_of(slots[c.branch_a]);
    k.x_b = x_of(slots[c.branch_b]);
    k.y = f.y(c.height);
    if (mode == GlyphMode::arc) {
      k.x_center = 0.5 * (k.x_a + k.x_b);
      k.radius = 0.5 * std::abs(k.x_b - k.x_a);
    }
    g.connectors.push_back(k);
  }
  return g;
}

double Rect::aspect() const {
  if (w <= 0.0 || h <= 0.0) return std::numeric_limits<double>::infinity();
  return std::max(w / h, h / w);
}

namespace {

double worst(const std::vector<double>& row, double side) {
  double sum = 0.0, mx = 0.0, mn = std::numeric_limits<double>::infinity();
  for (double a : row) {
    sum += a;
    mx = std::max(mx, a);
    mn = std::min(mn, a);
  }
  const double s2 = sum * sum, w2 = side * side;
  return std::max(w2 * mx / s2, s2 / (w2 * mn));
}

// Lays `areas[first..last)` as one strip along the shorter side of the free
// rectangle and shrinks it. `close` makes the strip take all remaining space.
void lay_strip(const std::vector<double>& areas, std::size_t first, std::size_t last, double& x, double& y, double& w,
               double& h, bool close, std::vector<Rect>& out) {
  double sum = 0.0;
  for (std::size_t i = first; i < last; ++i) sum += areas[i];
  const bool vertical = w >= h;  // strip is a column on the left
  const double side = vertical ? h : w;
  double thick = close ? (vertical ? w : h) : sum / side;
  if (!close) thick = std::min(thick, vertical ? w : h);
  double offset = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const double len = i + 1 == last ? side - offset : areas[i] / thick;
    Rect r;
    if (vertical)
      r = {0, x, y + offset, thick, len};
    else
      r = {0, x + offset, y, len, thick};
    out.push_back(r);
    offset += len;
  }
  if (vertical) {
    x += thick;
    w -= thick;
  } else {
    y += thick;
    h -= thick;
  }
}

std::vector<double> areas_of(const std::vector<double>& weights, double width, double height) {
  double total = 0.0;
  for (double v : weights) {
    if (!(v > 0.0)) throw ValidationError("treemap weights must be positive");
    total += v;
  }
  std::vector<double> areas;
  for (double v : weights) areas.push_back(v / total * width * height);
  return areas;
}

}  // namespace

std::vector<Rect> squarify(const std::vector<double>& weights, double width, double height) {
  std::vector<Rect> out;
  if (weights.empty()) return out;
  const std::vector<double> areas = areas_of(weights, width, height);
  double x = 0.0, y = 0.0, w = width, h = height;
  std::size_t first = 0;
  while (first < areas.size()) {
    const double side = std::min(w, h);
    std::vector<double> row{areas[first]};
    std::size_t last = first + 1;
    while (last < areas.size()) {
      std::vector<double> grown = row;
      grown.push_back(areas[last]);
      if (worst(grown, side) > worst(row, side)) break;
      row = std::move(grown);
      ++last;
    }
    lay_strip(areas, first, last, x, y, w, h, last == areas.size(), out);
    first = last;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].branch = static_cast<int>(i);
  return out;
}

std::vector<Rect> slice_and_dice(const std::vector<double>& weights, double width, double height) {
  std::vector<Rect> out;
  if (weights.empty()) return out;
  const std::vector<double> areas = areas_of(weights, width, height);
  const bool along_x = width >= height;
  double offset = 0.0;
  const double span = along_x ? width : height;
  const double other = along_x ? height : width;
  for (std::size_t i = 0; i < areas.size(); ++i) {
    const double len = i + 1 == areas.size() ? span - offset : areas[i] / other;
    Rect r;
    if (along_x)
      r = {static_cast<int>(i), offset, 0.0, len, height};
    else
      r = {static_cast<int>(i), 0.0, offset, width, len};
    out.push_back(r);
    offset += len;
  }
  return out;
}

std::vector<Rect> rect_glyph(const BranchDecomposition& bd, double width, double height) {
  std::vector<int> order(bd.branches.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ca = bd.branches[a].centroid_xy;
    const auto& cb = bd.branches[b].centroid_xy;
    if (ca.y != cb.y) return ca.y < cb.y;
    return ca.x < cb.x;
  });
  std::vector<double> weights;
  for (int b : order) weights.push_back(std::max(1, bd.branches[b].complexity));
  std::vector<Rect> rects = squarify(weights, width, height);
  for (std::size_t i = 0; i < rects.size(); ++i) rects[i].branch = bd.branches[order[i]].id;
  return rects;
}

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

}  // namespace

Hull convex_hull(const std::vector<Vec2>& points) {
  Hull h;
  if (points.empty()) {
    h.degenerate = true;
    return h;
  }
  for (const auto& p : points) {
    h.centroid.x += p.x;
    h.centroid.y += p.y;
  }
  h.centroid.x /= static_cast<double>(points.size());
  h.centroid.y /= static_cast<double>(points.size());

  std::vector<Vec2> pts(points);
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) {
    h.polygon = pts;
    h.degenerate = true;
    return h;
  }
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  h.polygon = std::move(hull);
  h.degenerate = h.polygon.size() < 3;
  return h;
}

Hull hull_projection(const SkeletonGraph& g) {
  const int ha = g.height_axis;
  const int pa = ha == 0 ? 1 : 0;
  const int pb = ha == 2 ? 1 : 2;
  std::vector<Vec2> pts;
  for (const auto& n : g.nodes)
    if (n.kind != NodeKind::regular) pts.push_back({n.position[pa], n.position[pb]});
  return convex_hull(pts);
}

// ---- tracking-graph layout ----

void LayoutParams::validate() const {
  if (max_rounds < 1) throw ValidationError("layout.max_rounds must be >= 1");
  if (!(min_opacity >= 0.0 && min_opacity <= 1.0)) throw ValidationError("layout.min_opacity must lie in [0, 1]");
}

LayoutResult compute_layout(const TrackingGraph& tg, const std::vector<std::vector<FingerView>>& fingers,
                            const LayoutParams& params) {
  params.validate();
  const std::size_t rows = tg.columns.size();
  if (fingers.size() != rows) throw ValidationError("finger views do not match tracking columns");
  LayeredGraph lg;
  std::vector<std::map<std::uint32_t, int>> index(rows);
  for (std::size_t t = 0; t < rows; ++t) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < tg.columns[t].size(); ++i) {
      index[t][tg.columns[t][i].finger_id] = static_cast<int>(i);
      xs.push_back(tg.columns[t][i].centroid_xy.x);
    }
    lg.centroid_x.push_back(std::move(xs));
  }
  lg.edges.resize(rows > 0 ? rows - 1 : 0);
  for (const auto& l : tg.links) {
    const auto t = static_cast<std::size_t>(l.t);
    if (t + 1 >= rows) throw ValidationError("link beyond the last tracking column");
    lg.edges[t].push_back({index[t].at(l.a), index[t + 1].at(l.b), l.weight});
  }

  const IterativeResult it = iterative_minimize(lg, params.max_rounds);
  LayoutResult out;
  out.history = it.history;
  out.rounds = it.rounds;

  int max_complexity = 0;
  for (const auto& col : tg.columns)
    for (const auto& n : col) max_complexity = std::max(max_complexity, n.complexity);

  for (std::size_t t = 0; t < rows; ++t) {
    std::vector<std::uint32_t> ids;
    std::vector<FingerGlyph> glyphs;
    std::map<std::uint32_t, const FingerView*> views;
    for (const auto& v : fingers[t]) views[v.id] = &v;
    for (int i : it.order[t]) {
      const TrackingNode& node = tg.columns[t][i];
      ids.push_back(node.finger_id);
      FingerGlyph fg;
      fg.finger_id = node.finger_id;
      fg.width = max_complexity > 0 ? 0.25 + 0.75 * node.complexity / max_complexity : 1.0;
      const auto found = views.find(node.finger_id);
      if (found == views.end() || !found->second->branches || !found->second->skeleton)
        throw ValidationError("tracking node without finger geometry");
      fg.linear = linear_glyph(*found->second->branches, GlyphMode::horizontal);
      fg.linear_arc = linear_glyph(*found->second->branches, GlyphMode::arc);
      fg.rects = rect_glyph(*found->second->branches);
      fg.hull = hull_projection(*found->second->skeleton);
      glyphs.push_back(std::move(fg));
    }
    out.order.push_back(std::move(ids));
    out.glyphs.push_back(std::move(glyphs));
  }

  std::map<int, double> max_weight;
  for (const auto& l : tg.links) max_weight[l.t] = std::max(max_weight[l.t], l.weight);
  for (const auto& l : tg.links) {
    LinkHint h;
    const double m = max_weight[l.t];
    h.opacity = std::max(params.min_opacity, m > 0.0 ? l.weight / m : 1.0);
    switch (l.kind) {
      case LinkKind::grow: h.color = params.color_grow; break;
      case LinkKind::merge: h.color = params.color_merge; break;
      case LinkKind::split: h.color = params.color_split; break;
      case LinkKind::generic: h.color = params.color_generic; break;
    }
    out.links.push_back(h);
  }
  return out;
}

}  // namespace fingertrack
