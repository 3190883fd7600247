#include "fingertrack/branch.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "fingertrack/error.hpp"

namespace fingertrack {

namespace {

struct Candidate {
  std::vector<int> nodes;
  std::vector<int> arcs;
  double length = 0.0;
  int min_node = 0;
};

// True if a beats b among paths of equal extent.
bool better(const Candidate& a, const Candidate& b) {
  if (a.length != b.length) return a.length > b.length;
  if (a.min_node != b.min_node) return a.min_node < b.min_node;
  return a.nodes < b.nodes;
}

}  // namespace

DownwardPath longest_downward_path(const SkeletonGraph& g, const std::vector<char>& available) {
  const std::size_t n = g.nodes.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return g.nodes[a].height > g.nodes[b].height; });
  std::vector<std::vector<int>> out_arcs(n);
  for (std::size_t a = 0; a < g.arcs.size(); ++a)
    if (available[a]) out_arcs[g.arcs[a].u].push_back(static_cast<int>(a));

  DownwardPath best;
  bool have = false;
  Candidate best_c;

  for (std::size_t si = 0; si < n; ++si) {
    const int s = order[si];
    if (out_arcs[s].empty()) continue;
    std::vector<Candidate> at(n);
    std::vector<char> reached(n, 0);
    at[s].nodes = {s};
    at[s].min_node = s;
    reached[s] = 1;
    for (std::size_t r = si; r < n; ++r) {
      const int u = order[r];
      if (!reached[u]) continue;
      for (int a : out_arcs[u]) {
        const int v = g.arcs[a].v;
        Candidate c = at[u];
        c.nodes.push_back(v);
        c.arcs.push_back(a);
        c.length += g.arcs[a].length();
        c.min_node = std::min(c.min_node, v);
        if (!reached[v] || better(c, at[v])) {
          at[v] = std::move(c);
          reached[v] = 1;
        }
      }
    }
    for (std::size_t e = 0; e < n; ++e) {
      if (!reached[e] || static_cast<int>(e) == s) continue;
      const double extent = g.nodes[s].height - g.nodes[e].height;
      if (!have || extent > best.extent || (extent == best.extent && better(at[e], best_c))) {
        have = true;
        best_c = at[e];
        best.extent = extent;
      }
    }
  }
  if (!have) return {};
  best.nodes = best_c.nodes;
  best.arcs = best_c.arcs;
  best.length = best_c.length;
  return best;
}

namespace {

Branch make_branch(const SkeletonGraph& g, int id, std::vector<int> nodes, std::vector<int> arcs) {
  const int ha = g.height_axis;
  const int pa = ha == 0 ? 1 : 0;
  const int pb = ha == 2 ? 1 : 2;
  Branch b;
  b.id = id;
  b.nodes = std::move(nodes);
  b.arcs = std::move(arcs);
  double dens = 0.0, weight = 0.0;
  for (int a : b.arcs) {
    const auto& arc = g.arcs[a];
    b.length += arc.length();
    dens += arc.mean_density * arc.weight;
    weight += arc.weight;
    b.polyline.insert(b.polyline.end(), arc.polyline.begin() + (b.polyline.empty() ? 0 : 1), arc.polyline.end());
  }
  if (b.polyline.empty()) b.polyline.push_back(g.nodes[b.nodes.front()].position);
  b.top_height = g.nodes[b.nodes.front()].height;
  b.bottom_height = g.nodes[b.nodes.back()].height;
  b.persistence = b.top_height - b.bottom_height;
  b.mean_density = weight > 0.0 ? dens / weight : 0.0;
  for (int n : b.nodes) b.complexity += g.nodes[n].kind != NodeKind::regular;
  for (const auto& p : b.polyline) {
    b.centroid_xy.x += p[pa];
    b.centroid_xy.y += p[pb];
  }
  b.centroid_xy.x /= static_cast<double>(b.polyline.size());
  b.centroid_xy.y /= static_cast<double>(b.polyline.size());
  return b;
}

}  // namespace

BranchDecomposition extract_branches(const SkeletonGraph& g) {
  if (g.nodes.empty()) throw ValidationError("branch extraction on an empty skeleton");
  BranchDecomposition bd;
  std::vector<char> available(g.arcs.size(), 1);
  std::vector<char> covered(g.nodes.size(), 0);
  for (;;) {
    DownwardPath p = longest_downward_path(g, available);
    if (p.arcs.empty()) break;
    for (int a : p.arcs) available[a] = 0;
    for (int n : p.nodes) covered[n] = 1;
    bd.branches.push_back(make_branch(g, static_cast<int>(bd.branches.size()), std::move(p.nodes), std::move(p.arcs)));
  }
  for (std::size_t n = 0; n < g.nodes.size(); ++n)
    if (!covered[n]) bd.branches.push_back(make_branch(g, static_cast<int>(bd.branches.size()), {static_cast<int>(n)}, {}));

  bd.principal = 0;
  std::vector<std::vector<int>> sorted_nodes;
  for (const auto& b : bd.branches) {
    auto s = b.nodes;
    std::sort(s.begin(), s.end());
    sorted_nodes.push_back(std::move(s));
  }
  std::vector<char> marked(bd.branches.size(), 0);
  std::deque<int> fifo{0};
  marked[0] = 1;
  while (!fifo.empty()) {
    const int b = fifo.front();
    fifo.pop_front();
    bd.discovery_order.push_back(b);
    for (std::size_t c = 0; c < bd.branches.size(); ++c) {
      if (marked[c]) continue;
      std::vector<int> shared;
      std::set_intersection(sorted_nodes[b].begin(), sorted_nodes[b].end(), sorted_nodes[c].begin(),
                            sorted_nodes[c].end(), std::back_inserter(shared));
      if (shared.empty()) continue;
      for (int node : shared) bd.connections.push_back({b, static_cast<int>(c), node, g.nodes[node].height});
      marked[c] = 1;
      fifo.push_back(static_cast<int>(c));
    }
  }
  return bd;
}

double branch_height(const Branch& b) { return b.persistence; }

}  // namespace fingertrack
