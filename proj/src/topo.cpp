#include "fingertrack/topo.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "fingertrack/error.hpp"

namespace fingertrack {

std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::root: return "root";
    case NodeKind::tip: return "tip";
    case NodeKind::saddle_merge: return "saddle_merge";
    case NodeKind::saddle_split: return "saddle_split";
    case NodeKind::regular: return "regular";
  }
  return "regular";
}

void TrimParams::validate() const {
  if (!(min_branch_persistence >= 0.0) || !(min_cycle_persistence >= 0.0))
    throw ValidationError("trim thresholds must be >= 0");
}

double SkeletonArc::length() const {
  double acc = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i) acc += norm(polyline[i] - polyline[i - 1]);
  return acc;
}

namespace {

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

int SkeletonGraph::component_count() const {
  if (nodes.empty()) return 0;
  DisjointSet ds(nodes.size());
  for (const auto& a : arcs) ds.unite(a.u, a.v);
  int c = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) c += ds.find(static_cast<int>(i)) == static_cast<int>(i);
  return c;
}

int SkeletonGraph::cycle_count() const {
  return static_cast<int>(arcs.size()) - static_cast<int>(nodes.size()) + component_count();
}

void classify_nodes(SkeletonGraph& g) {
  std::vector<int> up(g.nodes.size(), 0), down(g.nodes.size(), 0);
  for (const auto& a : g.arcs) {
    ++down[a.u];
    ++up[a.v];
  }
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    NodeKind k = NodeKind::regular;
    if (up[i] == 0)
      k = NodeKind::root;
    else if (down[i] == 0)
      k = NodeKind::tip;
    else if (up[i] >= 2)
      k = NodeKind::saddle_merge;
    else if (down[i] >= 2)
      k = NodeKind::saddle_split;
    g.nodes[i].kind = k;
  }
}

SkeletonGraph build_reeb_skeleton(std::span<const std::size_t> core, const GridSpec& spec, const ScalarField* field,
                                  int finger_id) {
  if (core.empty()) throw ValidationError("skeleton of an empty core");
  if (field && !(field->spec() == spec)) throw ValidationError("field and core grids differ");
  const int ha = spec.height_axis;
  const int pa = ha == 0 ? 1 : 0;
  const int pb = ha == 2 ? 1 : 2;

  std::vector<std::size_t> cells(core.begin(), core.end());
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  std::unordered_map<std::size_t, int> slot;
  slot.reserve(cells.size() * 2);
  for (std::size_t n = 0; n < cells.size(); ++n) slot.emplace(cells[n], static_cast<int>(n));
  auto lookup = [&](const VoxelId& w) -> int {
    if (!spec.contains(w)) return -1;
    const auto it = slot.find(spec.linear(w));
    return it == slot.end() ? -1 : it->second;
  };

  // 26-connectivity of the whole core.
  {
    DisjointSet ds(cells.size());
    for (std::size_t n = 0; n < cells.size(); ++n) {
      const VoxelId v = spec.voxel(cells[n]);
      for (int dk = -1; dk <= 1; ++dk)
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            const int m = lookup({v.i + di, v.j + dj, v.k + dk});
            if (m >= 0) ds.unite(static_cast<int>(n), m);
          }
    }
    for (std::size_t n = 0; n < cells.size(); ++n)
      if (ds.find(static_cast<int>(n)) != 0) throw ValidationError("skeleton of a disconnected core");
  }

  // In-layer 8-connected components.
  DisjointSet layer_ds(cells.size());
  for (std::size_t n = 0; n < cells.size(); ++n) {
    const VoxelId v = spec.voxel(cells[n]);
    for (int da = -1; da <= 1; ++da)
      for (int db = -1; db <= 1; ++db) {
        VoxelId w = v;
        w[pa] += da;
        w[pb] += db;
        const int m = lookup(w);
        if (m >= 0) layer_ds.unite(static_cast<int>(n), m);
      }
  }

  struct RawNode {
    int layer = 0;        // layer index, or lower layer index of an interface
    bool interface = false;
    double height = 0.0;
    Vec3 sum;             // world position sum
    double count = 0.0;   // voxels
    double density = 0.0; // density sum
  };
  std::vector<RawNode> raw;
  std::vector<int> comp_of(cells.size(), -1);
  for (std::size_t n = 0; n < cells.size(); ++n) {
    const int rep = layer_ds.find(static_cast<int>(n));
    if (comp_of[rep] < 0) {
      comp_of[rep] = static_cast<int>(raw.size());
      RawNode r;
      r.layer = spec.voxel(cells[n])[ha];
      r.height = spec.height_of_layer(r.layer);
      raw.push_back(r);
    }
    const int c = comp_of[rep];
    comp_of[n] = c;
    raw[c].sum = raw[c].sum + spec.world(spec.voxel(cells[n]));
    raw[c].count += 1.0;
    raw[c].density += field ? field->at(cells[n]) : 1.0;
  }
  const int n_comp = static_cast<int>(raw.size());

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_comp));
  auto link = [&](int a, int b) {
    adj.resize(std::max(adj.size(), static_cast<std::size_t>(std::max(a, b)) + 1));
    adj[a].push_back(b);
    adj[b].push_back(a);
  };
  // Interfaces between index layers L and L+1: connected groups of the
  // bipartite component adjacency, formed per layer pair so that groups do
  // not chain through a shared layer.
  {
    std::map<int, std::vector<std::pair<int, int>>> pairs_by_layer;
    for (std::size_t n = 0; n < cells.size(); ++n) {
      const VoxelId v = spec.voxel(cells[n]);
      for (int da = -1; da <= 1; ++da)
        for (int db = -1; db <= 1; ++db) {
          VoxelId w = v;
          w[ha] += 1;
          w[pa] += da;
          w[pb] += db;
          const int m = lookup(w);
          if (m >= 0) pairs_by_layer[v[ha]].push_back({comp_of[n], comp_of[m]});
        }
    }
    for (auto& [layer, pairs] : pairs_by_layer) {
      std::sort(pairs.begin(), pairs.end());
      pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
      DisjointSet ds(static_cast<std::size_t>(n_comp));
      for (const auto& [a, b] : pairs) ds.unite(a, b);
      std::map<int, std::vector<int>> members;
      for (const auto& [a, b] : pairs) {
        members[ds.find(a)].push_back(a);
        members[ds.find(a)].push_back(b);
      }
      for (auto& [rep, mem] : members) {
        std::sort(mem.begin(), mem.end());
        mem.erase(std::unique(mem.begin(), mem.end()), mem.end());
        RawNode r;
        r.layer = layer;
        r.interface = true;
        r.height = 0.5 * (spec.height_of_layer(layer) + spec.height_of_layer(layer + 1));
        for (int c : mem) {
          r.sum = r.sum + raw[c].sum;
          r.count += raw[c].count;
        }
        const int id = static_cast<int>(raw.size());
        raw.push_back(r);
        for (int c : mem) link(id, c);
      }
    }
  }
  adj.resize(raw.size());

  std::vector<Vec3> pos(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    pos[i] = (1.0 / raw[i].count) * raw[i].sum;
    pos[i][ha] = raw[i].height;
  }
  std::vector<std::vector<int>> up(raw.size()), down(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    for (int j : adj[i]) (raw[j].height > raw[i].height ? up : down)[i].push_back(j);
    std::sort(up[i].begin(), up[i].end());
    std::sort(down[i].begin(), down[i].end());
  }
  auto critical = [&](std::size_t i) { return !(up[i].size() == 1 && down[i].size() == 1); };

  std::vector<int> crit;
  for (std::size_t i = 0; i < raw.size(); ++i)
    if (critical(i)) crit.push_back(static_cast<int>(i));
  std::stable_sort(crit.begin(), crit.end(), [&](int a, int b) { return raw[a].height > raw[b].height; });
  std::vector<int> new_id(raw.size(), -1);

  SkeletonGraph g;
  g.finger_id = finger_id;
  g.height_axis = ha;
  for (int c : crit) {
    new_id[c] = static_cast<int>(g.nodes.size());
    SkeletonNode node;
    node.id = new_id[c];
    node.position = pos[c];
    node.height = raw[c].height;
    g.nodes.push_back(node);
  }
  for (int c : crit) {
    for (int start : down[c]) {
      SkeletonArc arc;
      arc.u = new_id[c];
      arc.polyline.push_back(pos[c]);
      double dens = 0.0, weight = 0.0;
      int cur = start;
      while (!critical(static_cast<std::size_t>(cur))) {
        arc.polyline.push_back(pos[cur]);
        if (!raw[cur].interface) {
          dens += raw[cur].density;
          weight += raw[cur].count;
        }
        cur = down[cur].front();
      }
      arc.polyline.push_back(pos[cur]);
      arc.v = new_id[cur];
      if (weight == 0.0) {
        for (int end : {c, cur})
          if (!raw[end].interface) {
            dens += raw[end].density;
            weight += raw[end].count;
          }
      }
      if (weight == 0.0) {
        // Two adjacent interfaces cannot be linked directly, so this only
        // guards against degenerate input.
        weight = 1.0;
      }
      arc.mean_density = dens / weight;
      arc.weight = weight;
      arc.id = static_cast<int>(g.arcs.size());
      arc.sources = {arc.id};
      g.arcs.push_back(std::move(arc));
    }
  }
  classify_nodes(g);
  return g;
}

namespace {

struct WorkGraph {
  std::vector<SkeletonNode> nodes;
  std::vector<SkeletonArc> arcs;
  std::vector<char> node_alive;
  std::vector<char> arc_alive;
  int root = -1;
  int tip = -1;

  int degree(int n) const {
    int d = 0;
    for (std::size_t a = 0; a < arcs.size(); ++a)
      if (arc_alive[a] && (arcs[a].u == n || arcs[a].v == n)) ++d;
    return d;
  }

  // Merges the single arc above n with the single arc below it.
  void absorb(int n) {
    if (n == root || n == tip || !node_alive[n]) return;
    int above = -1, below = -1, count = 0;
    for (std::size_t a = 0; a < arcs.size(); ++a) {
      if (!arc_alive[a]) continue;
      if (arcs[a].v == n) {
        above = static_cast<int>(a);
        ++count;
      } else if (arcs[a].u == n) {
        below = static_cast<int>(a);
        ++count;
      }
    }
    if (count != 2 || above < 0 || below < 0) return;
    SkeletonArc merged;
    const SkeletonArc& a1 = arcs[above];
    const SkeletonArc& a2 = arcs[below];
    merged.id = std::min(a1.id, a2.id);
    merged.u = a1.u;
    merged.v = a2.v;
    merged.polyline = a1.polyline;
    merged.polyline.insert(merged.polyline.end(), a2.polyline.begin() + 1, a2.polyline.end());
    merged.weight = a1.weight + a2.weight;
    merged.mean_density =
        merged.weight > 0.0 ? (a1.mean_density * a1.weight + a2.mean_density * a2.weight) / merged.weight : 0.0;
    merged.sources = a1.sources;
    merged.sources.insert(merged.sources.end(), a2.sources.begin(), a2.sources.end());
    std::sort(merged.sources.begin(), merged.sources.end());
    arc_alive[above] = arc_alive[below] = 0;
    node_alive[n] = 0;
    arcs.push_back(std::move(merged));
    arc_alive.push_back(1);
  }

  bool remove_short_leaf(double threshold) {
    int best = -1;
    double best_p = 0.0;
    int leaf = -1;
    for (std::size_t a = 0; a < arcs.size(); ++a) {
      if (!arc_alive[a]) continue;
      const int du = degree(arcs[a].u);
      const int dv = degree(arcs[a].v);
      int l = -1;
      if (du == 1 && dv >= 2) l = arcs[a].u;
      if (dv == 1 && du >= 2) l = arcs[a].v;
      if (l < 0 || l == root || l == tip) continue;
      const double p = nodes[arcs[a].u].height - nodes[arcs[a].v].height;
      if (!(p < threshold)) continue;
      if (best < 0 || p < best_p || (p == best_p && arcs[a].id < arcs[best].id)) {
        best = static_cast<int>(a);
        best_p = p;
        leaf = l;
      }
    }
    if (best < 0) return false;
    const int attach = arcs[best].u == leaf ? arcs[best].v : arcs[best].u;
    arc_alive[best] = 0;
    node_alive[leaf] = 0;
    absorb(attach);
    return true;
  }

  bool collapse_short_cycle(double threshold) {
    std::map<std::pair<int, int>, std::vector<int>> groups;
    for (std::size_t a = 0; a < arcs.size(); ++a)
      if (arc_alive[a]) groups[{arcs[a].u, arcs[a].v}].push_back(static_cast<int>(a));
    const std::vector<int>* pick = nullptr;
    double pick_e = 0.0;
    int pick_id = 0;
    for (const auto& [key, members] : groups) {
      if (members.size() < 2) continue;
      const double e = nodes[key.first].height - nodes[key.second].height;
      if (!(e < threshold)) continue;
      int min_id = arcs[members.front()].id;
      for (int m : members) min_id = std::min(min_id, arcs[m].id);
      if (!pick || e < pick_e || (e == pick_e && min_id < pick_id)) {
        pick = &members;
        pick_e = e;
        pick_id = min_id;
      }
    }
    if (!pick) return false;
    int drop = -1;
    for (int m : *pick) {
      if (drop < 0 || arcs[m].mean_density < arcs[drop].mean_density ||
          (arcs[m].mean_density == arcs[drop].mean_density && arcs[m].id > arcs[drop].id))
        drop = m;
    }
    const int u = arcs[drop].u;
    const int v = arcs[drop].v;
    arc_alive[drop] = 0;
    absorb(u);
    absorb(v);
    return true;
  }
};

}  // namespace

SkeletonGraph trim_skeleton(const SkeletonGraph& g, const TrimParams& params) {
  params.validate();
  if (g.nodes.empty()) return g;
  WorkGraph w;
  w.nodes = g.nodes;
  w.arcs = g.arcs;
  w.node_alive.assign(g.nodes.size(), 1);
  w.arc_alive.assign(g.arcs.size(), 1);
  for (const auto& n : g.nodes) {
    if (w.root < 0 || n.height > w.nodes[w.root].height) w.root = n.id;
    if (w.tip < 0 || n.height < w.nodes[w.tip].height) w.tip = n.id;
  }

  for (;;) {
    if (w.remove_short_leaf(params.min_branch_persistence)) continue;
    if (w.collapse_short_cycle(params.min_cycle_persistence)) continue;
    break;
  }

  SkeletonGraph out;
  out.finger_id = g.finger_id;
  out.height_axis = g.height_axis;
  std::vector<int> remap(w.nodes.size(), -1);
  for (std::size_t n = 0; n < w.nodes.size(); ++n) {
    if (!w.node_alive[n]) continue;
    remap[n] = static_cast<int>(out.nodes.size());
    SkeletonNode node = w.nodes[n];
    node.id = remap[n];
    out.nodes.push_back(node);
  }
  std::vector<int> alive;
  for (std::size_t a = 0; a < w.arcs.size(); ++a)
    if (w.arc_alive[a]) alive.push_back(static_cast<int>(a));
  std::sort(alive.begin(), alive.end(), [&](int a, int b) { return w.arcs[a].id < w.arcs[b].id; });
  for (int a : alive) {
    SkeletonArc arc = w.arcs[a];
    arc.id = static_cast<int>(out.arcs.size());
    arc.u = remap[arc.u];
    arc.v = remap[arc.v];
    out.arcs.push_back(std::move(arc));
  }
  classify_nodes(out);
  return out;
}

double finger_height(const SkeletonGraph& g) {
  if (g.nodes.empty()) return 0.0;
  double hi = g.nodes.front().height, lo = hi;
  for (const auto& n : g.nodes) {
    hi = std::max(hi, n.height);
    lo = std::min(lo, n.height);
  }
  return hi - lo;
}

int topological_complexity(const SkeletonGraph& g) {
  return static_cast<int>(
      std::count_if(g.nodes.begin(), g.nodes.end(), [](const SkeletonNode& n) { return n.kind != NodeKind::regular; }));
}

}  // namespace fingertrack
