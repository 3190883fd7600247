#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <set>
#include <tuple>

namespace oracle {

using fingertrack::NodeKind;
using fingertrack::SkeletonArc;
using fingertrack::SkeletonNode;
using fingertrack::VoxelId;

std::array<long double, 3> symmetric_eigenvalues(const fingertrack::Sym3& a) {
  using ld = long double;
  const ld a00 = a(0, 0), a11 = a(1, 1), a22 = a(2, 2), a01 = a(0, 1), a02 = a(0, 2), a12 = a(1, 2);
  const ld p1 = a01 * a01 + a02 * a02 + a12 * a12;
  if (p1 == 0) {
    std::array<ld, 3> d{a00, a11, a22};
    std::sort(d.begin(), d.end(), std::greater<>());
    return d;
  }
  const ld q = (a00 + a11 + a22) / 3;
  const ld p2 = (a00 - q) * (a00 - q) + (a11 - q) * (a11 - q) + (a22 - q) * (a22 - q) + 2 * p1;
  const ld p = std::sqrt(p2 / 6);
  // B = (A - qI) / p
  const ld b00 = (a00 - q) / p, b11 = (a11 - q) / p, b22 = (a22 - q) / p;
  const ld b01 = a01 / p, b02 = a02 / p, b12 = a12 / p;
  const ld det = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) + b02 * (b01 * b12 - b11 * b02);
  const ld r = std::clamp(det / 2, static_cast<ld>(-1), static_cast<ld>(1));
  const ld phi = std::acos(r) / 3;
  const ld pi = std::acos(static_cast<ld>(-1));
  const ld e1 = q + 2 * p * std::cos(phi);
  const ld e3 = q + 2 * p * std::cos(phi + 2 * pi / 3);
  const ld e2 = 3 * q - e1 - e3;
  std::array<ld, 3> e{e1, e2, e3};
  std::sort(e.begin(), e.end(), std::greater<>());
  return e;
}

double eigen_residual(const fingertrack::Sym3& a, double value, const Vec3& v) {
  const Vec3 av = a * v;
  const Vec3 r = av - value * v;
  return fingertrack::norm(r) / std::max(1.0, a.frobenius());
}

ScalarField random_smooth_field(std::uint64_t seed, std::array<int, 3> dims, double spacing) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  struct Bump {
    Vec3 c;
    Vec3 inv2s2;
    double amp;
  };
  std::vector<Bump> bumps;
  for (int b = 0; b < 5; ++b) {
    Bump g;
    g.c = {u(rng) * dims[0], u(rng) * dims[1], u(rng) * dims[2]};
    for (int a = 0; a < 3; ++a) {
      const double s = 3.0 + 6.0 * u(rng);
      g.inv2s2[a] = 1.0 / (2.0 * s * s);
    }
    g.amp = (u(rng) < 0.7 ? 1.0 : -0.6) * (0.5 + u(rng));
    bumps.push_back(g);
  }
  const double cx = 0.01 * (u(rng) - 0.5), cxy = 0.002 * (u(rng) - 0.5);
  GridSpec spec;
  spec.dims = dims;
  spec.spacing = spacing;
  spec.origin = {0.0, 0.0, (dims[2] - 1) * spacing};
  std::vector<double> values(spec.cell_count());
  for (int k = 0; k < dims[2]; ++k)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i) {
        double f = cx * i + cxy * i * j;
        for (const auto& g : bumps) {
          const double dx = i - g.c.x, dy = j - g.c.y, dz = k - g.c.z;
          f += g.amp * std::exp(-(dx * dx * g.inv2s2.x + dy * dy * g.inv2s2.y + dz * dz * g.inv2s2.z));
        }
        values[spec.linear({i, j, k})] = f;
      }
  // Densities are non-negative; a constant shift leaves every derivative alone.
  const double lo = *std::min_element(values.begin(), values.end());
  for (double& v : values) v += 0.5 - lo;
  return ScalarField(spec, std::move(values), 0);
}

namespace {

template <typename F>
void neighbours(const GridSpec& spec, std::size_t q, bool full26, F&& f) {
  const VoxelId v = spec.voxel(q);
  for (int dk = -1; dk <= 1; ++dk)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const int m = std::abs(di) + std::abs(dj) + std::abs(dk);
        if (m == 0 || (!full26 && m > 1)) continue;
        const VoxelId w{v.i + di, v.j + dj, v.k + dk};
        if (w.i < 0 || w.j < 0 || w.k < 0 || w.i >= spec.dims[0] || w.j >= spec.dims[1] || w.k >= spec.dims[2])
          continue;
        f(spec.linear(w));
      }
}

}  // namespace

std::vector<std::uint32_t> flood_components(const GridSpec& spec, const std::vector<char>& member, bool full26,
                                            std::uint32_t* count) {
  std::vector<std::uint32_t> label(member.size(), 0);
  std::uint32_t next = 0;
  for (std::size_t s = 0; s < member.size(); ++s) {
    if (!member[s] || label[s]) continue;
    ++next;
    std::deque<std::size_t> queue{s};
    label[s] = next;
    while (!queue.empty()) {
      const std::size_t q = queue.front();
      queue.pop_front();
      neighbours(spec, q, full26, [&](std::size_t w) {
        if (member[w] && !label[w]) {
          label[w] = next;
          queue.push_back(w);
        }
      });
    }
  }
  if (count) *count = next;
  return label;
}

std::uint32_t steepest_ascent_label(const ScalarField& f, const std::vector<std::uint32_t>& core_labels,
                                    std::size_t v) {
  const GridSpec& spec = f.spec();
  for (;;) {
    if (core_labels[v]) return core_labels[v];
    std::size_t best = v;
    neighbours(spec, v, false, [&](std::size_t w) {
      if (f.at(w) > f.at(best) || (f.at(w) == f.at(best) && best != v && w < best)) best = w;
    });
    if (best == v) return 0;
    v = best;
  }
}

int voxel_betti1(const GridSpec& spec, const std::vector<std::size_t>& voxels) {
  using Key = std::tuple<int, int, int, int>;  // corner + cell type
  std::set<Key> verts, edges, faces;
  for (std::size_t q : voxels) {
    const VoxelId v = spec.voxel(q);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) verts.insert({v.i + a, v.j + b, v.k + c, 0});
    // Edges along axis e start at corners with offset 0 on that axis.
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        edges.insert({v.i, v.j + a, v.k + b, 0});
        edges.insert({v.i + a, v.j, v.k + b, 1});
        edges.insert({v.i + a, v.j + b, v.k, 2});
      }
    // Faces normal to axis n.
    for (int a = 0; a < 2; ++a) {
      faces.insert({v.i + a, v.j, v.k, 0});
      faces.insert({v.i, v.j + a, v.k, 1});
      faces.insert({v.i, v.j, v.k + a, 2});
    }
  }
  const long chi = static_cast<long>(verts.size()) - static_cast<long>(edges.size()) +
                   static_cast<long>(faces.size()) - static_cast<long>(voxels.size());

  std::vector<char> member(spec.cell_count(), 0);
  for (std::size_t q : voxels) member[q] = 1;
  std::uint32_t b0 = 0;
  flood_components(spec, member, true, &b0);

  // Bounded complement components, in a grid padded by one voxel.
  GridSpec pad = spec;
  for (int a = 0; a < 3; ++a) pad.dims[a] += 2;
  std::vector<char> empty(pad.cell_count(), 1);
  for (std::size_t q : voxels) {
    const VoxelId v = spec.voxel(q);
    empty[pad.linear({v.i + 1, v.j + 1, v.k + 1})] = 0;
  }
  std::uint32_t holes = 0;
  const auto comp = flood_components(pad, empty, false, &holes);
  const std::uint32_t outside = comp[0];  // corner of the padding
  const int b2 = static_cast<int>(holes) - (outside ? 1 : 0);
  return static_cast<int>(b0) + b2 - static_cast<int>(chi);
}

namespace {

double polyline_length(const std::vector<Vec3>& p) {
  double s = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) s += fingertrack::norm(p[i] - p[i - 1]);
  return s;
}

}  // namespace

PathChoice exhaustive_longest_path(const SkeletonGraph& g) {
  std::vector<std::vector<int>> down(g.nodes.size());
  for (const auto& a : g.arcs) down[a.u].push_back(a.id);
  PathChoice best;
  bool have = false;
  std::vector<int> path;
  std::function<void(int, double)> dfs = [&](int n, double len) {
    if (path.size() > 1) {
      PathChoice c{path, g.nodes[path.front()].height - g.nodes[n].height, len};
      bool take = !have;
      if (have) {
        const int mc = *std::min_element(c.nodes.begin(), c.nodes.end());
        const int mb = *std::min_element(best.nodes.begin(), best.nodes.end());
        if (c.extent != best.extent)
          take = c.extent > best.extent;
        else if (c.length != best.length)
          take = c.length > best.length;
        else if (mc != mb)
          take = mc < mb;
        else
          take = c.nodes < best.nodes;
      }
      if (take) {
        best = c;
        have = true;
      }
    }
    for (int a : down[n]) {
      path.push_back(g.arcs[a].v);
      dfs(g.arcs[a].v, len + polyline_length(g.arcs[a].polyline));
      path.pop_back();
    }
  };
  for (std::size_t s = 0; s < g.nodes.size(); ++s) {
    path = {static_cast<int>(s)};
    dfs(static_cast<int>(s), 0.0);
  }
  return best;
}

SkeletonGraph random_skeleton(std::mt19937_64& rng, int n_nodes, int extra_arcs) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SkeletonGraph g;
  g.height_axis = 2;
  std::vector<int> rank(n_nodes);
  std::iota(rank.begin(), rank.end(), 0);
  std::shuffle(rank.begin(), rank.end(), rng);
  for (int i = 0; i < n_nodes; ++i) {
    SkeletonNode n;
    n.id = i;
    n.height = 0.5 * rank[i] + 0.25 * u(rng);
    n.position = {10.0 * u(rng), 10.0 * u(rng), n.height};
    g.nodes.push_back(n);
  }
  std::set<std::pair<int, int>> used;
  auto add_arc = [&](int a, int b) {
    const int hi = g.nodes[a].height > g.nodes[b].height ? a : b;
    const int lo = hi == a ? b : a;
    SkeletonArc arc;
    arc.id = static_cast<int>(g.arcs.size());
    arc.u = hi;
    arc.v = lo;
    arc.polyline = {g.nodes[hi].position, g.nodes[lo].position};
    arc.mean_density = std::round(100.0 * u(rng)) / 100.0;
    arc.weight = 1.0;
    arc.sources = {arc.id};
    g.arcs.push_back(arc);
    used.insert({std::min(a, b), std::max(a, b)});
  };
  for (int i = 1; i < n_nodes; ++i) add_arc(i, static_cast<int>(u(rng) * i));
  for (int e = 0, tries = 0; e < extra_arcs && tries < 100; ++tries) {
    const int a = static_cast<int>(u(rng) * n_nodes), b = static_cast<int>(u(rng) * n_nodes);
    if (a == b) continue;
    // Allow a parallel copy now and then: the trim collapses those.
    if (used.count({std::min(a, b), std::max(a, b)}) && u(rng) < 0.7) continue;
    add_arc(a, b);
    ++e;
  }
  fingertrack::classify_nodes(g);
  return g;
}

int graph_betti1(const SkeletonGraph& g) {
  std::vector<std::vector<int>> adj(g.nodes.size());
  for (const auto& a : g.arcs) {
    adj[a.u].push_back(a.v);
    adj[a.v].push_back(a.u);
  }
  std::vector<char> seen(g.nodes.size(), 0);
  int b0 = 0;
  for (std::size_t s = 0; s < g.nodes.size(); ++s) {
    if (seen[s]) continue;
    ++b0;
    std::deque<int> q{static_cast<int>(s)};
    seen[s] = 1;
    while (!q.empty()) {
      const int n = q.front();
      q.pop_front();
      for (int m : adj[n])
        if (!seen[m]) {
          seen[m] = 1;
          q.push_back(m);
        }
    }
  }
  return static_cast<int>(g.arcs.size()) - static_cast<int>(g.nodes.size()) + b0;
}

double crossings(const std::vector<WeightedEdge>& edges, const std::vector<int>& top_pos,
                 const std::vector<int>& bottom_pos) {
  double c = 0.0;
  for (std::size_t i = 0; i < edges.size(); ++i)
    for (std::size_t j = i + 1; j < edges.size(); ++j) {
      const int dt = top_pos[edges[i].top] - top_pos[edges[j].top];
      const int db = bottom_pos[edges[i].bottom] - bottom_pos[edges[j].bottom];
      if ((dt < 0 && db > 0) || (dt > 0 && db < 0)) c += edges[i].weight * edges[j].weight;
    }
  return c;
}

double brute_min_crossings(const std::vector<int>& fixed_pos, int n_free, const std::vector<WeightedEdge>& edges) {
  std::vector<int> perm(n_free);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1.0;
  do {
    std::vector<int> pos(n_free);
    for (int r = 0; r < n_free; ++r) pos[perm[r]] = r;
    const double c = crossings(edges, fixed_pos, pos);
    if (best < 0.0 || c < best) best = c;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<Vec2> brute_hull_vertices(const std::vector<Vec2>& points) {
  std::vector<Vec2> pts(points);
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  };
  auto on_segment = [&](const Vec2& p, const Vec2& a, const Vec2& b) {
    return orient(a, b, p) == 0.0 && std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
  };
  std::vector<Vec2> out;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = pts[i];
    bool inside = false;
    for (std::size_t a = 0; a < n && !inside; ++a) {
      if (a == i) continue;
      for (std::size_t b = a + 1; b < n && !inside; ++b) {
        if (b == i) continue;
        if (on_segment(p, pts[a], pts[b])) inside = true;
        for (std::size_t c = b + 1; c < n && !inside; ++c) {
          if (c == i || orient(pts[a], pts[b], pts[c]) == 0.0) continue;
          const double d1 = orient(pts[a], pts[b], p), d2 = orient(pts[b], pts[c], p), d3 = orient(pts[c], pts[a], p);
          const bool neg = d1 < 0 || d2 < 0 || d3 < 0, pos = d1 > 0 || d2 > 0 || d3 > 0;
          if (!(neg && pos)) inside = true;
        }
      }
    }
    if (!inside) out.push_back(p);
  }
  return out;
}

}  // namespace oracle
