#include "fingertrack/segment.hpp"

#include <algorithm>
#include <numeric>

#include "fingertrack/error.hpp"

namespace fingertrack {

std::string to_string(Connectivity c) { return c == Connectivity::face6 ? "face6" : "full26"; }

Connectivity connectivity_from_string(const std::string& name) {
  if (name == "face6") return Connectivity::face6;
  if (name == "full26") return Connectivity::full26;
  throw ValidationError("unknown connectivity '" + name + "'");
}

void SegmentationParams::validate(const GridSpec& spec) const {
  const double d = top_layer_for(spec);
  if (!(d >= spec.domain_bottom() && d <= spec.domain_top()))
    throw ValidationError("top_layer_depth " + std::to_string(d) + " outside the domain height range [" +
                          std::to_string(spec.domain_bottom()) + ", " + std::to_string(spec.domain_top()) + "]");
  if (!(density_floor >= 0.0)) throw ValidationError("density_floor must be >= 0");
}

RidgeMask split_top_layer(const RidgeMask& mask, const SegmentationParams& params) {
  params.validate(mask.spec);
  const double depth = params.top_layer_for(mask.spec);
  RidgeMask out = mask;
  for (std::size_t n = 0; n < out.labels.size(); ++n)
    if (mask.spec.height(mask.spec.voxel(n)) > depth) out.labels[n] = VoxelLabel::non_ridge;
  return out;
}

FingerLabelField connected_components(const RidgeMask& mask, const SegmentationParams& params) {
  const GridSpec& spec = mask.spec;
  const std::size_t n = spec.cell_count();
  std::vector<std::uint32_t> tmp(n, 0);
  std::vector<std::vector<std::size_t>> comps;
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!mask.is_core(seed) || tmp[seed] != 0) continue;
    comps.emplace_back();
    const auto id = static_cast<std::uint32_t>(comps.size());
    tmp[seed] = id;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t q = stack.back();
      stack.pop_back();
      comps.back().push_back(q);
      for_each_neighbor(spec, spec.voxel(q), params.core_connectivity, [&](const VoxelId&, std::size_t w) {
        if (mask.is_core(w) && tmp[w] == 0) {
          tmp[w] = id;
          stack.push_back(w);
        }
      });
    }
    std::sort(comps.back().begin(), comps.back().end());
  }
  // Components were found in increasing order of their smallest index, so a
  // stable sort by size keeps that as the tie-break.
  std::vector<std::size_t> order(comps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return comps[a].size() > comps[b].size(); });

  FingerLabelField out;
  out.spec = spec;
  out.labels.assign(n, 0);
  out.finger_count = static_cast<std::uint32_t>(comps.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    auto& c = comps[order[rank]];
    for (std::size_t q : c) out.labels[q] = static_cast<std::uint32_t>(rank + 1);
    out.core.push_back(std::move(c));
  }
  out.volume = out.core;
  return out;
}

FingerLabelField watershed_expand(const ScalarField& field, const FingerLabelField& cores,
                                  const SegmentationParams& params) {
  const GridSpec& spec = cores.spec;
  if (!(field.spec() == spec)) throw ValidationError("field and label grids differ");
  params.validate(spec);
  const double depth = params.top_layer_for(spec);

  FingerLabelField out = cores;
  std::vector<std::size_t> pending;
  for (std::size_t q = 0; q < spec.cell_count(); ++q) {
    if (out.labels[q] != 0) continue;
    if (!(field.at(q) > params.density_floor)) continue;
    if (spec.height(spec.voxel(q)) > depth) continue;
    pending.push_back(q);
  }
  std::stable_sort(pending.begin(), pending.end(),
                   [&](std::size_t a, std::size_t b) { return field.at(a) > field.at(b); });

  std::vector<std::size_t> deferred;
  while (!pending.empty()) {
    deferred.clear();
    for (std::size_t q : pending) {
      std::uint32_t best = 0;
      double best_f = 0.0;
      for_each_neighbor(spec, spec.voxel(q), params.flood_connectivity, [&](const VoxelId&, std::size_t w) {
        const std::uint32_t l = out.labels[w];
        if (l == 0) return;
        const double fw = field.at(w);
        if (best == 0 || fw > best_f || (fw == best_f && l < best)) {
          best = l;
          best_f = fw;
        }
      });
      if (best == 0)
        deferred.push_back(q);
      else
        out.labels[q] = best;
    }
    if (deferred.size() == pending.size()) break;  // the rest is unreachable from any core
    pending.swap(deferred);
  }

  for (auto& v : out.volume) v.clear();
  for (std::size_t q = 0; q < spec.cell_count(); ++q)
    if (out.labels[q] != 0) out.volume[out.labels[q] - 1].push_back(q);
  return out;
}

}  // namespace fingertrack
