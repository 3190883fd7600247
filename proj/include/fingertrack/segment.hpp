#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fingertrack/field.hpp"
#include "fingertrack/ridge.hpp"

namespace fingertrack {

enum class Connectivity { face6, full26 };

std::string to_string(Connectivity c);
Connectivity connectivity_from_string(const std::string& name);

struct SegmentationParams {
  // World height separating the top layer from the analysis domain. Unset
  // means the domain top, which clears nothing.
  std::optional<double> top_layer_depth;
  double density_floor = 0.0;
  Connectivity core_connectivity = Connectivity::full26;
  Connectivity flood_connectivity = Connectivity::face6;

  double top_layer_for(const GridSpec& spec) const { return top_layer_depth.value_or(spec.domain_top()); }
  /// Throws ValidationError if the depth lies outside [domain_bottom, domain_top]
  /// or the floor is negative.
  void validate(const GridSpec& spec) const;
};

/// Label 0 is background (and the top layer); fingers are 1..finger_count.
struct FingerLabelField {
  GridSpec spec;
  std::vector<std::uint32_t> labels;
  std::uint32_t finger_count = 0;
  std::vector<std::vector<std::size_t>> core;    // [id - 1] sorted linear indices
  std::vector<std::vector<std::size_t>> volume;  // [id - 1] sorted; superset of core

  const std::vector<std::size_t>& core_of(std::uint32_t id) const { return core.at(id - 1); }
  const std::vector<std::size_t>& volume_of(std::uint32_t id) const { return volume.at(id - 1); }
};

/// Visits in-grid neighbours of v under the given connectivity.
template <typename F>
void for_each_neighbor(const GridSpec& spec, const VoxelId& v, Connectivity c, F&& f) {
  for (int dk = -1; dk <= 1; ++dk)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const int manhattan = (di != 0) + (dj != 0) + (dk != 0);
        if (manhattan == 0 || (c == Connectivity::face6 && manhattan != 1)) continue;
        const VoxelId w{v.i + di, v.j + dj, v.k + dk};
        if (spec.contains(w)) f(w, spec.linear(w));
      }
}

/// Clears core and ridge labels strictly above the top-layer height.
RidgeMask split_top_layer(const RidgeMask& mask, const SegmentationParams& params);

/// Connected core components, labelled by decreasing size (ties: smallest
/// linear index first). volume is set equal to core.
FingerLabelField connected_components(const RidgeMask& mask, const SegmentationParams& params);

/// Descending-density flooding from the cores over voxels with f > floor
/// below the top layer. Each voxel takes the label of its densest labelled
/// neighbour (equal densities: smaller label); voxels with no labelled
/// neighbour at their turn wait for a later pass.
FingerLabelField watershed_expand(const ScalarField& field, const FingerLabelField& cores,
                                  const SegmentationParams& params);

}  // namespace fingertrack
