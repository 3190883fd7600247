#pragma once

#include <array>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "fingertrack/field.hpp"

namespace fingertrack {

enum class SyntheticKind { gaussian_ridge_line, twin_blob_merge, blob_split, branching_finger };

std::string to_string(SyntheticKind kind);
SyntheticKind synthetic_kind_from_string(const std::string& name);

// Geometric parameters are in voxel units; they are multiplied by `spacing`
// when the field is evaluated.
struct SyntheticParams {
  SyntheticKind kind = SyntheticKind::gaussian_ridge_line;
  std::array<int, 3> dims{32, 32, 32};
  double spacing = 1.0;
  int n_timesteps = 1;
  std::uint64_t seed = 7;
  double amplitude = 1.0;
  double sigma = 2.5;               // tube / ridge Gaussian width
  double jitter = 0.1;              // max seeded sub-voxel offset of tube centers
  double separation = 7.0;          // twin: initial half separation; split: final half separation
  double min_separation = 3.0;      // twin: half separation at the last step before the merge
  double tip_fraction = 0.75;       // twin/split: tube tips at this fraction of the depth
  double trunk_fraction = 0.35;     // branching: trunk length as a fraction of the depth
  std::array<double, 2> leg_lengths{20.0, 8.0};
  double leg_spread = 0.35;         // branching: horizontal drift per unit of leg length

  /// Reasonable defaults per kind (dims, timestep count, widths).
  static SyntheticParams defaults(SyntheticKind kind);
  void validate() const;
};

SyntheticParams synthetic_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SyntheticParams& p);

struct SyntheticDataset {
  SyntheticParams params;
  std::vector<ScalarField> fields;
  /// Construction-time facts: ridge column, per-timestep component counts,
  /// event timeline, branch geometry.
  nlohmann::json ground_truth;
};

/// Deterministic for a given seed: identical params produce identical values.
SyntheticDataset generate_synthetic(const SyntheticParams& params);

}  // namespace fingertrack
