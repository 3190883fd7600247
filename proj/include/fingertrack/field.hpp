#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fingertrack/vec.hpp"

namespace fingertrack {

struct VoxelId {
  int i = 0;
  int j = 0;
  int k = 0;

  constexpr int operator[](int axis) const { return axis == 0 ? i : (axis == 1 ? j : k); }
  constexpr int& operator[](int axis) { return axis == 0 ? i : (axis == 1 ? j : k); }
  friend constexpr bool operator==(const VoxelId&, const VoxelId&) = default;
};

/// Rectilinear cell-centered grid. Cell (0,0,0) sits at `origin`; along every
/// axis the world coordinate grows with the index except the height axis when
/// `height_down` is set, where the coordinate (the height) decreases as the
/// index increases. Index 0 on the height axis is then the injection face.
struct GridSpec {
  std::array<int, 3> dims{3, 3, 3};
  double spacing = 1.0;
  Vec3 origin{};
  int height_axis = 2;
  bool height_down = true;

  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }

  std::size_t linear(const VoxelId& v) const {
    return static_cast<std::size_t>(v.i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(v.j) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(v.k));
  }

  VoxelId voxel(std::size_t index) const {
    const auto nx = static_cast<std::size_t>(dims[0]);
    const auto ny = static_cast<std::size_t>(dims[1]);
    return {static_cast<int>(index % nx), static_cast<int>((index / nx) % ny), static_cast<int>(index / (nx * ny))};
  }

  bool contains(const VoxelId& v) const {
    return v.i >= 0 && v.j >= 0 && v.k >= 0 && v.i < dims[0] && v.j < dims[1] && v.k < dims[2];
  }

  /// +1 or -1: direction of the world axis relative to increasing index.
  double axis_sign(int axis) const { return (axis == height_axis && height_down) ? -1.0 : 1.0; }

  Vec3 world(const VoxelId& v) const { return world_from_index(Vec3{double(v.i), double(v.j), double(v.k)}); }
  Vec3 world_from_index(const Vec3& idx) const;
  Vec3 index_from_world(const Vec3& p) const;

  double height_of_layer(int layer) const {
    return origin[height_axis] + axis_sign(height_axis) * spacing * layer;
  }
  double height(const VoxelId& v) const { return height_of_layer(v[height_axis]); }

  /// Extent of the domain along the height axis (cell faces, not centers).
  double domain_top() const;
  double domain_bottom() const;

  /// Throws ValidationError unless dims >= 3, spacing > 0, height_axis in 0..2.
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// One timestep of cell-centered, non-negative density. Immutable after
/// construction.
class ScalarField {
 public:
  ScalarField() = default;
  /// Validates length, finiteness and non-negativity; the error names the
  /// first offending linear index.
  ScalarField(GridSpec spec, std::vector<double> values, int timestep = 0);

  const GridSpec& spec() const { return spec_; }
  int timestep() const { return timestep_; }
  std::span<const double> values() const { return values_; }

  double at(int i, int j, int k) const { return values_[spec_.linear({i, j, k})]; }
  double at(std::size_t linear) const { return values_[linear]; }

  /// Bounds-checked read; throws OutOfBounds.
  double value_at(const VoxelId& v) const;

  double max_value() const;

 private:
  GridSpec spec_;
  std::vector<double> values_;
  int timestep_ = 0;
};

/// Trilinear interpolation between the eight cell centers around world point
/// p. Exact at cell centers. Throws OutOfBounds outside the hull of centers.
double trilinear_sample(const ScalarField& field, const Vec3& p);

enum class BrickType { f32, f64 };

/// Reads a JSON manifest plus one raw little-endian brick per timestep.
std::vector<ScalarField> load_fields(const std::filesystem::path& manifest_path);

/// Writes `manifest.json` and `t<N>.raw` bricks into dir. Returns the
/// manifest path.
std::filesystem::path save_fields(const std::filesystem::path& dir, std::span<const ScalarField> fields,
                                  BrickType dtype = BrickType::f32);

/// Raw little-endian brick helpers shared by the exporters.
void write_brick_u8(const std::filesystem::path& path, std::span<const std::uint8_t> data);
void write_brick_u32(const std::filesystem::path& path, std::span<const std::uint32_t> data);
std::vector<std::uint8_t> read_brick_u8(const std::filesystem::path& path, std::size_t expected);
std::vector<std::uint32_t> read_brick_u32(const std::filesystem::path& path, std::size_t expected);

}  // namespace fingertrack
