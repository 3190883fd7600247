#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fingertrack/eigen3.hpp"
#include "fingertrack/field.hpp"

namespace fingertrack {

enum class BoundaryPolicy { clamp, skip };

std::string to_string(BoundaryPolicy p);
BoundaryPolicy boundary_policy_from_string(const std::string& name);

struct DetectionParams {
  double r = 1.0;                  // nearby-cube factor: cube side is r * s
  std::optional<double> h;         // finite-difference spacing; unset means h = s
  BoundaryPolicy boundary = BoundaryPolicy::clamp;
  double eigen_tolerance = 1e-12;  // relative to the spectral norm of H
  double rank_tolerance = 1e-9;    // relative to the spectral norm of H

  double spacing_for(double s) const { return h.value_or(s); }
  /// Throws ValidationError unless r >= 1 and 0 < h <= s.
  void validate(double s) const;
};

/// Central-difference derivatives at a cell center, in world coordinates.
struct Derivatives {
  double f0 = 0.0;
  Vec3 grad;
  Sym3 hess;
};

/// Gradient and Hessian with step h in (0, s]. For h < s the off-center
/// samples are linear interpolants between the center and the neighbouring
/// cell centers (the axis samples coincide with trilinear_sample; the mixed
/// stencil interpolates along the cell diagonal). Samples are carried as
/// differences from f0, so for power-of-two s/h the results equal the h = s
/// results bitwise (gradient) or scaled by exactly s/h (Hessian).
///
/// Throws OutOfBounds for boundary voxels under BoundaryPolicy::skip.
Derivatives estimate_derivatives(const ScalarField& field, const VoxelId& v, double h,
                                 BoundaryPolicy policy = BoundaryPolicy::clamp);

Vec3 estimate_gradient(const ScalarField& field, const VoxelId& v, double h,
                       BoundaryPolicy policy = BoundaryPolicy::clamp);
Sym3 estimate_hessian(const ScalarField& field, const VoxelId& v, double h,
                      BoundaryPolicy policy = BoundaryPolicy::clamp);

/// Second-order Taylor model of f around one cell center.
struct LocalModel {
  VoxelId center;
  Vec3 position;   // world position of the cell center
  double spacing = 1.0;
  double step = 1.0;  // h used for the derivatives
  double f0 = 0.0;
  Vec3 grad;
  Sym3 hess;
  std::array<EigenPair, 3> eigen;  // Lindeberg order
  bool eigen_converged = true;

  /// Taylor polynomial g(p0 + dp).
  double taylor(const Vec3& dp) const { return f0 + dot(grad, dp) + 0.5 * dot(dp, hess * dp); }
  /// Directional derivative of g along eigenvector i at p0 + dp.
  double directional_derivative(int i, const Vec3& dp) const {
    return dot(eigen[i].vector, grad + hess * dp);
  }
};

LocalModel build_local_model(const ScalarField& field, const VoxelId& v, double h,
                             BoundaryPolicy policy = BoundaryPolicy::clamp);
LocalModel build_local_model(const Derivatives& d, const VoxelId& v, const Vec3& position, double spacing,
                             double h);

enum class ExtremeKind { empty, line, plane, all_space };

std::string to_string(ExtremeKind k);

/// Solution set of v_i . (grad + H dp) = 0 for i = 1, 2 in dp coordinates.
/// line: {point + t * direction}; plane: {dp : direction . dp = offset};
/// point is always the minimum-norm member.
struct ExtremeSet {
  ExtremeKind kind = ExtremeKind::empty;
  int rank = 0;
  Vec3 point;
  Vec3 direction;
  double offset = 0.0;
};

ExtremeSet solve_extreme_set(const LocalModel& model, double rank_tolerance = 1e-9);

/// Some member of `set` inside the closed cube of side r * s centered at the
/// cell center, as a displacement from the center. For a line the member
/// closest to the minimum-norm point is returned.
std::optional<Vec3> voxel_contains_extreme(const LocalModel& model, const ExtremeSet& set, double r);

/// Condition Two: the first two Lindeberg eigenvalues are negative. Values
/// within eigen_tolerance * |l0| of zero count as zero. The Hessian of the
/// quadratic model is constant, so the witness only matters for its
/// existence.
bool is_ridge_point(const LocalModel& model, const Vec3& witness, double eigen_tolerance = 1e-12);
bool passes_condition_two(const LocalModel& model, double eigen_tolerance = 1e-12);

enum class VoxelLabel : std::uint8_t { non_ridge = 0, core_only = 1, ridge = 2 };

struct RidgeMask {
  GridSpec spec;
  std::vector<VoxelLabel> labels;
  DetectionParams params;
  std::vector<std::string> warnings;

  bool is_core(std::size_t linear) const { return labels[linear] != VoxelLabel::non_ridge; }
  std::size_t count(VoxelLabel l) const;
  std::size_t core_count() const { return count(VoxelLabel::ridge) + count(VoxelLabel::core_only); }
  std::vector<std::uint8_t> bytes() const;

  friend bool operator==(const RidgeMask& a, const RidgeMask& b) { return a.spec == b.spec && a.labels == b.labels; }
};

/// Ridge voxels (own unit box contains a ridge point) and core_only voxels
/// (not ridge, but the cube of side r * s does), h = s. OpenMP-parallel over
/// layers; `workers` <= 0 uses the runtime default.
RidgeMask detect_ridge_voxels(const ScalarField& field, const DetectionParams& params, int workers = 0);

/// Single-threaded reference for the kernel above.
RidgeMask detect_ridge_voxels_serial(const ScalarField& field, const DetectionParams& params);

/// Spacing variant: ridge labels from h = s, core labels from the step-h
/// model tested against the cube of side params.r * s. Equivalent to
/// detect_ridge_voxels with r = params.r * s / h.
RidgeMask detect_with_spacing(const ScalarField& field, double h, const DetectionParams& params, int workers = 0);

/// Dispatches on params.h: detect_with_spacing when h < s, else
/// detect_ridge_voxels.
RidgeMask detect(const ScalarField& field, const DetectionParams& params, int workers = 0);

}  // namespace fingertrack
