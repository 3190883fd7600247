#pragma once

#include <array>

#include "fingertrack/vec.hpp"

namespace fingertrack {

/// One eigenpair of a symmetric 3x3 matrix. Eigenvectors are unit length with
/// their largest-magnitude component made positive.
struct EigenPair {
  double value = 0.0;
  Vec3 vector;
};

struct SymEigenResult {
  std::array<EigenPair, 3> pairs;  // Lindeberg order: |l0| >= |l1| >= |l2|
  bool used_jacobi = false;
  bool converged = true;
};

/// Relative eigenvalue gap below which the closed-form path hands over to
/// cyclic Jacobi rotations.
inline constexpr double kEigenClusterTolerance = 1e-3;

/// Closed-form symmetric eigendecomposition (characteristic cubic via the
/// trigonometric solution, eigenvectors from row cross products) with a
/// Jacobi fallback for clustered roots. Output is Lindeberg ordered.
///
/// Every step is scale-equivariant: for a power-of-two c, the result for c*A
/// has eigenvalues scaled by c and bitwise identical eigenvectors.
SymEigenResult eigen_symmetric(const Sym3& a);

/// Cyclic Jacobi on its own (ascending eigenvalue order, unnormalized signs).
SymEigenResult eigen_jacobi(const Sym3& a, int max_sweeps = 64);

/// Sorts eigenpairs by descending |value|; ties by signed value ascending,
/// then by the index of the eigenvector's dominant axis.
void lindeberg_sort(std::array<EigenPair, 3>& pairs);

/// Flips v so that its largest-magnitude component is positive.
Vec3 canonical_sign(const Vec3& v);

}  // namespace fingertrack
