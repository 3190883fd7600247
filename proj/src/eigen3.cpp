#include "fingertrack/eigen3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fingertrack {

namespace {

int dominant_axis(const Vec3& v) {
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  return best;
}

// Null vector of (A - lambda I) from the best-conditioned row cross product.
Vec3 null_vector(const Sym3& a, double lambda) {
  const Vec3 r0{a(0, 0) - lambda, a(0, 1), a(0, 2)};
  const Vec3 r1{a(1, 0), a(1, 1) - lambda, a(1, 2)};
  const Vec3 r2{a(2, 0), a(2, 1), a(2, 2) - lambda};
  const std::array<Vec3, 3> candidates{cross(r0, r1), cross(r0, r2), cross(r1, r2)};
  const Vec3* best = &candidates[0];
  double best_norm = dot(candidates[0], candidates[0]);
  for (const auto& c : candidates) {
    const double n = dot(c, c);
    if (n > best_norm) {
      best_norm = n;
      best = &c;
    }
  }
  return normalized(*best);
}

}  // namespace

Vec3 canonical_sign(const Vec3& v) {
  return v[dominant_axis(v)] < 0.0 ? -v : v;
}

void lindeberg_sort(std::array<EigenPair, 3>& pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const EigenPair& p, const EigenPair& q) {
    const double ap = std::abs(p.value);
    const double aq = std::abs(q.value);
    if (ap != aq) return ap > aq;
    if (p.value != q.value) return p.value < q.value;
    return dominant_axis(p.vector) < dominant_axis(q.vector);
  });
}

SymEigenResult eigen_jacobi(const Sym3& input, int max_sweeps) {
  auto a = input.m;
  std::array<std::array<double, 3>, 3> v{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  const double scale = input.frobenius();
  SymEigenResult out;
  out.used_jacobi = true;
  out.converged = false;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const double off = std::sqrt(a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]);
    if (off <= 1e-17 * scale || off == 0.0) {
      out.converged = true;
      break;
    }
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!out.converged) {
    const double off = std::sqrt(a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]);
    out.converged = off <= 1e-12 * scale;
  }
  for (int i = 0; i < 3; ++i) {
    out.pairs[i].value = a[i][i];
    out.pairs[i].vector = normalized(Vec3{v[0][i], v[1][i], v[2][i]});
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const EigenPair& p, const EigenPair& q) { return p.value < q.value; });
  return out;
}

SymEigenResult eigen_symmetric(const Sym3& a) {
  SymEigenResult out;
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);

  if (p1 == 0.0) {
    for (int i = 0; i < 3; ++i) {
      out.pairs[i].value = a(i, i);
      out.pairs[i].vector = Vec3{};
      out.pairs[i].vector[i] = 1.0;
    }
    lindeberg_sort(out.pairs);
    return out;
  }

  const double q = (a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
  const double d0 = a(0, 0) - q;
  const double d1 = a(1, 1) - q;
  const double d2 = a(2, 2) - q;
  const double p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);

  // B = (A - qI) / p ; r = det(B) / 2
  const double b00 = d0 / p, b11 = d1 / p, b22 = d2 / p;
  const double b01 = a(0, 1) / p, b02 = a(0, 2) / p, b12 = a(1, 2) / p;
  const double det_b = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) +
                       b02 * (b01 * b12 - b11 * b02);
  const double r = std::clamp(det_b / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;

  const double e_hi = q + 2.0 * p * std::cos(phi);
  const double e_lo = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double e_mid = 3.0 * q - e_hi - e_lo;

  const double spread = std::max({std::abs(e_hi), std::abs(e_mid), std::abs(e_lo)});
  const double gap = std::min(e_hi - e_mid, e_mid - e_lo);
  if (gap <= kEigenClusterTolerance * spread) {
    out = eigen_jacobi(a);
    for (auto& pair : out.pairs) pair.vector = canonical_sign(pair.vector);
    lindeberg_sort(out.pairs);
    return out;
  }

  const Vec3 v_hi = null_vector(a, e_hi);
  Vec3 v_lo = null_vector(a, e_lo);
  v_lo = normalized(v_lo - dot(v_lo, v_hi) * v_hi);
  const Vec3 v_mid = normalized(cross(v_lo, v_hi));

  out.pairs[0] = {e_hi, canonical_sign(v_hi)};
  out.pairs[1] = {e_mid, canonical_sign(v_mid)};
  out.pairs[2] = {e_lo, canonical_sign(v_lo)};
  lindeberg_sort(out.pairs);
  return out;
}

}  // namespace fingertrack
