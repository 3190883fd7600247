#include <doctest.h>

#include <cmath>
#include <random>

#include "fingertrack/eigen3.hpp"
#include "oracles.hpp"

using namespace fingertrack;

namespace {

Sym3 random_sym(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Sym3 a;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) a.set(i, j, scale * u(rng));
  return a;
}

void check_decomposition(const Sym3& a, const SymEigenResult& r) {
  const auto ref = oracle::symmetric_eigenvalues(a);
  const double scale = std::max(1e-300, a.frobenius());
  std::array<double, 3> got{r.pairs[0].value, r.pairs[1].value, r.pairs[2].value};
  std::sort(got.begin(), got.end(), std::greater<>());
  for (int i = 0; i < 3; ++i) CHECK(std::abs(got[i] - static_cast<double>(ref[i])) <= 1e-12 * scale);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(norm(r.pairs[i].vector) - 1.0) < 1e-12);
    CHECK(oracle::eigen_residual(a, r.pairs[i].value, r.pairs[i].vector) < 1e-11 * std::max(1.0, scale));
    for (int j = i + 1; j < 3; ++j) CHECK(std::abs(dot(r.pairs[i].vector, r.pairs[j].vector)) < 1e-9);
  }
  CHECK(std::abs(r.pairs[0].value) >= std::abs(r.pairs[1].value));
  CHECK(std::abs(r.pairs[1].value) >= std::abs(r.pairs[2].value));
}

}  // namespace

TEST_CASE("closed-form eigenvalues match the long-double cubic") {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 2000; ++n) {
    const Sym3 a = random_sym(rng, n % 3 == 0 ? 1e-4 : 10.0);
    check_decomposition(a, eigen_symmetric(a));
  }
}

TEST_CASE("clustered and repeated eigenvalues go through Jacobi") {
  SUBCASE("exact double root") {
    const Sym3 a = Sym3::diag(-2.0, -2.0, 0.5);
    const auto r = eigen_symmetric(a);
    check_decomposition(a, r);
  }
  SUBCASE("rotated near-double root") {
    // Q diag(-1, -1 - 1e-6, 3) Q^T with a non-trivial rotation.
    const double c = std::cos(0.3), s = std::sin(0.3);
    const double d[3] = {-1.0, -1.0 - 1e-6, 3.0};
    const double q[3][3] = {{c, -s, 0.0}, {s * c, c * c, -s}, {s * s, s * c, c}};
    Sym3 a;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double v = 0.0;
        for (int k = 0; k < 3; ++k) v += q[i][k] * d[k] * q[j][k];
        a.m[i][j] = v;
      }
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) a.set(i, j, 0.5 * (a.m[i][j] + a.m[j][i]));
    const auto r = eigen_symmetric(a);
    CHECK(r.used_jacobi);
    CHECK(r.converged);
    for (int i = 0; i < 3; ++i) CHECK(oracle::eigen_residual(a, r.pairs[i].value, r.pairs[i].vector) < 1e-12);
  }
  SUBCASE("zero matrix") {
    const auto r = eigen_symmetric(Sym3{});
    for (const auto& p : r.pairs) {
      CHECK(p.value == 0.0);
      CHECK(norm(p.vector) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("eigenvectors are invariant under power-of-two scaling") {
  std::mt19937_64 rng(3);
  for (int n = 0; n < 500; ++n) {
    const Sym3 a = random_sym(rng);
    const auto r1 = eigen_symmetric(a);
    for (double c : {2.0, 4.0, 0.25, 1024.0}) {
      const auto rc = eigen_symmetric(c * a);
      for (int i = 0; i < 3; ++i) {
        CHECK(rc.pairs[i].value == c * r1.pairs[i].value);
        CHECK(rc.pairs[i].vector == r1.pairs[i].vector);
      }
    }
  }
}

TEST_CASE("Jacobi alone agrees with the oracle") {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 300; ++n) {
    const Sym3 a = random_sym(rng);
    auto r = eigen_jacobi(a);
    CHECK(r.converged);
    for (auto& p : r.pairs) p.vector = normalized(p.vector);
    lindeberg_sort(r.pairs);
    check_decomposition(a, r);
  }
}

TEST_CASE("Lindeberg order and sign convention") {
  std::array<EigenPair, 3> pairs{EigenPair{0.5, {1, 0, 0}}, EigenPair{-3.0, {0, 1, 0}}, EigenPair{2.0, {0, 0, 1}}};
  lindeberg_sort(pairs);
  CHECK(pairs[0].value == -3.0);
  CHECK(pairs[1].value == 2.0);
  CHECK(pairs[2].value == 0.5);

  std::array<EigenPair, 3> tie{EigenPair{2.0, {1, 0, 0}}, EigenPair{-2.0, {0, 1, 0}}, EigenPair{1.0, {0, 0, 1}}};
  lindeberg_sort(tie);
  CHECK(tie[0].value == -2.0);

  CHECK(canonical_sign({0.1, -0.9, 0.2}) == Vec3{-0.1, 0.9, -0.2});
  CHECK(canonical_sign({0.1, 0.9, 0.2}) == Vec3{0.1, 0.9, 0.2});
}
