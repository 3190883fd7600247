#include <doctest.h>

#include <random>
#include <set>

#include "fingertrack/branch.hpp"
#include "fingertrack/error.hpp"
#include "oracles.hpp"

using namespace fingertrack;

TEST_CASE("the first branch is the exhaustive longest downward path") {
  std::mt19937_64 rng(77);
  for (int n = 0; n < 100; ++n) {
    const SkeletonGraph g = oracle::random_skeleton(rng, 2 + n % 11, n % 3);
    const oracle::PathChoice want = oracle::exhaustive_longest_path(g);
    const DownwardPath got = longest_downward_path(g, std::vector<char>(g.arcs.size(), 1));
    CHECK(got.nodes == want.nodes);
    CHECK(got.extent == doctest::Approx(want.extent));
    const BranchDecomposition bd = extract_branches(g);
    REQUIRE(!bd.branches.empty());
    CHECK(bd.principal == 0);
    CHECK(bd.branches[0].nodes == want.nodes);
    CHECK(bd.branches[0].persistence == doctest::Approx(want.extent));
  }
}

TEST_CASE("branches partition the arcs and the search reaches all of them") {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 100; ++n) {
    const SkeletonGraph g = oracle::random_skeleton(rng, 2 + n % 15, n % 4);
    const BranchDecomposition bd = extract_branches(g);
    std::vector<int> used(g.arcs.size(), 0);
    for (std::size_t i = 0; i < bd.branches.size(); ++i) {
      const Branch& b = bd.branches[i];
      CHECK(b.id == static_cast<int>(i));
      REQUIRE(b.arcs.size() + 1 == b.nodes.size());
      for (std::size_t k = 0; k < b.arcs.size(); ++k) {
        const SkeletonArc& a = g.arcs[b.arcs[k]];
        CHECK(a.u == b.nodes[k]);
        CHECK(a.v == b.nodes[k + 1]);
        ++used[b.arcs[k]];
      }
      CHECK(b.top_height >= b.bottom_height);
      CHECK(b.persistence == doctest::Approx(b.top_height - b.bottom_height));
      CHECK(branch_height(b) == doctest::Approx(b.persistence));
      if (i > 0) CHECK(b.persistence <= bd.branches[i - 1].persistence + 1e-12);
    }
    for (int u : used) CHECK(u == 1);
    std::vector<int> order = bd.discovery_order;
    CHECK(order.size() == bd.branches.size());
    CHECK(order.front() == bd.principal);
    std::sort(order.begin(), order.end());
    for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == static_cast<int>(i));
    for (const auto& c : bd.connections) {
      const auto& na = bd.branches[c.branch_a].nodes;
      const auto& nb = bd.branches[c.branch_b].nodes;
      CHECK(std::find(na.begin(), na.end(), c.node) != na.end());
      CHECK(std::find(nb.begin(), nb.end(), c.node) != nb.end());
      CHECK(c.height == doctest::Approx(g.nodes[c.node].height));
    }
  }
}

TEST_CASE("empty skeletons are rejected and unavailable arcs give an empty path") {
  CHECK_THROWS_AS(extract_branches(SkeletonGraph{}), ValidationError);
  std::mt19937_64 rng(1);
  const SkeletonGraph g = oracle::random_skeleton(rng, 5, 0);
  CHECK(longest_downward_path(g, std::vector<char>(g.arcs.size(), 0)).nodes.empty());
}
