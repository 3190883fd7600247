#include <doctest.h>

#include <array>

#include "fingertrack/error.hpp"
#include "fingertrack/track.hpp"

using namespace fingertrack;

namespace {

GridSpec line_grid(int n) {
  GridSpec g;
  g.dims = {n, 3, 3};  // the cases only use the first row
  return g;
}

FingerLabelField labels_from(const GridSpec& g, const std::vector<std::uint32_t>& l) {
  FingerLabelField f;
  f.spec = g;
  f.labels = l;
  f.labels.resize(g.cell_count(), 0);
  for (auto id : l) f.finger_count = std::max(f.finger_count, id);
  f.core.resize(f.finger_count);
  f.volume.resize(f.finger_count);
  for (std::size_t q = 0; q < l.size(); ++q)
    if (l[q]) {
      f.volume[l[q] - 1].push_back(q);
      f.core[l[q] - 1].push_back(q);
    }
  return f;
}

std::vector<double> volumes(const FingerLabelField& f) {
  std::vector<double> v;
  for (std::uint32_t id = 1; id <= f.finger_count; ++id) v.push_back(finger_volume(f, id));
  return v;
}

const TrackLink& find(const std::vector<TrackLink>& ls, std::uint32_t a, std::uint32_t b) {
  for (const auto& l : ls)
    if (l.a == a && l.b == b) return l;
  FAIL("missing link");
  return ls.front();
}

}  // namespace

TEST_CASE("overlap counts shared cells") {
  const GridSpec g = line_grid(10);
  const auto a = labels_from(g, {1, 1, 1, 1, 0, 2, 2, 2, 0, 0});
  const auto b = labels_from(g, {0, 1, 1, 2, 2, 2, 2, 0, 0, 3});
  const auto links = overlap_links(a, b, 4);
  REQUIRE(links.size() == 3);
  CHECK(find(links, 1, 1).weight == 2.0);
  CHECK(find(links, 1, 1).shared_cells == std::vector<std::size_t>{1, 2});
  CHECK(find(links, 1, 2).weight == 1.0);
  CHECK(find(links, 2, 2).weight == 2.0);
  for (const auto& l : links) CHECK(l.t == 4);
  for (std::size_t i = 1; i < links.size(); ++i)
    CHECK(std::pair(links[i - 1].a, links[i - 1].b) < std::pair(links[i].a, links[i].b));
}

TEST_CASE("density mode sums the smaller value") {
  const GridSpec g = line_grid(4);
  const auto a = labels_from(g, {1, 1, 1, 0});
  const auto b = labels_from(g, {0, 1, 1, 1});
  std::vector<double> va(g.cell_count(), 0.0), vb(g.cell_count(), 0.0);
  for (std::size_t q = 0; q < 4; ++q) {
    va[q] = std::array{1.0, 2.0, 5.0, 0.0}[q];
    vb[q] = std::array{0.0, 3.0, 1.5, 4.0}[q];
  }
  const ScalarField fa(g, va);
  const ScalarField fb(g, vb);
  const auto links = overlap_links(a, b, 0, WeightMode::density, &fa, &fb);
  REQUIRE(links.size() == 1);
  CHECK(links[0].weight == doctest::Approx(2.0 + 1.5));
  CHECK(finger_volume(a, 1, WeightMode::density, &fa) == doctest::Approx(8.0));
  CHECK_THROWS_AS(overlap_links(a, b, 0, WeightMode::density), ValidationError);
}

TEST_CASE("grow, merge, split and generic") {
  const GridSpec g = line_grid(12);
  SUBCASE("grow") {
    const auto a = labels_from(g, {1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0});
    const auto b = labels_from(g, {1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0});
    auto links = overlap_links(a, b);
    classify_links(links, volumes(a));
    REQUIRE(links.size() == 1);
    CHECK(links[0].kind == LinkKind::grow);
    CHECK(links[0].ratio == doctest::Approx(1.0));
  }
  SUBCASE("merge") {
    const auto a = labels_from(g, {1, 1, 1, 1, 0, 2, 2, 2, 2, 0, 0, 0});
    const auto b = labels_from(g, {1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0});
    auto links = overlap_links(a, b);
    classify_links(links, volumes(a));
    REQUIRE(links.size() == 2);
    for (const auto& l : links) CHECK(l.kind == LinkKind::merge);
  }
  SUBCASE("merge needs every incoming link to reach the fraction") {
    const auto a = labels_from(g, {1, 1, 1, 1, 0, 2, 2, 2, 2, 0, 0, 0});
    const auto b = labels_from(g, {1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0});
    auto links = overlap_links(a, b);
    classify_links(links, volumes(a));
    CHECK(find(links, 1, 1).kind == LinkKind::grow);
    CHECK(find(links, 2, 1).kind == LinkKind::generic);
    CHECK(find(links, 2, 1).ratio == doctest::Approx(0.25));
  }
  SUBCASE("split") {
    const auto a = labels_from(g, {1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0});
    const auto b = labels_from(g, {1, 1, 1, 1, 0, 2, 2, 2, 0, 0, 0, 0});
    auto links = overlap_links(a, b);
    classify_links(links, volumes(a));
    REQUIRE(links.size() == 2);
    for (const auto& l : links) CHECK(l.kind == LinkKind::split);
    CHECK(find(links, 1, 1).ratio + find(links, 1, 2).ratio == doctest::Approx(7.0 / 8.0));
  }
  SUBCASE("a dominant child is a grow, not a split") {
    const auto b = labels_from(g, {1, 1, 1, 1, 1, 1, 1, 0, 2, 0, 0, 0});
    const auto a2 = labels_from(g, {1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0});
    auto links = overlap_links(a2, b);
    classify_links(links, volumes(a2));
    CHECK(find(links, 1, 1).kind == LinkKind::grow);
    CHECK(find(links, 1, 2).kind == LinkKind::generic);
  }
  TrackingParams bad;
  bad.overlap_fraction = 1.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK(link_kind_from_string("merge") == LinkKind::merge);
  CHECK(weight_mode_from_string(to_string(WeightMode::density)) == WeightMode::density);
}

TEST_CASE("distance to a polyline") {
  const std::vector<Vec3> p{{0, 0, 0}, {2, 0, 0}, {2, 2, 0}};
  CHECK(distance_to_polyline(p, {1, 1, 0}) == doctest::Approx(1.0));
  CHECK(distance_to_polyline(p, {-3, 0, 4}) == doctest::Approx(5.0));
  CHECK(distance_to_polyline(p, {2, 1, 0}) == doctest::Approx(0.0));
  CHECK(distance_to_polyline({{1, 1, 1}}, {1, 1, 3}) == doctest::Approx(2.0));
}

TEST_CASE("branch correspondence splits the shared cells") {
  GridSpec g;
  g.dims = {6, 1, 1};
  BranchDecomposition left, right;
  Branch b0, b1;
  b0.polyline = {{0, 0, 0}, {0, 0, 1}};
  b1.id = 1;
  b1.polyline = {{5, 0, 0}, {5, 0, 1}};
  left.branches = {b0, b1};
  right.branches = {b0};
  TrackLink l;
  l.shared_cells = {0, 1, 2, 3, 4, 5};
  l.weight = 6;
  const auto c = branch_correspondence(l, left, right, g);
  std::size_t sum = 0;
  for (const auto& x : c) {
    sum += x.count;
    CHECK(x.branch_b == 0);
  }
  CHECK(sum == 6);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == BranchCorrespondence{0, 0, 3});  // x = 0, 1, 2 are nearer branch 0
  CHECK(c[1] == BranchCorrespondence{1, 0, 3});
  CHECK(nearest_branch(left, {2.5, 0, 0}) == 0);  // equidistant: smaller id
}
