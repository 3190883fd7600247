#include "fingertrack/track.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "fingertrack/error.hpp"

namespace fingertrack {

std::string to_string(LinkKind k) {
  switch (k) {
    case LinkKind::grow: return "grow";
    case LinkKind::merge: return "merge";
    case LinkKind::split: return "split";
    case LinkKind::generic: return "generic";
  }
  return "generic";
}

LinkKind link_kind_from_string(const std::string& name) {
  if (name == "grow") return LinkKind::grow;
  if (name == "merge") return LinkKind::merge;
  if (name == "split") return LinkKind::split;
  if (name == "generic") return LinkKind::generic;
  throw ValidationError("unknown link kind '" + name + "'");
}

std::string to_string(WeightMode m) { return m == WeightMode::count ? "count" : "density"; }

WeightMode weight_mode_from_string(const std::string& name) {
  if (name == "count") return WeightMode::count;
  if (name == "density") return WeightMode::density;
  throw ValidationError("unknown weight mode '" + name + "'");
}

void TrackingParams::validate() const {
  if (!(overlap_fraction > 0.0 && overlap_fraction <= 1.0))
    throw ValidationError("tracking.overlap_fraction must lie in (0, 1]");
}

std::vector<TrackLink> overlap_links(const FingerLabelField& labels_t, const FingerLabelField& labels_t1, int t,
                                     WeightMode mode, const ScalarField* field_t, const ScalarField* field_t1) {
  if (!(labels_t.spec == labels_t1.spec)) throw ValidationError("label fields on different grids");
  if (mode == WeightMode::density && (!field_t || !field_t1))
    throw ValidationError("density weights need both density fields");
  std::map<std::pair<std::uint32_t, std::uint32_t>, TrackLink> by_pair;
  for (std::size_t q = 0; q < labels_t.labels.size(); ++q) {
    const std::uint32_t a = labels_t.labels[q];
    const std::uint32_t b = labels_t1.labels[q];
    if (a == 0 || b == 0) continue;
    TrackLink& l = by_pair[{a, b}];
    l.t = t;
    l.a = a;
    l.b = b;
    l.shared_cells.push_back(q);
    l.weight += mode == WeightMode::count ? 1.0 : std::min(field_t->at(q), field_t1->at(q));
  }
  std::vector<TrackLink> out;
  out.reserve(by_pair.size());
  for (auto& [key, l] : by_pair) out.push_back(std::move(l));
  return out;
}

double finger_volume(const FingerLabelField& labels, std::uint32_t id, WeightMode mode, const ScalarField* field) {
  const auto& cells = labels.volume_of(id);
  if (mode == WeightMode::count) return static_cast<double>(cells.size());
  if (!field) throw ValidationError("density volume needs the density field");
  double acc = 0.0;
  for (std::size_t q : cells) acc += field->at(q);
  return acc;
}

void classify_links(std::vector<TrackLink>& links, const std::vector<double>& volumes_t, double fraction) {
  std::map<std::uint32_t, std::vector<std::size_t>> out_of, in_of;
  for (std::size_t i = 0; i < links.size(); ++i) {
    out_of[links[i].a].push_back(i);
    in_of[links[i].b].push_back(i);
  }
  auto vol = [&](std::uint32_t a) { return volumes_t.at(a - 1); };
  auto preserved = [&](const TrackLink& l) { return l.weight >= fraction * vol(l.a); };
  for (auto& l : links) {
    l.ratio = vol(l.a) > 0.0 ? l.weight / vol(l.a) : 0.0;
    const auto& incoming = in_of[l.b];
    const auto& outgoing = out_of[l.a];
    const bool merge = incoming.size() >= 2 &&
                       std::all_of(incoming.begin(), incoming.end(), [&](std::size_t i) { return preserved(links[i]); });
    const bool split = outgoing.size() >= 2 &&
                       std::none_of(outgoing.begin(), outgoing.end(), [&](std::size_t i) { return preserved(links[i]); });
    if (merge)
      l.kind = LinkKind::merge;
    else if (split)
      l.kind = LinkKind::split;
    else if (preserved(l))
      l.kind = LinkKind::grow;
    else
      l.kind = LinkKind::generic;
  }
}

double distance_to_polyline(const std::vector<Vec3>& polyline, const Vec3& p) {
  if (polyline.empty()) return std::numeric_limits<double>::infinity();
  if (polyline.size() == 1) return norm(p - polyline.front());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const Vec3 a = polyline[i - 1];
    const Vec3 ab = polyline[i] - a;
    const double len2 = dot(ab, ab);
    const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, norm(p - (a + t * ab)));
  }
  return best;
}

int nearest_branch(const BranchDecomposition& bd, const Vec3& p) {
  int best = -1;
  double best_d = 0.0;
  for (const auto& b : bd.branches) {
    const double d = distance_to_polyline(b.polyline, p);
    if (best < 0 || d < best_d) {
      best = b.id;
      best_d = d;
    }
  }
  return best;
}

std::vector<BranchCorrespondence> branch_correspondence(const TrackLink& link, const BranchDecomposition& branches_t,
                                                        const BranchDecomposition& branches_t1, const GridSpec& spec) {
  std::map<std::pair<int, int>, std::size_t> counts;
  for (std::size_t q : link.shared_cells) {
    const Vec3 p = spec.world(spec.voxel(q));
    ++counts[{nearest_branch(branches_t, p), nearest_branch(branches_t1, p)}];
  }
  std::vector<BranchCorrespondence> out;
  for (const auto& [key, c] : counts) out.push_back({key.first, key.second, c});
  return out;
}

}  // namespace fingertrack
