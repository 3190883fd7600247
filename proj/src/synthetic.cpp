#include "fingertrack/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "fingertrack/error.hpp"

namespace fingertrack {

namespace {

// SplitMix64: portable, so payload bytes do not depend on the standard
// library's distribution implementations.
class SeededUniform {
 public:
  explicit SeededUniform(std::uint64_t seed) : state_(seed) {}

  double next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }

  double symmetric(double half_width) { return (2.0 * next() - 1.0) * half_width; }

 private:
  std::uint64_t state_;
};

struct Segment {
  Vec3 a;
  Vec3 b;
  double amplitude = 1.0;
};

double distance_to_segment(const Vec3& p, const Segment& s) {
  const Vec3 ab = s.b - s.a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - s.a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (s.a + t * ab));
}

GridSpec grid_for(const SyntheticParams& p) {
  GridSpec spec;
  spec.dims = p.dims;
  spec.spacing = p.spacing;
  spec.height_axis = 2;
  spec.height_down = true;
  spec.origin = {0.0, 0.0, (p.dims[2] - 1) * p.spacing};
  return spec;
}

ScalarField render(const GridSpec& spec, const std::vector<Segment>& tubes, double sigma_world, int t) {
  std::vector<double> values(spec.cell_count(), 0.0);
  const double inv = 1.0 / (2.0 * sigma_world * sigma_world);
  for (int k = 0; k < spec.dims[2]; ++k)
    for (int j = 0; j < spec.dims[1]; ++j)
      for (int i = 0; i < spec.dims[0]; ++i) {
        const Vec3 p = spec.world({i, j, k});
        double f = 0.0;
        for (const auto& tube : tubes) {
          const double d = distance_to_segment(p, tube);
          f += tube.amplitude * std::exp(-d * d * inv);
        }
        values[spec.linear({i, j, k})] = f;
      }
  return ScalarField(spec, std::move(values), t);
}

}  // namespace

std::string to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::gaussian_ridge_line: return "gaussian_ridge_line";
    case SyntheticKind::twin_blob_merge: return "twin_blob_merge";
    case SyntheticKind::blob_split: return "blob_split";
    case SyntheticKind::branching_finger: return "branching_finger";
  }
  return "unknown";
}

SyntheticKind synthetic_kind_from_string(const std::string& name) {
  for (auto k : {SyntheticKind::gaussian_ridge_line, SyntheticKind::twin_blob_merge, SyntheticKind::blob_split,
                 SyntheticKind::branching_finger})
    if (to_string(k) == name) return k;
  throw ValidationError("unknown synthetic kind: " + name);
}

SyntheticParams SyntheticParams::defaults(SyntheticKind kind) {
  SyntheticParams p;
  p.kind = kind;
  switch (kind) {
    case SyntheticKind::gaussian_ridge_line:
      p.dims = {32, 32, 32};
      p.n_timesteps = 1;
      p.sigma = 2.5;
      break;
    case SyntheticKind::twin_blob_merge:
      p.dims = {32, 32, 48};
      p.n_timesteps = 3;
      p.sigma = 1.5;
      p.separation = 7.0;
      p.min_separation = 3.0;
      break;
    case SyntheticKind::blob_split:
      p.dims = {32, 32, 48};
      p.n_timesteps = 2;
      p.sigma = 1.5;
      p.separation = 4.0;
      p.min_separation = 4.0;
      break;
    case SyntheticKind::branching_finger:
      p.dims = {40, 40, 48};
      p.n_timesteps = 1;
      // Thin tubes: the r-cube core count saturates within 1% by r = 10 only
      // when the tube width is about one voxel.
      p.sigma = 0.75;
      break;
  }
  return p;
}

void SyntheticParams::validate() const {
  for (int d : dims)
    if (d < 3) throw ValidationError("synthetic dims must be >= 3");
  if (!(spacing > 0.0)) throw ValidationError("synthetic spacing must be positive");
  if (n_timesteps < 1) throw ValidationError("n_timesteps must be >= 1");
  if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
  if (!(amplitude > 0.0)) throw ValidationError("amplitude must be positive");
  if (jitter < 0.0 || jitter >= 0.5) throw ValidationError("jitter must lie in [0, 0.5)");
  if (kind == SyntheticKind::twin_blob_merge && n_timesteps < 2)
    throw ValidationError("twin_blob_merge needs at least 2 timesteps");
  if (kind == SyntheticKind::blob_split && n_timesteps < 2)
    throw ValidationError("blob_split needs at least 2 timesteps");
  if (separation < 0.0 || min_separation < 0.0) throw ValidationError("separations must be non-negative");
  if (tip_fraction <= 0.0 || tip_fraction > 1.0) throw ValidationError("tip_fraction must lie in (0, 1]");
  if (trunk_fraction <= 0.0 || trunk_fraction >= 1.0) throw ValidationError("trunk_fraction must lie in (0, 1)");
  for (double l : leg_lengths)
    if (!(l > 0.0)) throw ValidationError("leg lengths must be positive");
}

SyntheticParams synthetic_params_from_json(const nlohmann::json& j) {
  const auto kind = synthetic_kind_from_string(j.at("kind").get<std::string>());
  SyntheticParams p = SyntheticParams::defaults(kind);
  if (j.contains("dims")) {
    const auto d = j.at("dims").get<std::vector<int>>();
    if (d.size() != 3) throw ValidationError("synthetic dims must have 3 entries");
    p.dims = {d[0], d[1], d[2]};
  }
  p.spacing = j.value("spacing", p.spacing);
  p.n_timesteps = j.value("n_timesteps", p.n_timesteps);
  p.seed = j.value("seed", p.seed);
  p.amplitude = j.value("amplitude", p.amplitude);
  p.sigma = j.value("sigma", p.sigma);
  p.jitter = j.value("jitter", p.jitter);
  p.separation = j.value("separation", p.separation);
  p.min_separation = j.value("min_separation", p.min_separation);
  p.tip_fraction = j.value("tip_fraction", p.tip_fraction);
  p.trunk_fraction = j.value("trunk_fraction", p.trunk_fraction);
  if (j.contains("leg_lengths")) {
    const auto l = j.at("leg_lengths").get<std::vector<double>>();
    if (l.size() != 2) throw ValidationError("leg_lengths must have 2 entries");
    p.leg_lengths = {l[0], l[1]};
  }
  p.leg_spread = j.value("leg_spread", p.leg_spread);
  p.validate();
  return p;
}

nlohmann::json to_json(const SyntheticParams& p) {
  return {{"kind", to_string(p.kind)},
          {"dims", p.dims},
          {"spacing", p.spacing},
          {"n_timesteps", p.n_timesteps},
          {"seed", p.seed},
          {"amplitude", p.amplitude},
          {"sigma", p.sigma},
          {"jitter", p.jitter},
          {"separation", p.separation},
          {"min_separation", p.min_separation},
          {"tip_fraction", p.tip_fraction},
          {"trunk_fraction", p.trunk_fraction},
          {"leg_lengths", p.leg_lengths},
          {"leg_spread", p.leg_spread}};
}

SyntheticDataset generate_synthetic(const SyntheticParams& params) {
  params.validate();
  SyntheticDataset out;
  out.params = params;
  const GridSpec spec = grid_for(params);
  const double s = params.spacing;
  const double sigma = params.sigma * s;
  SeededUniform rng(params.seed);

  // Off-grid center: 0.2 voxel past a cell center, plus seeded jitter below 0.1.
  const double cx_idx = params.dims[0] / 2 + 0.2 + rng.symmetric(std::min(params.jitter, 0.1));
  const double cy_idx = params.dims[1] / 2 + 0.2 + rng.symmetric(std::min(params.jitter, 0.1));
  const double cx = cx_idx * s;
  const double cy = cy_idx * s;
  const double top = spec.height_of_layer(0);
  const double depth = (params.dims[2] - 1) * s;
  const double above = top + 10.0 * sigma;
  auto& gt = out.ground_truth;
  gt["kind"] = to_string(params.kind);

  switch (params.kind) {
    case SyntheticKind::gaussian_ridge_line: {
      std::vector<double> values(spec.cell_count());
      const double inv = 1.0 / (2.0 * sigma * sigma);
      for (int k = 0; k < params.dims[2]; ++k)
        for (int j = 0; j < params.dims[1]; ++j)
          for (int i = 0; i < params.dims[0]; ++i) {
            const Vec3 p = spec.world({i, j, k});
            const double dx = p.x - cx;
            const double dy = p.y - cy;
            values[spec.linear({i, j, k})] = params.amplitude * std::exp(-(dx * dx + dy * dy) * inv);
          }
      for (int t = 0; t < params.n_timesteps; ++t) out.fields.emplace_back(spec, values, t);
      gt["ridge_line"] = {{"x", cx}, {"y", cy}};
      gt["column"] = {static_cast<int>(std::lround(cx_idx)), static_cast<int>(std::lround(cy_idx))};
      gt["component_counts"] = std::vector<int>(params.n_timesteps, 1);
      break;
    }
    case SyntheticKind::twin_blob_merge:
    case SyntheticKind::blob_split: {
      const bool merging = params.kind == SyntheticKind::twin_blob_merge;
      const double tip = top - params.tip_fraction * depth;
      const int n = params.n_timesteps;
      std::vector<int> counts;
      nlohmann::json centers = nlohmann::json::array();
      for (int t = 0; t < n; ++t) {
        double half = 0.0;
        if (merging) {
          if (t < n - 1) {
            const double frac = n > 2 ? static_cast<double>(t) / (n - 2) : 0.0;
            half = params.separation + (params.min_separation - params.separation) * frac;
          }
        } else if (t > 0) {
          const double frac = n > 2 ? static_cast<double>(t - 1) / (n - 2) : 1.0;
          half = params.min_separation + (params.separation - params.min_separation) * frac;
        }
        const double jl = rng.symmetric(params.jitter);
        const double jr = rng.symmetric(params.jitter);
        const double xl = cx - (half + (half > 0.0 ? jl : 0.0)) * s;
        const double xr = cx + (half + (half > 0.0 ? jr : 0.0)) * s;
        std::vector<Segment> tubes{{{xl, cy, above}, {xl, cy, tip}, params.amplitude},
                                   {{xr, cy, above}, {xr, cy, tip}, params.amplitude}};
        out.fields.push_back(render(spec, tubes, sigma, t));
        counts.push_back(half > 0.0 ? 2 : 1);
        centers.push_back({{xl, cy}, {xr, cy}});
      }
      gt["component_counts"] = counts;
      gt["centers"] = centers;
      gt["tip_height"] = tip;
      nlohmann::json events = nlohmann::json::array();
      for (int t = 0; t + 1 < n; ++t) {
        if (counts[t] == 2 && counts[t + 1] == 1) events.push_back({{"t", t}, {"kind", "merge"}});
        if (counts[t] == 1 && counts[t + 1] == 2) events.push_back({{"t", t}, {"kind", "split"}});
      }
      gt["events"] = events;
      break;
    }
    case SyntheticKind::branching_finger: {
      const Vec3 junction{cx, cy, top - params.trunk_fraction * depth};
      std::vector<Segment> tubes{{{cx, cy, above}, junction, params.amplitude}};
      nlohmann::json legs = nlohmann::json::array();
      for (int leg = 0; leg < 2; ++leg) {
        const double len = params.leg_lengths[leg] * s;
        const double dir = leg == 0 ? 1.0 : -1.0;
        const Vec3 end{cx + dir * params.leg_spread * len + rng.symmetric(params.jitter) * s, cy, junction.z - len};
        tubes.push_back({junction, end, params.amplitude});
        legs.push_back({{"end", {end.x, end.y, end.z}}, {"length", len}});
      }
      // Layers where both legs are present and at least four widths apart.
      const double short_len = std::min(params.leg_lengths[0], params.leg_lengths[1]) * s;
      const double split_gap = 4.0 * sigma / (2.0 * params.leg_spread);
      gt["junction"] = {junction.x, junction.y, junction.z};
      gt["legs"] = legs;
      gt["expected_layer_components"] = {
          {"one", {top - 2.0 * sigma, junction.z + 3.0 * sigma}},
          {"two", {junction.z - split_gap, junction.z - short_len + 2.0 * sigma}},
      };
      gt["finger_height"] = top - (junction.z - std::max(params.leg_lengths[0], params.leg_lengths[1]) * s);
      for (int t = 0; t < params.n_timesteps; ++t) out.fields.push_back(render(spec, tubes, sigma, t));
      gt["component_counts"] = std::vector<int>(params.n_timesteps, 1);
      break;
    }
  }
  gt["params"] = to_json(params);
  return out;
}

}  // namespace fingertrack
