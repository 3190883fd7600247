#include "fingertrack/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef FINGERTRACK_HAVE_OPENMP
#include <omp.h>
#endif

#include "fingertrack/error.hpp"

namespace fingertrack {

std::string to_string(BoundaryPolicy p) { return p == BoundaryPolicy::clamp ? "clamp" : "skip"; }

BoundaryPolicy boundary_policy_from_string(const std::string& name) {
  if (name == "clamp") return BoundaryPolicy::clamp;
  if (name == "skip") return BoundaryPolicy::skip;
  throw ValidationError("unknown boundary policy '" + name + "'");
}

std::string to_string(ExtremeKind k) {
  switch (k) {
    case ExtremeKind::empty: return "empty";
    case ExtremeKind::line: return "line";
    case ExtremeKind::plane: return "plane";
    case ExtremeKind::all_space: return "all_space";
  }
  return "empty";
}

void DetectionParams::validate(double s) const {
  if (!(r >= 1.0) || !std::isfinite(r)) throw ValidationError("detection.r must be >= 1");
  const double step = spacing_for(s);
  if (!(step > 0.0) || step > s) throw ValidationError("detection.h must lie in (0, s]");
  if (!(eigen_tolerance >= 0.0)) throw ValidationError("detection.eigen_tolerance must be >= 0");
  if (!(rank_tolerance >= 0.0)) throw ValidationError("detection.rank_tolerance must be >= 0");
}

namespace {

bool on_boundary(const GridSpec& spec, const VoxelId& v) {
  for (int a = 0; a < 3; ++a)
    if (v[a] == 0 || v[a] == spec.dims[a] - 1) return true;
  return false;
}

}  // namespace

Derivatives estimate_derivatives(const ScalarField& field, const VoxelId& v, double h, BoundaryPolicy policy) {
  const GridSpec& spec = field.spec();
  if (!spec.contains(v)) throw OutOfBounds("voxel outside grid");
  const double s = spec.spacing;
  if (!(h > 0.0) || h > s) throw ValidationError("finite-difference step must lie in (0, s]");
  if (policy == BoundaryPolicy::skip && on_boundary(spec, v)) throw OutOfBounds("boundary voxel under skip policy");

  const double f0 = field.at(spec.linear(v));
  const double a = h / s;
  // Delta of the sample at index offset o, scaled to step h.
  auto delta = [&](int di, int dj, int dk) {
    const int i = std::clamp(v.i + di, 0, spec.dims[0] - 1);
    const int j = std::clamp(v.j + dj, 0, spec.dims[1] - 1);
    const int k = std::clamp(v.k + dk, 0, spec.dims[2] - 1);
    const double d = field.at(i, j, k) - f0;
    return a == 1.0 ? d : a * d;
  };

  Derivatives d;
  d.f0 = f0;
  const double sign[3] = {spec.axis_sign(0), spec.axis_sign(1), spec.axis_sign(2)};
  for (int ax = 0; ax < 3; ++ax) {
    int p[3] = {0, 0, 0}, m[3] = {0, 0, 0};
    p[ax] = 1;
    m[ax] = -1;
    const double dp = delta(p[0], p[1], p[2]);
    const double dm = delta(m[0], m[1], m[2]);
    // Index direction and world direction differ on a downward height axis.
    d.grad[ax] = sign[ax] * (dp - dm) / (2.0 * h);
    d.hess.set(ax, ax, (dp + dm) / (h * h));
  }
  for (int ax = 0; ax < 3; ++ax) {
    for (int bx = ax + 1; bx < 3; ++bx) {
      auto corner = [&](int sa, int sb) {
        int o[3] = {0, 0, 0};
        o[ax] += sa;
        o[bx] += sb;
        return delta(o[0], o[1], o[2]);
      };
      const double mixed = (corner(1, 1) - corner(1, -1) - corner(-1, 1) + corner(-1, -1)) / (4.0 * h * h);
      d.hess.set(ax, bx, sign[ax] * sign[bx] * mixed);
    }
  }
  return d;
}

Vec3 estimate_gradient(const ScalarField& field, const VoxelId& v, double h, BoundaryPolicy policy) {
  return estimate_derivatives(field, v, h, policy).grad;
}

Sym3 estimate_hessian(const ScalarField& field, const VoxelId& v, double h, BoundaryPolicy policy) {
  return estimate_derivatives(field, v, h, policy).hess;
}

LocalModel build_local_model(const Derivatives& d, const VoxelId& v, const Vec3& position, double spacing, double h) {
  LocalModel m;
  m.center = v;
  m.position = position;
  m.spacing = spacing;
  m.step = h;
  m.f0 = d.f0;
  m.grad = d.grad;
  m.hess = d.hess;
  const SymEigenResult e = eigen_symmetric(d.hess);
  m.eigen = e.pairs;
  m.eigen_converged = e.converged;
  return m;
}

LocalModel build_local_model(const ScalarField& field, const VoxelId& v, double h, BoundaryPolicy policy) {
  return build_local_model(estimate_derivatives(field, v, h, policy), v, field.spec().world(v), field.spec().spacing,
                           h);
}

ExtremeSet solve_extreme_set(const LocalModel& model, double rank_tolerance) {
  const double hnorm = std::abs(model.eigen[0].value);
  const double tol = rank_tolerance * hnorm;
  const double btol = rank_tolerance * norm(model.grad);

  Vec3 rows[2];
  double rhs[2];
  for (int i = 0; i < 2; ++i) {
    rows[i] = model.hess * model.eigen[i].vector;
    rhs[i] = -dot(model.eigen[i].vector, model.grad);
  }
  int first = norm(rows[1]) > norm(rows[0]) ? 1 : 0;
  const int second = 1 - first;

  ExtremeSet out;
  const double n1 = norm(rows[first]);
  if (!(n1 > tol) || n1 == 0.0) {
    out.rank = 0;
    out.kind = std::max(std::abs(rhs[0]), std::abs(rhs[1])) <= btol ? ExtremeKind::all_space : ExtremeKind::empty;
    return out;
  }
  const Vec3 q1 = (1.0 / n1) * rows[first];
  const double c1 = rhs[first] / n1;
  const double proj = dot(rows[second], q1);
  const Vec3 r2 = rows[second] - proj * q1;
  const double b2 = rhs[second] - proj * c1;
  const double n2 = norm(r2);
  if (!(n2 > tol) || n2 == 0.0) {
    out.rank = 1;
    if (std::abs(b2) <= btol) {
      out.kind = ExtremeKind::plane;
      out.direction = q1;
      out.offset = c1;
      out.point = c1 * q1;
    } else {
      out.kind = ExtremeKind::empty;
    }
    return out;
  }
  const Vec3 q2 = (1.0 / n2) * r2;
  const double c2 = b2 / n2;
  out.rank = 2;
  out.kind = ExtremeKind::line;
  out.point = c1 * q1 + c2 * q2;
  out.direction = canonical_sign(normalized(cross(q1, q2)));
  return out;
}

std::optional<Vec3> voxel_contains_extreme(const LocalModel& model, const ExtremeSet& set, double r) {
  const double half = 0.5 * r * model.spacing;
  switch (set.kind) {
    case ExtremeKind::empty:
      return std::nullopt;
    case ExtremeKind::all_space:
      return Vec3{};
    case ExtremeKind::line: {
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (int a = 0; a < 3; ++a) {
        const double p = set.point[a];
        const double d = set.direction[a];
        if (d == 0.0) {
          if (std::abs(p) > half) return std::nullopt;
          continue;
        }
        const double t1 = (-half - p) / d;
        const double t2 = (half - p) / d;
        lo = std::max(lo, std::min(t1, t2));
        hi = std::min(hi, std::max(t1, t2));
      }
      if (lo > hi) return std::nullopt;
      const double t = std::clamp(0.0, lo, hi);
      Vec3 w = set.point + t * set.direction;
      // Rounding in p + t d may nudge a boundary witness just outside.
      for (int a = 0; a < 3; ++a) w[a] = std::clamp(w[a], -half, half);
      return w;
    }
    case ExtremeKind::plane: {
      const Vec3& n = set.direction;
      const double l1 = std::abs(n.x) + std::abs(n.y) + std::abs(n.z);
      if (std::abs(set.offset) > half * l1) return std::nullopt;
      bool inside = true;
      for (int a = 0; a < 3; ++a) inside = inside && std::abs(set.point[a]) <= half;
      if (inside) return set.point;
      // The plane meets the segment from the center to the corner maximizing
      // sign(offset) * n . x.
      const double t = set.offset / (half * l1);
      Vec3 w;
      for (int a = 0; a < 3; ++a) w[a] = t * half * (n[a] >= 0.0 ? 1.0 : -1.0);
      return w;
    }
  }
  return std::nullopt;
}

bool passes_condition_two(const LocalModel& model, double eigen_tolerance) {
  const double tol = eigen_tolerance * std::abs(model.eigen[0].value);
  return model.eigen[0].value < -tol && model.eigen[1].value < -tol;
}

bool is_ridge_point(const LocalModel& model, const Vec3&, double eigen_tolerance) {
  return passes_condition_two(model, eigen_tolerance);
}

std::size_t RidgeMask::count(VoxelLabel l) const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l)); }

std::vector<std::uint8_t> RidgeMask::bytes() const {
  std::vector<std::uint8_t> out(labels.size());
  std::transform(labels.begin(), labels.end(), out.begin(), [](VoxelLabel l) { return static_cast<std::uint8_t>(l); });
  return out;
}

namespace {

struct Classifier {
  const ScalarField& field;
  DetectionParams params;
  double core_step;  // h for the core model
  double core_r;     // cube factor applied to the core model

  // Returns the label and, on eigen failure, a warning.
  VoxelLabel operator()(const VoxelId& v, std::string& warning) const {
    const GridSpec& spec = field.spec();
    const double s = spec.spacing;
    if (params.boundary == BoundaryPolicy::skip && on_boundary(spec, v)) return VoxelLabel::non_ridge;
    const Vec3 pos = spec.world(v);
    const LocalModel ms = build_local_model(estimate_derivatives(field, v, s, params.boundary), v, pos, s, s);
    if (!ms.eigen_converged) {
      warning = "eigen solver did not converge at voxel (" + std::to_string(v.i) + "," + std::to_string(v.j) + "," +
                std::to_string(v.k) + ")";
      return VoxelLabel::non_ridge;
    }
    if (!passes_condition_two(ms, params.eigen_tolerance)) return VoxelLabel::non_ridge;
    const ExtremeSet es = solve_extreme_set(ms, params.rank_tolerance);
    if (voxel_contains_extreme(ms, es, 1.0)) return VoxelLabel::ridge;
    if (core_step == s) return voxel_contains_extreme(ms, es, core_r) ? VoxelLabel::core_only : VoxelLabel::non_ridge;

    const LocalModel mh =
        build_local_model(estimate_derivatives(field, v, core_step, params.boundary), v, pos, s, core_step);
    if (!mh.eigen_converged || !passes_condition_two(mh, params.eigen_tolerance)) return VoxelLabel::non_ridge;
    const ExtremeSet eh = solve_extreme_set(mh, params.rank_tolerance);
    return voxel_contains_extreme(mh, eh, core_r) ? VoxelLabel::core_only : VoxelLabel::non_ridge;
  }
};

RidgeMask make_mask(const ScalarField& field, const DetectionParams& params) {
  RidgeMask mask;
  mask.spec = field.spec();
  mask.params = params;
  mask.labels.assign(field.spec().cell_count(), VoxelLabel::non_ridge);
  return mask;
}

RidgeMask run_serial(const ScalarField& field, const DetectionParams& params, const Classifier& classify) {
  RidgeMask mask = make_mask(field, params);
  const GridSpec& spec = field.spec();
  for (std::size_t n = 0; n < spec.cell_count(); ++n) {
    std::string warning;
    mask.labels[n] = classify(spec.voxel(n), warning);
    if (!warning.empty()) mask.warnings.push_back(std::move(warning));
  }
  return mask;
}

RidgeMask run_parallel(const ScalarField& field, const DetectionParams& params, const Classifier& classify,
                       int workers) {
#ifdef FINGERTRACK_HAVE_OPENMP
  RidgeMask mask = make_mask(field, params);
  const GridSpec& spec = field.spec();
  const int nz = spec.dims[2];
  const auto plane = static_cast<std::size_t>(spec.dims[0]) * static_cast<std::size_t>(spec.dims[1]);
  std::vector<std::vector<std::string>> layer_warnings(static_cast<std::size_t>(nz));
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int k = 0; k < nz; ++k) {
    for (std::size_t n = plane * static_cast<std::size_t>(k); n < plane * static_cast<std::size_t>(k + 1); ++n) {
      std::string warning;
      mask.labels[n] = classify(spec.voxel(n), warning);
      if (!warning.empty()) layer_warnings[static_cast<std::size_t>(k)].push_back(std::move(warning));
    }
  }
  for (auto& w : layer_warnings)
    for (auto& s : w) mask.warnings.push_back(std::move(s));
  return mask;
#else
  (void)workers;
  return run_serial(field, params, classify);
#endif
}

}  // namespace

RidgeMask detect_ridge_voxels(const ScalarField& field, const DetectionParams& params, int workers) {
  params.validate(field.spec().spacing);
  return run_parallel(field, params, Classifier{field, params, field.spec().spacing, params.r}, workers);
}

RidgeMask detect_ridge_voxels_serial(const ScalarField& field, const DetectionParams& params) {
  params.validate(field.spec().spacing);
  return run_serial(field, params, Classifier{field, params, field.spec().spacing, params.r});
}

RidgeMask detect_with_spacing(const ScalarField& field, double h, const DetectionParams& params, int workers) {
  DetectionParams p = params;
  p.h = h;
  p.validate(field.spec().spacing);
  return run_parallel(field, p, Classifier{field, p, h, p.r}, workers);
}

RidgeMask detect(const ScalarField& field, const DetectionParams& params, int workers) {
  const double s = field.spec().spacing;
  if (params.h && *params.h != s) return detect_with_spacing(field, *params.h, params, workers);
  return detect_ridge_voxels(field, params, workers);
}

}  // namespace fingertrack
