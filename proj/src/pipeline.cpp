#include "fingertrack/pipeline.hpp"

#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <set>

#include "fingertrack/error.hpp"

#ifdef FINGERTRACK_HAVE_OPENMP
#include <omp.h>
#endif

#ifndef FINGERTRACK_VERSION
#define FINGERTRACK_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace fingertrack {

std::string code_version() { return FINGERTRACK_VERSION; }

// ---- config ----

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& block) {
  if (!j.is_object()) throw ValidationError("config block '" + block + "' must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ValidationError("unknown key '" + key + "' in config block '" + block + "'");
}

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
json vec2_json(const Vec2& v) { return json::array({v.x, v.y}); }

}  // namespace

void PipelineConfig::validate() const {
  if (input.has_value() == synth.has_value()) throw ValidationError("config needs exactly one of io.input and synth");
  if (synth) synth->validate();
  if (trim) trim->validate();
  tracking.validate();
  layout.validate();
  if (timesteps && (timesteps->first < 0 || timesteps->second < timesteps->first))
    throw ValidationError("timestep range must satisfy 0 <= a <= b");
  if (workers < 0) throw ValidationError("workers must be >= 0");
  if (synth) {
    detection.validate(synth->spacing);
  } else if (detection.r < 1.0) {
    throw ValidationError("detection.r must be >= 1");
  }
}

std::pair<int, int> parse_timestep_range(const std::string& text) {
  const auto checked = [&](int a, int b) {
    if (a < 0 || b < a) throw ValidationError("timestep range '" + text + "' must satisfy 0 <= a <= b");
    return std::pair{a, b};
  };
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      const int a = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return checked(a, a);
    }
    const std::string left = text.substr(0, dots), right = text.substr(dots + 2);
    const int a = std::stoi(left, &used);
    if (used != left.size()) throw std::invalid_argument(text);
    const int b = std::stoi(right, &used);
    if (used != right.size()) throw std::invalid_argument(text);
    return checked(a, b);
  } catch (const std::logic_error&) {
    throw ValidationError("malformed timestep range '" + text + "' (expected a..b)");
  }
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  check_keys(j, {"detection", "segmentation", "trim", "tracking", "layout", "io", "synth", "timesteps", "workers"},
             "root");
  try {
    if (j.contains("synth") && !j["synth"].is_null()) c.synth = synthetic_params_from_json(j["synth"]);
    if (j.contains("detection")) {
      const json& d = j["detection"];
      check_keys(d, {"r", "h", "boundary", "eigen_tolerance", "rank_tolerance"}, "detection");
      c.detection.r = d.value("r", c.detection.r);
      if (d.contains("h") && !d["h"].is_null()) c.detection.h = d["h"].get<double>();
      if (d.contains("boundary")) c.detection.boundary = boundary_policy_from_string(d["boundary"].get<std::string>());
      c.detection.eigen_tolerance = d.value("eigen_tolerance", c.detection.eigen_tolerance);
      c.detection.rank_tolerance = d.value("rank_tolerance", c.detection.rank_tolerance);
    }
    if (j.contains("segmentation")) {
      const json& s = j["segmentation"];
      check_keys(s, {"top_layer_depth", "density_floor", "core_connectivity", "flood_connectivity"}, "segmentation");
      if (s.contains("top_layer_depth") && !s["top_layer_depth"].is_null())
        c.segmentation.top_layer_depth = s["top_layer_depth"].get<double>();
      c.segmentation.density_floor = s.value("density_floor", c.segmentation.density_floor);
      if (s.contains("core_connectivity"))
        c.segmentation.core_connectivity = connectivity_from_string(s["core_connectivity"].get<std::string>());
      if (s.contains("flood_connectivity"))
        c.segmentation.flood_connectivity = connectivity_from_string(s["flood_connectivity"].get<std::string>());
    }
    if (j.contains("trim") && !j["trim"].is_null()) {
      const json& t = j["trim"];
      check_keys(t, {"min_branch_persistence", "min_cycle_persistence"}, "trim");
      TrimParams p = TrimParams::defaults(c.synth ? c.synth->spacing : 1.0);
      p.min_branch_persistence = t.value("min_branch_persistence", p.min_branch_persistence);
      p.min_cycle_persistence = t.value("min_cycle_persistence", p.min_cycle_persistence);
      c.trim = p;
    }
    if (j.contains("tracking")) {
      const json& t = j["tracking"];
      check_keys(t, {"overlap_fraction", "weight_mode"}, "tracking");
      c.tracking.overlap_fraction = t.value("overlap_fraction", c.tracking.overlap_fraction);
      if (t.contains("weight_mode")) c.tracking.weight_mode = weight_mode_from_string(t["weight_mode"].get<std::string>());
    }
    if (j.contains("layout")) {
      const json& l = j["layout"];
      check_keys(l, {"max_rounds", "min_opacity", "colors"}, "layout");
      c.layout.max_rounds = l.value("max_rounds", c.layout.max_rounds);
      c.layout.min_opacity = l.value("min_opacity", c.layout.min_opacity);
      if (l.contains("colors")) {
        const json& k = l["colors"];
        check_keys(k, {"grow", "merge", "split", "generic"}, "layout.colors");
        c.layout.color_grow = k.value("grow", c.layout.color_grow);
        c.layout.color_merge = k.value("merge", c.layout.color_merge);
        c.layout.color_split = k.value("split", c.layout.color_split);
        c.layout.color_generic = k.value("generic", c.layout.color_generic);
      }
    }
    if (j.contains("io")) {
      const json& io = j["io"];
      check_keys(io, {"input", "out"}, "io");
      if (io.contains("input") && !io["input"].is_null()) c.input = fs::path(io["input"].get<std::string>());
      if (io.contains("out") && !io["out"].is_null()) c.out = fs::path(io["out"].get<std::string>());
    }
    if (j.contains("timesteps") && !j["timesteps"].is_null()) {
      const json& t = j["timesteps"];
      if (t.is_string()) {
        c.timesteps = parse_timestep_range(t.get<std::string>());
      } else {
        const auto v = t.get<std::vector<int>>();
        if (v.size() != 2) throw ValidationError("timesteps must be [a, b] or \"a..b\"");
        c.timesteps = std::pair{v[0], v[1]};
      }
    }
    c.workers = j.value("workers", c.workers);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  return c;
}

json to_json(const PipelineConfig& c) {
  json j;
  j["detection"] = {{"r", c.detection.r},
                    {"h", c.detection.h ? json(*c.detection.h) : json(nullptr)},
                    {"boundary", to_string(c.detection.boundary)},
                    {"eigen_tolerance", c.detection.eigen_tolerance},
                    {"rank_tolerance", c.detection.rank_tolerance}};
  j["segmentation"] = {
      {"top_layer_depth", c.segmentation.top_layer_depth ? json(*c.segmentation.top_layer_depth) : json(nullptr)},
      {"density_floor", c.segmentation.density_floor},
      {"core_connectivity", to_string(c.segmentation.core_connectivity)},
      {"flood_connectivity", to_string(c.segmentation.flood_connectivity)}};
  j["trim"] = c.trim ? json{{"min_branch_persistence", c.trim->min_branch_persistence},
                            {"min_cycle_persistence", c.trim->min_cycle_persistence}}
                     : json(nullptr);
  j["tracking"] = {{"overlap_fraction", c.tracking.overlap_fraction},
                   {"weight_mode", to_string(c.tracking.weight_mode)}};
  j["layout"] = {{"max_rounds", c.layout.max_rounds},
                 {"min_opacity", c.layout.min_opacity},
                 {"colors",
                  {{"grow", c.layout.color_grow},
                   {"merge", c.layout.color_merge},
                   {"split", c.layout.color_split},
                   {"generic", c.layout.color_generic}}}};
  j["io"] = {{"input", c.input ? json(c.input->generic_string()) : json(nullptr)}};
  j["synth"] = c.synth ? to_json(*c.synth) : json(nullptr);
  j["timesteps"] = c.timesteps ? json::array({c.timesteps->first, c.timesteps->second}) : json(nullptr);
  return j;
}

std::string config_hash(const PipelineConfig& c) {
  // FNV-1a over the canonical text.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- stages ----

std::vector<ScalarField> load_input(const PipelineConfig& config, json* ground_truth) {
  std::vector<ScalarField> fields;
  if (config.synth) {
    SyntheticDataset ds = generate_synthetic(*config.synth);
    if (ground_truth) *ground_truth = ds.ground_truth;
    fields = std::move(ds.fields);
  } else if (config.input) {
    fs::path p = *config.input;
    if (fs::is_directory(p)) p /= "manifest.json";
    fields = load_fields(p);
  } else {
    throw ValidationError("config names no input");
  }
  if (config.timesteps) {
    const auto [a, b] = *config.timesteps;
    if (b >= static_cast<int>(fields.size()))
      throw ValidationError("timestep range " + std::to_string(a) + ".." + std::to_string(b) + " exceeds the " +
                            std::to_string(fields.size()) + " available timesteps");
    fields = std::vector<ScalarField>(fields.begin() + a, fields.begin() + b + 1);
  }
  return fields;
}

RidgeMask stage_detect(const ScalarField& field, const PipelineConfig& config) {
  return detect(field, config.detection, config.workers);
}

FingerLabelField stage_segment(const ScalarField& field, const RidgeMask& mask, const PipelineConfig& config) {
  config.segmentation.validate(field.spec());
  const RidgeMask below = split_top_layer(mask, config.segmentation);
  const FingerLabelField cores = connected_components(below, config.segmentation);
  return watershed_expand(field, cores, config.segmentation);
}

std::vector<FingerRecord> stage_skeleton(const ScalarField& field, const FingerLabelField& labels,
                                         const PipelineConfig& config) {
  const GridSpec& spec = field.spec();
  const TrimParams trim = config.trim_for(spec.spacing);
  const int ha = spec.height_axis;
  const int pa = ha == 0 ? 1 : 0;
  const int pb = ha == 2 ? 1 : 2;
  std::vector<FingerRecord> out;
  for (std::uint32_t id = 1; id <= labels.finger_count; ++id) {
    FingerRecord f;
    f.id = id;
    f.raw_skeleton = build_reeb_skeleton(labels.core_of(id), spec, &field, static_cast<int>(id));
    f.skeleton = trim_skeleton(f.raw_skeleton, trim);
    f.branches = extract_branches(f.skeleton);
    f.hull = hull_projection(f.skeleton);
    f.complexity = topological_complexity(f.skeleton);
    f.height = finger_height(f.skeleton);
    const auto& cells = labels.volume_of(id);
    for (std::size_t q : cells) {
      const Vec3 p = spec.world(spec.voxel(q));
      f.centroid_xy.x += p[pa];
      f.centroid_xy.y += p[pb];
    }
    f.centroid_xy.x /= static_cast<double>(cells.size());
    f.centroid_xy.y /= static_cast<double>(cells.size());
    f.volume = finger_volume(labels, id, config.tracking.weight_mode, &field);
    f.voxel_count = cells.size();
    f.core_count = labels.core_of(id).size();
    out.push_back(std::move(f));
  }
  return out;
}

namespace {

int worker_count(int requested) {
#ifdef FINGERTRACK_HAVE_OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

// Runs body(i) for i in [0, n) across workers; the first failure (in index
// order) is rethrown after all items finish.
template <typename F>
void parallel_items(int n, int workers, F&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#ifdef FINGERTRACK_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count(workers))
#endif
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  (void)workers;
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

template <typename F>
auto staged(const std::string& stage, int timestep, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, timestep, e.what());
  }
}

}  // namespace

TrackingGraph stage_track(const std::vector<TimestepResult>& steps, const PipelineConfig& config) {
  TrackingGraph tg;
  for (const auto& s : steps) {
    tg.timesteps.push_back(s.timestep);
    std::vector<TrackingNode> col;
    for (const auto& f : s.fingers) col.push_back({f.id, f.complexity, f.height, f.centroid_xy, f.volume});
    tg.columns.push_back(std::move(col));
  }
  const int pairs = steps.empty() ? 0 : static_cast<int>(steps.size()) - 1;
  std::vector<std::vector<TrackLink>> per_pair(static_cast<std::size_t>(std::max(pairs, 0)));
  parallel_items(pairs, config.workers, [&](int i) {
    staged("track", steps[i].timestep, [&] {
      const TimestepResult& a = steps[i];
      const TimestepResult& b = steps[i + 1];
      auto links = overlap_links(a.labels, b.labels, i, config.tracking.weight_mode, &a.field, &b.field);
      std::vector<double> volumes;
      for (const auto& f : a.fingers) volumes.push_back(f.volume);
      classify_links(links, volumes, config.tracking.overlap_fraction);
      for (auto& l : links)
        l.branches = branch_correspondence(l, a.fingers[l.a - 1].branches, b.fingers[l.b - 1].branches, a.field.spec());
      per_pair[i] = std::move(links);
    });
  });
  for (auto& links : per_pair)
    for (auto& l : links) tg.links.push_back(std::move(l));
  return tg;
}

LayoutResult stage_layout(const TrackingGraph& tg, const std::vector<TimestepResult>& steps,
                          const PipelineConfig& config) {
  std::vector<std::vector<FingerView>> views;
  for (const auto& s : steps) {
    std::vector<FingerView> row;
    for (const auto& f : s.fingers) row.push_back({f.id, &f.skeleton, &f.branches});
    views.push_back(std::move(row));
  }
  return compute_layout(tg, views, config.layout);
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::detect: return "detect";
    case Stage::segment: return "segment";
    case Stage::skeleton: return "skeleton";
    case Stage::track: return "track";
    case Stage::layout: return "layout";
  }
  return "layout";
}

DatasetResult run(const PipelineConfig& config, Stage last) {
  config.validate();
  json truth;
  std::vector<ScalarField> fields = staged("load", -1, [&] { return load_input(config, &truth); });
  return run(config, std::move(fields), std::move(truth), last);
}

DatasetResult run(const PipelineConfig& config, std::vector<ScalarField> fields, json ground_truth, Stage last) {
  DatasetResult r;
  r.last_stage = last;
  r.config = config;
  r.config_hash = config_hash(config);
  r.code_version = code_version();
  r.ground_truth = std::move(ground_truth);
  for (std::size_t i = 1; i < fields.size(); ++i)
    if (!(fields[i].spec() == fields[0].spec())) throw ValidationError("all timesteps must share one grid");

  r.steps.resize(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    TimestepResult& s = r.steps[i];
    s.index = static_cast<int>(i);
    s.timestep = fields[i].timestep();
    s.field = std::move(fields[i]);
    // Detection is parallel within the timestep.
    s.mask = staged("detect", s.timestep, [&] { return stage_detect(s.field, config); });
  }
  if (last == Stage::detect) return r;
  parallel_items(static_cast<int>(r.steps.size()), config.workers, [&](int i) {
    TimestepResult& s = r.steps[i];
    s.labels = staged("segment", s.timestep, [&] { return stage_segment(s.field, s.mask, config); });
    if (last != Stage::segment)
      s.fingers = staged("skeleton", s.timestep, [&] { return stage_skeleton(s.field, s.labels, config); });
  });
  if (last == Stage::segment || last == Stage::skeleton) return r;
  r.tracking = stage_track(r.steps, config);
  if (last == Stage::track) return r;
  r.layout = staged("layout", -1, [&] { return stage_layout(r.tracking, r.steps, config); });
  return r;
}

const FingerRecord* DatasetResult::finger(int t, std::uint32_t id) const {
  if (t < 0 || t >= static_cast<int>(steps.size())) return nullptr;
  const auto& fs_ = steps[t].fingers;
  if (id == 0 || id > fs_.size()) return nullptr;
  return &fs_[id - 1];
}

// ---- JSON documents ----

json skeleton_json(const SkeletonGraph& g) {
  json nodes = json::array(), arcs = json::array();
  for (const auto& n : g.nodes)
    nodes.push_back({{"id", n.id}, {"position", vec3_json(n.position)}, {"height", n.height}, {"kind", to_string(n.kind)}});
  for (const auto& a : g.arcs) {
    json poly = json::array();
    for (const auto& p : a.polyline) poly.push_back(vec3_json(p));
    arcs.push_back({{"id", a.id},
                    {"u", a.u},
                    {"v", a.v},
                    {"polyline", poly},
                    {"mean_density", a.mean_density},
                    {"weight", a.weight},
                    {"sources", a.sources},
                    {"length", a.length()}});
  }
  return {{"finger_id", g.finger_id},
          {"height_axis", g.height_axis},
          {"nodes", nodes},
          {"arcs", arcs},
          {"cycle_count", g.cycle_count()},
          {"component_count", g.component_count()}};
}

json branches_json(const BranchDecomposition& bd) {
  json branches = json::array(), connections = json::array();
  for (const auto& b : bd.branches) {
    json poly = json::array();
    for (const auto& p : b.polyline) poly.push_back(vec3_json(p));
    branches.push_back({{"id", b.id},
                        {"nodes", b.nodes},
                        {"arcs", b.arcs},
                        {"top_height", b.top_height},
                        {"bottom_height", b.bottom_height},
                        {"persistence", b.persistence},
                        {"length", b.length},
                        {"complexity", b.complexity},
                        {"centroid", vec2_json(b.centroid_xy)},
                        {"mean_density", b.mean_density},
                        {"polyline", poly}});
  }
  for (const auto& c : bd.connections)
    connections.push_back({{"branch_a", c.branch_a}, {"branch_b", c.branch_b}, {"node", c.node}, {"height", c.height}});
  return {{"principal", bd.principal},
          {"discovery_order", bd.discovery_order},
          {"branches", branches},
          {"connections", connections}};
}

json hull_json(const Hull& h) {
  json poly = json::array();
  for (const auto& p : h.polygon) poly.push_back(vec2_json(p));
  return {{"polygon", poly}, {"centroid", vec2_json(h.centroid)}, {"degenerate", h.degenerate}};
}

json finger_summary_json(const FingerRecord& f) {
  return {{"id", f.id},
          {"complexity", f.complexity},
          {"height", f.height},
          {"hull", hull_json(f.hull)},
          {"centroid", vec2_json(f.centroid_xy)},
          {"volume", f.volume},
          {"voxel_count", f.voxel_count},
          {"core_count", f.core_count},
          {"branch_count", f.branches.branches.size()}};
}

json finger_json(const FingerRecord& f) {
  json j = finger_summary_json(f);
  j["skeleton"] = skeleton_json(f.skeleton);
  j["raw_skeleton"] = skeleton_json(f.raw_skeleton);
  j["branches"] = branches_json(f.branches);
  return j;
}

json link_json(const TrackLink& l) {
  json corr = json::array();
  for (const auto& c : l.branches) corr.push_back({{"branch_a", c.branch_a}, {"branch_b", c.branch_b}, {"count", c.count}});
  return {{"t", l.t},
          {"a", l.a},
          {"b", l.b},
          {"weight", l.weight},
          {"kind", to_string(l.kind)},
          {"ratio", l.ratio},
          {"shared_count", l.shared_cells.size()},
          {"shared_cells", l.shared_cells},
          {"branches", corr}};
}

json tracking_json(const DatasetResult& r) {
  json nodes = json::array(), links = json::array();
  for (std::size_t t = 0; t < r.tracking.columns.size(); ++t)
    for (const auto& n : r.tracking.columns[t])
      nodes.push_back({{"t", t},
                       {"id", n.finger_id},
                       {"complexity", n.complexity},
                       {"height", n.height},
                       {"centroid", vec2_json(n.centroid_xy)},
                       {"volume", n.volume}});
  for (const auto& l : r.tracking.links) links.push_back(link_json(l));
  return {{"schema_version", kSchemaVersion},
          {"timesteps", r.tracking.timesteps},
          {"weight_mode", to_string(r.config.tracking.weight_mode)},
          {"overlap_fraction", r.config.tracking.overlap_fraction},
          {"nodes", nodes},
          {"links", links}};
}

namespace {

json linear_json(const LinearGlyph& g) {
  json segs = json::array(), conns = json::array();
  for (const auto& s : g.segments) {
    json stops = json::array();
    for (const auto& [y, d] : s.density) stops.push_back({y, d});
    segs.push_back({{"branch", s.branch},
                    {"slot", s.slot},
                    {"x", s.x},
                    {"y_top", s.y_top},
                    {"y_bottom", s.y_bottom},
                    {"density", stops}});
  }
  for (const auto& c : g.connectors)
    conns.push_back({{"branch_a", c.branch_a},
                     {"branch_b", c.branch_b},
                     {"x_a", c.x_a},
                     {"x_b", c.x_b},
                     {"y", c.y},
                     {"radius", c.radius},
                     {"x_center", c.x_center}});
  return {{"mode", g.mode == GlyphMode::arc ? "arc" : "horizontal"},
          {"slot_count", g.slot_count},
          {"slots", g.slots},
          {"segments", segs},
          {"connectors", conns},
          {"crossings", g.crossings},
          {"used_baseline", g.used_baseline}};
}

}  // namespace

json layout_json(const DatasetResult& r) {
  const LayoutResult& L = r.layout;
  json glyphs = json::array(), links = json::array(), history = json::array();
  for (const auto& row : L.glyphs) {
    json jr = json::array();
    for (const auto& g : row) {
      json rects = json::array();
      for (const auto& rc : g.rects)
        rects.push_back({{"branch", rc.branch}, {"x", rc.x}, {"y", rc.y}, {"w", rc.w}, {"h", rc.h}});
      jr.push_back({{"finger_id", g.finger_id},
                    {"width", g.width},
                    {"linear", linear_json(g.linear)},
                    {"linear_arc", linear_json(g.linear_arc)},
                    {"rects", rects},
                    {"hull", hull_json(g.hull)}});
    }
    glyphs.push_back(jr);
  }
  for (std::size_t i = 0; i < L.links.size(); ++i) {
    const TrackLink& l = r.tracking.links[i];
    links.push_back({{"t", l.t},
                     {"a", l.a},
                     {"b", l.b},
                     {"kind", to_string(l.kind)},
                     {"color", L.links[i].color},
                     {"opacity", L.links[i].opacity}});
  }
  for (const auto& h : L.history) history.push_back({{"sweep", h.sweep}, {"round", h.round}, {"crossings", h.crossings}});
  return {{"schema_version", kSchemaVersion},
          {"order", L.order},
          {"glyphs", glyphs},
          {"links", links},
          {"history", history},
          {"rounds", L.rounds}};
}

json fingers_json(const DatasetResult& r) {
  json steps = json::array();
  for (const auto& s : r.steps) {
    json fingers = json::array();
    for (const auto& f : s.fingers) fingers.push_back(finger_json(f));
    steps.push_back({{"t", s.index}, {"timestep", s.timestep}, {"fingers", fingers}});
  }
  return {{"schema_version", kSchemaVersion}, {"steps", steps}};
}

namespace {

std::string step_name(const TimestepResult& s) { return "t" + std::to_string(s.timestep); }

json grid_json(const GridSpec& g) {
  return {{"dims", g.dims},
          {"spacing", g.spacing},
          {"origin", vec3_json(g.origin)},
          {"height_axis", g.height_axis},
          {"height_down", g.height_down}};
}

}  // namespace

json manifest_json(const DatasetResult& r) {
  const auto reached = [&](Stage s) { return static_cast<int>(r.last_stage) >= static_cast<int>(s); };
  json masks = json::array(), labels = json::array(), timesteps = json::array();
  for (const auto& s : r.steps) {
    masks.push_back({{"data", "masks/" + step_name(s) + ".u8"}, {"header", "masks/" + step_name(s) + ".json"}});
    if (reached(Stage::segment))
      labels.push_back({{"data", "labels/" + step_name(s) + ".u32"}, {"header", "labels/" + step_name(s) + ".json"}});
    timesteps.push_back(s.timestep);
  }
  const auto doc = [&](Stage s, const char* name) { return reached(s) ? json(name) : json(nullptr); };
  json grid = r.steps.empty() ? json(nullptr) : grid_json(r.steps.front().field.spec());
  return {{"schema_version", kSchemaVersion},
          {"code_version", r.code_version},
          {"config_hash", r.config_hash},
          {"config", to_json(r.config)},
          {"grid", grid},
          {"n_timesteps", r.steps.size()},
          {"timesteps", timesteps},
          {"ground_truth", r.ground_truth},
          {"last_stage", to_string(r.last_stage)},
          {"files",
           {{"fields", "fields/manifest.json"},
            {"masks", masks},
            {"labels", reached(Stage::segment) ? labels : json(nullptr)},
            {"fingers", doc(Stage::skeleton, "fingers.json")},
            {"tracking_graph", doc(Stage::track, "tracking_graph.json")},
            {"layout", doc(Stage::layout, "layout.json")}}}};
}

std::string dump_json(const json& j) { return j.dump(1, '\t') + "\n"; }

namespace {

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("short write to " + p.string());
}

json mask_header(const TimestepResult& s) {
  return {{"dims", s.mask.spec.dims},
          {"dtype", "u8"},
          {"endianness", "little"},
          {"order", "x-fastest"},
          {"timestep", s.timestep},
          {"encoding", {{"0", "non_ridge"}, {"1", "core_only"}, {"2", "ridge"}}},
          {"counts",
           {{"non_ridge", s.mask.count(VoxelLabel::non_ridge)},
            {"core_only", s.mask.count(VoxelLabel::core_only)},
            {"ridge", s.mask.count(VoxelLabel::ridge)}}},
          {"warnings", s.mask.warnings}};
}

json label_header(const TimestepResult& s) {
  const GridSpec& g = s.labels.spec;
  json fingers = json::array();
  for (std::uint32_t id = 1; id <= s.labels.finger_count; ++id) {
    std::array<int, 3> lo{g.dims}, hi{-1, -1, -1};
    for (std::size_t q : s.labels.volume_of(id)) {
      const VoxelId v = g.voxel(q);
      const std::array<int, 3> c{v.i, v.j, v.k};
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], c[a]);
        hi[a] = std::max(hi[a], c[a]);
      }
    }
    fingers.push_back({{"id", id},
                       {"voxels", s.labels.volume_of(id).size()},
                       {"core_voxels", s.labels.core_of(id).size()},
                       {"bbox", {{"min", lo}, {"max", hi}}}});
  }
  return {{"dims", g.dims},
          {"dtype", "u32"},
          {"endianness", "little"},
          {"order", "x-fastest"},
          {"timestep", s.timestep},
          {"finger_count", s.labels.finger_count},
          {"fingers", fingers}};
}

}  // namespace

void export_result(const DatasetResult& r, const fs::path& out_dir) {
  const auto reached = [&](Stage s) { return static_cast<int>(r.last_stage) >= static_cast<int>(s); };
  try {
    fs::create_directories(out_dir / "masks");
    if (reached(Stage::segment)) fs::create_directories(out_dir / "labels");
    std::vector<ScalarField> fields;
    for (const auto& s : r.steps) fields.push_back(s.field);
    save_fields(out_dir / "fields", fields, BrickType::f32);
    for (const auto& s : r.steps) {
      const std::vector<std::uint8_t> bytes = s.mask.bytes();
      write_brick_u8(out_dir / "masks" / (step_name(s) + ".u8"), bytes);
      write_text(out_dir / "masks" / (step_name(s) + ".json"), dump_json(mask_header(s)));
      if (!reached(Stage::segment)) continue;
      write_brick_u32(out_dir / "labels" / (step_name(s) + ".u32"), s.labels.labels);
      write_text(out_dir / "labels" / (step_name(s) + ".json"), dump_json(label_header(s)));
    }
    if (reached(Stage::skeleton)) write_text(out_dir / "fingers.json", dump_json(fingers_json(r)));
    if (reached(Stage::track)) write_text(out_dir / "tracking_graph.json", dump_json(tracking_json(r)));
    if (reached(Stage::layout)) write_text(out_dir / "layout.json", dump_json(layout_json(r)));
    write_text(out_dir / "manifest.json", dump_json(manifest_json(r)));
  } catch (const fs::filesystem_error& e) {
    throw IoError(e.what());
  }
}

}  // namespace fingertrack
