#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fingertrack/error.hpp"
#include "fingertrack/pipeline.hpp"
#include "fingertrack/synthetic.hpp"
#include "temp_dir.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fingertrack;

namespace {

PipelineConfig synth_config(SyntheticKind kind) {
  PipelineConfig c;
  c.synth = SyntheticParams::defaults(kind);
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

json read(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("config round trips through JSON and rejects unknown keys") {
  PipelineConfig c = synth_config(SyntheticKind::blob_split);
  c.detection.r = 4.0;
  c.segmentation.top_layer_depth = 20.0;
  c.trim = TrimParams{1.0, 3.0};
  c.tracking.overlap_fraction = 0.6;
  c.tracking.weight_mode = WeightMode::density;
  c.layout.max_rounds = 3;
  c.timesteps = {{0, 1}};
  const json j = to_json(c);
  const PipelineConfig back = config_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(config_hash(back) == config_hash(c));
  PipelineConfig other = c;
  other.detection.r = 5.0;
  CHECK(config_hash(other) != config_hash(c));
  PipelineConfig same = c;
  same.workers = 3;
  same.out = "/tmp/elsewhere";
  CHECK(config_hash(same) == config_hash(c));

  json bad = j;
  bad["detection"]["radius"] = 1;
  CHECK_THROWS_AS(config_from_json(bad), ValidationError);
  bad = j;
  bad["colour"] = "red";
  CHECK_THROWS_AS(config_from_json(bad), ValidationError);

  PipelineConfig neither;
  CHECK_THROWS_AS(neither.validate(), ValidationError);
  PipelineConfig both = c;
  both.input = "x";
  CHECK_THROWS_AS(both.validate(), ValidationError);
}

TEST_CASE("timestep ranges") {
  CHECK(parse_timestep_range("2..5") == std::pair(2, 5));
  CHECK(parse_timestep_range("3") == std::pair(3, 3));
  CHECK_THROWS_AS(parse_timestep_range("5..2"), ValidationError);
  CHECK_THROWS_AS(parse_timestep_range("a..b"), ValidationError);
  CHECK_THROWS_AS(parse_timestep_range("-1..2"), ValidationError);
}

TEST_CASE("a constant field has no fingers and still exports") {
  GridSpec g;
  g.dims = {8, 8, 8};
  std::vector<ScalarField> fields{ScalarField(g, std::vector<double>(g.cell_count(), 0.4))};
  PipelineConfig c;
  c.synth = SyntheticParams::defaults(SyntheticKind::twin_blob_merge);  // only to satisfy validate()
  const DatasetResult r = run(c, fields);
  REQUIRE(r.steps.size() == 1);
  CHECK(r.steps[0].labels.finger_count == 0);
  CHECK(r.steps[0].fingers.empty());
  CHECK(r.tracking.links.empty());
  TempDir dir("constant");
  export_result(r, dir.path());
  const json fingers = read(dir.path() / "fingers.json");
  CHECK(fingers["steps"][0]["fingers"].empty());
  CHECK(read(dir.path() / "tracking_graph.json")["links"].empty());
  CHECK(read(dir.path() / "manifest.json")["n_timesteps"] == 1);
}

TEST_CASE("twin blobs: two fingers merge into one") {
  const DatasetResult r = run(synth_config(SyntheticKind::twin_blob_merge));
  REQUIRE(r.steps.size() == 3);
  CHECK(r.steps[0].labels.finger_count == 2);
  CHECK(r.steps[1].labels.finger_count == 2);
  CHECK(r.steps[2].labels.finger_count == 1);
  int merges = 0;
  for (const auto& l : r.tracking.links) {
    if (l.t == 1) {
      CHECK(l.kind == LinkKind::merge);
      ++merges;
    } else {
      CHECK(l.kind == LinkKind::grow);
    }
    std::size_t sum = 0;
    for (const auto& b : l.branches) sum += b.count;
    CHECK(static_cast<double>(sum) == l.weight);
  }
  CHECK(merges == 2);
  CHECK(r.layout.order.size() == 3);
  for (const auto& step : r.steps)
    for (const auto& f : step.fingers) {
      CHECK(f.skeleton.component_count() == 1);
      CHECK(!f.branches.branches.empty());
      CHECK(f.voxel_count >= f.core_count);
    }
}

TEST_CASE("a static blob only grows into itself") {
  const auto ds = generate_synthetic(SyntheticParams::defaults(SyntheticKind::blob_split));
  const DatasetResult r = run(synth_config(SyntheticKind::blob_split), {ds.fields[0], ds.fields[0]});
  REQUIRE(r.steps[0].labels.finger_count == 1);
  REQUIRE(r.tracking.links.size() == 1);
  CHECK(r.tracking.links[0].kind == LinkKind::grow);
  CHECK(r.tracking.links[0].ratio == doctest::Approx(1.0));
}

TEST_CASE("reruns export byte-identical files, whatever the worker count") {
  PipelineConfig c = synth_config(SyntheticKind::blob_split);
  TempDir a("rerun_a"), b("rerun_b"), d("rerun_d");
  c.workers = 1;
  export_result(run(c), a.path());
  export_result(run(c), b.path());
  c.workers = 0;
  export_result(run(c), d.path());
  const auto ta = tree(a.path());
  CHECK(ta.size() >= 8);
  CHECK(ta == tree(b.path()));
  CHECK(ta == tree(d.path()));
}

TEST_CASE("a bad segmentation parameter fails in the segment stage") {
  PipelineConfig c = synth_config(SyntheticKind::twin_blob_merge);
  c.segmentation.top_layer_depth = 1e6;
  try {
    run(c);
    FAIL("expected a StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "segment");
    CHECK(e.timestep() == 0);
  }
  PipelineConfig d = synth_config(SyntheticKind::twin_blob_merge);
  d.detection.r = 0.0;
  CHECK_THROWS_AS(run(d), Error);
}

TEST_CASE("partial runs export what they reached") {
  PipelineConfig c = synth_config(SyntheticKind::twin_blob_merge);
  c.timesteps = {{1, 2}};
  TempDir dir("partial");
  const DatasetResult r = run(c, Stage::segment);
  CHECK(r.last_stage == Stage::segment);
  CHECK(r.steps.size() == 2);
  CHECK(r.steps[0].timestep == 1);
  export_result(r, dir.path());
  const json m = read(dir.path() / "manifest.json");
  CHECK(m["last_stage"] == "segment");
  CHECK(m["timesteps"] == json::array({1, 2}));
  CHECK(m["files"]["labels"].size() == 2);
  CHECK(m["files"]["fingers"].is_null());
  CHECK(m["files"]["tracking_graph"].is_null());
  CHECK(m["files"]["layout"].is_null());
  CHECK(fs::exists(dir.path() / m["files"]["labels"][0]["data"].get<std::string>()));
  CHECK(!fs::exists(dir.path() / "layout.json"));

  const DatasetResult full = run(c);
  CHECK(full.tracking.timesteps == std::vector<int>{1, 2});
  for (const auto& l : full.tracking.links) CHECK(l.t == 0);
}

TEST_CASE("inputs load back from an export") {
  TempDir dir("reload");
  PipelineConfig c = synth_config(SyntheticKind::blob_split);
  const DatasetResult r = run(c);
  export_result(r, dir.path());
  PipelineConfig again;
  again.input = dir.path() / read(dir.path() / "manifest.json")["files"]["fields"].get<std::string>();
  const DatasetResult r2 = run(again);
  REQUIRE(r2.steps.size() == r.steps.size());
  for (std::size_t t = 0; t < r.steps.size(); ++t) CHECK(r2.steps[t].labels.finger_count == r.steps[t].labels.finger_count);
  PipelineConfig missing;
  missing.input = dir.path() / "nope.json";
  CHECK_THROWS_AS(run(missing), Error);
}
