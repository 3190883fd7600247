#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fingertrack/error.hpp"
#include "fingertrack/pipeline.hpp"
#include "fingertrack/server.hpp"
#include "fingertrack/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fingertrack;

namespace {

struct CommonFlags {
  std::string config;
  std::string input;
  std::string synth;
  std::string out;
  std::string timesteps;
  std::optional<int> workers;
  std::optional<double> r;
  std::optional<double> h;
  std::optional<double> top_layer;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->set_help_flag("--help", "print this help and exit");  // -h is the spacing flag
  cmd->add_option("--config", f.config, "pipeline config JSON");
  cmd->add_option("--input", f.input, "field manifest (or a directory containing manifest.json)");
  cmd->add_option("--synth", f.synth, "generate the input instead: gaussian_ridge_line, twin_blob_merge, blob_split, branching_finger");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--timesteps", f.timesteps, "inclusive index range a..b");
  cmd->add_option("--workers", f.workers, "worker threads (0: all)");
  cmd->add_option("--r", f.r, "nearby-cube factor r");
  cmd->add_option("--h", f.h, "finite-difference spacing h");
  cmd->add_option("--top-layer", f.top_layer, "top-layer depth (world height)");
  cmd->add_option("--seed", f.seed, "synthetic generator seed");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
}

// JSON first, flags on top.
PipelineConfig resolve(const CommonFlags& f) {
  PipelineConfig c = f.config.empty() ? PipelineConfig{} : config_from_json(read_json_file(f.config));
  if (!f.input.empty()) {
    c.input = f.input;
    c.synth.reset();
  }
  if (!f.synth.empty()) {
    c.synth = SyntheticParams::defaults(synthetic_kind_from_string(f.synth));
    c.input.reset();
  }
  if (f.seed) {
    if (!c.synth) throw ValidationError("--seed needs a synthetic input");
    c.synth->seed = *f.seed;
  }
  if (!f.out.empty()) c.out = f.out;
  if (!f.timesteps.empty()) c.timesteps = parse_timestep_range(f.timesteps);
  if (f.workers) c.workers = *f.workers;
  if (f.r) c.detection.r = *f.r;
  if (f.h) c.detection.h = *f.h;
  if (f.top_layer) c.segmentation.top_layer_depth = *f.top_layer;
  c.validate();
  if (!c.out) throw ValidationError("no output directory (--out or io.out)");
  return c;
}

void run_stage(const CommonFlags& f, const std::string& name, Stage last) {
  const PipelineConfig c = resolve(f);
  const DatasetResult r = run(c, last);
  export_result(r, *c.out);
  std::size_t fingers = 0;
  for (const auto& s : r.steps) fingers += s.labels.finger_count;
  std::cerr << name << ": " << r.steps.size() << " timesteps";
  if (last != Stage::detect) std::cerr << ", " << fingers << " fingers";
  if (last == Stage::track || last == Stage::layout) std::cerr << ", " << r.tracking.links.size() << " links";
  std::cerr << " -> " << c.out->string() << "\n";
  for (const auto& s : r.steps)
    for (const auto& w : s.mask.warnings) std::cerr << "warning (t" << s.timestep << "): " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finger detection, skeletonization, tracking and layout for 3D scalar fields"};
  app.set_version_flag("--version", code_version());
  app.require_subcommand(1);

  CommonFlags flags;
  struct StageCommand {
    const char* name;
    const char* help;
    Stage last;
  };
  const StageCommand stages[] = {
      {"detect", "ridge and core voxel masks", Stage::detect},
      {"segment", "masks and finger labels", Stage::segment},
      {"skeleton", "through skeletons and branches (fingers.json)", Stage::skeleton},
      {"track", "through the tracking graph", Stage::track},
      {"layout", "through the tracking-graph layout", Stage::layout},
      {"run", "every stage, full export", Stage::layout},
  };
  for (const auto& s : stages) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, flags);
    const Stage last = s.last;
    const std::string name = s.name;
    cmd->callback([&flags, name, last] { run_stage(flags, name, last); });
  }

  std::string kind = "twin_blob_merge", synth_out, synth_config;
  std::optional<std::uint64_t> synth_seed;
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic dataset (fields + ground_truth.json)");
  synth->add_option("kind", kind, "generator kind")->required();
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--config", synth_config, "generator params JSON (a bare block or a config with 'synth')");
  synth->add_option("--seed", synth_seed, "seed");
  synth->callback([&] {
    SyntheticParams p = SyntheticParams::defaults(synthetic_kind_from_string(kind));
    if (!synth_config.empty()) {
      json j = read_json_file(synth_config);
      if (j.contains("synth")) j = j["synth"];
      j["kind"] = kind;
      p = synthetic_params_from_json(j);
    }
    if (synth_seed) p.seed = *synth_seed;
    const SyntheticDataset ds = generate_synthetic(p);
    const fs::path manifest = save_fields(synth_out, ds.fields, BrickType::f32);
    std::ofstream gt(fs::path(synth_out) / "ground_truth.json");
    gt << dump_json(ds.ground_truth);
    if (!gt) throw IoError("cannot write ground_truth.json");
    std::cerr << "synth: " << ds.fields.size() << " timesteps -> " << manifest.string() << "\n";
  });

  ServeOptions serve_opts;
  std::string data;
  CLI::App* srv = app.add_subcommand("serve", "HTTP/JSON API over an exported run");
  srv->add_option("--data", data, "export directory")->required();
  srv->add_option("--port", serve_opts.port, "port");
  srv->add_option("--host", serve_opts.host, "bind address");
  srv->add_flag("--cors", serve_opts.cors, "allow any origin");
  srv->callback([&] {
    const ApiSession session = ApiSession::load(data);
    std::cerr << "serving " << data << " on http://" << serve_opts.host << ":" << serve_opts.port << "\n";
    serve(session, serve_opts);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
