#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fingertrack/branch.hpp"
#include "fingertrack/field.hpp"
#include "fingertrack/layout.hpp"
#include "fingertrack/ridge.hpp"
#include "fingertrack/segment.hpp"
#include "fingertrack/synthetic.hpp"
#include "fingertrack/topo.hpp"
#include "fingertrack/track.hpp"

namespace fingertrack {

inline constexpr int kSchemaVersion = 1;

enum class Stage { detect, segment, skeleton, track, layout };
std::string to_string(Stage s);
std::string code_version();

struct PipelineConfig {
  DetectionParams detection;
  SegmentationParams segmentation;
  std::optional<TrimParams> trim;  // unset: two voxel sides
  TrackingParams tracking;
  LayoutParams layout;
  // Exactly one source: a field manifest or a synthetic generator block.
  std::optional<std::filesystem::path> input;
  std::optional<SyntheticParams> synth;
  std::optional<std::filesystem::path> out;
  std::optional<std::pair<int, int>> timesteps;  // inclusive index range
  int workers = 0;                               // 0: runtime default

  TrimParams trim_for(double spacing) const { return trim.value_or(TrimParams::defaults(spacing)); }
  void validate() const;
};

/// Missing blocks and keys keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j);
/// Canonical form of every resolved value except the output directory and
/// the worker count, which do not change results. Hashing this gives the
/// provenance hash.
nlohmann::json to_json(const PipelineConfig& c);
std::string config_hash(const PipelineConfig& c);
/// "a..b" or "a" (inclusive indices).
std::pair<int, int> parse_timestep_range(const std::string& text);

struct FingerRecord {
  std::uint32_t id = 0;
  SkeletonGraph raw_skeleton;
  SkeletonGraph skeleton;  // trimmed
  BranchDecomposition branches;
  Hull hull;
  int complexity = 0;
  double height = 0.0;
  Vec2 centroid_xy;  // of the complete volume
  double volume = 0.0;  // in the tracking weight mode
  std::size_t voxel_count = 0;
  std::size_t core_count = 0;
};

struct TimestepResult {
  int index = 0;     // position in the run
  int timestep = 0;  // source timestep
  ScalarField field;
  RidgeMask mask;
  FingerLabelField labels;
  std::vector<FingerRecord> fingers;
};

struct DatasetResult {
  PipelineConfig config;
  std::string config_hash;
  std::string code_version;
  nlohmann::json ground_truth;  // null unless synthetic
  std::vector<TimestepResult> steps;
  Stage last_stage = Stage::layout;
  TrackingGraph tracking;
  LayoutResult layout;

  const FingerRecord* finger(int t, std::uint32_t id) const;
};

/// Loads or generates the fields named by the config, applying the
/// timestep range.
std::vector<ScalarField> load_input(const PipelineConfig& config, nlohmann::json* ground_truth = nullptr);

/// Stages in order up to and including `last`. Stage failures throw
/// StageError.
DatasetResult run(const PipelineConfig& config, Stage last = Stage::layout);
DatasetResult run(const PipelineConfig& config, std::vector<ScalarField> fields, nlohmann::json ground_truth = {},
                  Stage last = Stage::layout);

// Per-stage entry points shared by run() and the CLI subcommands.
RidgeMask stage_detect(const ScalarField& field, const PipelineConfig& config);
FingerLabelField stage_segment(const ScalarField& field, const RidgeMask& mask, const PipelineConfig& config);
std::vector<FingerRecord> stage_skeleton(const ScalarField& field, const FingerLabelField& labels,
                                         const PipelineConfig& config);
TrackingGraph stage_track(const std::vector<TimestepResult>& steps, const PipelineConfig& config);
LayoutResult stage_layout(const TrackingGraph& tg, const std::vector<TimestepResult>& steps,
                          const PipelineConfig& config);

// ---- JSON documents (keys sorted; the same text is exported and served) ----

nlohmann::json skeleton_json(const SkeletonGraph& g);
nlohmann::json branches_json(const BranchDecomposition& bd);
nlohmann::json hull_json(const Hull& h);
nlohmann::json finger_summary_json(const FingerRecord& f);
nlohmann::json finger_json(const FingerRecord& f);
nlohmann::json link_json(const TrackLink& l);
nlohmann::json tracking_json(const DatasetResult& r);
nlohmann::json layout_json(const DatasetResult& r);
nlohmann::json fingers_json(const DatasetResult& r);
nlohmann::json manifest_json(const DatasetResult& r);

/// Canonical text form of every exported JSON document.
std::string dump_json(const nlohmann::json& j);

/// Writes manifest.json, fields/, masks/, labels/, fingers.json,
/// tracking_graph.json and layout.json, leaving out the documents of stages
/// the result did not reach. Throws IoError.
void export_result(const DatasetResult& r, const std::filesystem::path& out_dir);

}  // namespace fingertrack
