#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sengraph/models.hpp"
#include "sengraph/reconstruction.hpp"
#include "sengraph/sampling.hpp"
#include "sengraph/sen_graph.hpp"
#include "sengraph/training.hpp"

namespace sengraph {

struct TerrainSpec {
  int n = 129;
  double roughness = 0.6;
  double cellsize = 30.0;
  double xll = 0.0;
  double yll = 0.0;
};

struct GraphSpec {
  std::string mode = "edge_driven";  // gabriel|rng|edge_driven|node_driven|both
  int nodes = 300;
  double min_spacing = 120.0;
  TerrainConnectParams survival;
};

/// Pre-existing raster + edge-list files used instead of synthesis; the same
/// network serves as both the training and the held-out side.
struct IngestSpec {
  std::filesystem::path raster;
  std::filesystem::path edges;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "sengraph_out";
  TerrainSpec terrain;
  GraphSpec graph;
  std::optional<IngestSpec> ingest;
  FeatureConfig features;
  SamplingConfig sampling;
  ModelConfig model;
  TrainConfig training;
  double val_fraction = 0.2;
  double threshold = 0.5;
  std::vector<std::string> compare_variants = {"gmu", "rsgcn", "esgcn",
                                               "graphsage"};
};

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> variant;
  std::optional<double> threshold;
};

/// Strict JSON config: unknown keys anywhere are validation errors, every
/// section is optional and falls back to the defaults above.
RunConfig parse_run_config(const std::string& text, const std::string& origin);
RunConfig load_run_config(const std::filesystem::path& path,
                          const CliOverrides& overrides);

/// Console chatter level, set by the SENGRAPH_LOG environment variable.
/// quiet silences stage progress, debug prefixes each stage with its
/// resolved settings. Errors always reach stderr.
enum class Verbosity { quiet, info, debug };

/// Maps an environment value to a level: unset or empty means info, any
/// other unknown word is a validation error.
Verbosity verbosity_from_env(const char* value);

/// Artifact locations under out_dir, shared by every stage.
struct RunPaths {
  std::filesystem::path terrain, graph, test_terrain, test_graph;
  std::filesystem::path samples, test_samples;
  std::filesystem::path checkpoint, train_log;
  std::filesystem::path predictions;
  std::filesystem::path reconstructed, reconstructed_svg;
  std::filesystem::path eval_report, eval_table;
  std::filesystem::path compare_table, compare_csv, compare_svg;
};
RunPaths run_paths(const RunConfig& cfg);

// Pipeline stages. Each reads its predecessors' files from out_dir, writes
// its own artifacts atomically, and prints a short summary to `out`.
void cmd_generate(const RunConfig& cfg, std::ostream& out);
void cmd_sample(const RunConfig& cfg, std::ostream& out);
void cmd_train(const RunConfig& cfg, std::ostream& out);
void cmd_predict(const RunConfig& cfg, std::ostream& out);
void cmd_reconstruct(const RunConfig& cfg, std::ostream& out);
void cmd_eval(const RunConfig& cfg, std::ostream& out);
void cmd_compare(const RunConfig& cfg, std::ostream& out);

struct CompareRow {
  std::string variant;
  double f1 = 0.0;
  double accuracy = 0.0;
};

/// Vertical bars on a fixed [0, 1] axis; deterministic text output.
std::string svg_bar_chart(const std::string& title,
                          const std::vector<std::pair<std::string, double>>&
                              bars);

/// Truth edges in grey under the predicted edges in color, nodes as dots,
/// world coordinates with north up.
std::string svg_network_map(
    const SenGraph& truth,
    const std::vector<std::pair<std::int64_t, std::int64_t>>& predicted);

}  // namespace sengraph
