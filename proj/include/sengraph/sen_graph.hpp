#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sengraph/geometry.hpp"
#include "sengraph/raster.hpp"

namespace sengraph {

/// How node and edge features are derived from the environment raster.
/// region values are stored divided by the raster's max value; the
/// subtraction of the centre value (when normalized == true) happens at model
/// input time so the raw patch stays inspectable.
struct FeatureConfig {
  int edge_samples = 128;
  int grid_n = 15;
  double grid_spacing = 0.0;  // 0 means: use the raster cell size
  bool region_normalized = true;
};

struct SenNode {
  std::int64_t id = 0;
  Point pos;
  double point_feat = 0.0;          // environment value at pos / raster max
  std::vector<double> region_feat;  // grid_n x grid_n patch / raster max
};

/// Undirected edge in canonical order u < v. Geometry is the straight chord;
/// the feature is sampled from the lexicographically smaller endpoint to the
/// larger one so it cannot depend on node numbering.
struct SenEdge {
  std::int64_t u = 0;
  std::int64_t v = 0;
  std::vector<double> edge_feat;
};

struct SenGraph {
  std::vector<SenNode> nodes;  // sorted by id
  std::vector<SenEdge> edges;  // sorted by (u, v)
  FeatureConfig feat;
  double feature_scale = 1.0;
  std::string raster_ref;

  std::size_t node_index(std::int64_t id) const;  // throws invalid_argument
  const SenNode& node(std::int64_t id) const { return nodes[node_index(id)]; }
  bool has_edge(std::int64_t u, std::int64_t v) const;

  /// Neighbor lists parallel to `nodes`.
  std::vector<std::vector<std::size_t>> adjacency() const;
};

/// Divisor applied to raw environment values; falls back to 1 when the
/// raster's maximum is not positive.
double feature_scale_of(const Raster& r);

/// Feature derivation shared by generators, file ingestion, and sample
/// loading. NaN results (NODATA contamination) throw std::runtime_error.
double derive_point_feat(const Raster& r, Point pos, double scale);
std::vector<double> derive_region_feat(const Raster& r, Point pos,
                                       const FeatureConfig& feat,
                                       double scale);
std::vector<double> derive_edge_feat(const Raster& r, Point a, Point b,
                                     const FeatureConfig& feat, double scale);

/// Poisson-disk style placement: n nodes uniform over the raster footprint
/// with pairwise distance >= min_spacing, features attached. Nodes landing on
/// NODATA are rejected. Throws std::runtime_error when the packing does not
/// fit within the retry budget.
std::vector<SenNode> generate_nodes(const Raster& r, int n, double min_spacing,
                                    std::uint64_t seed,
                                    const FeatureConfig& feat = {});

/// Gabriel graph: (u,v) connected iff no third node lies strictly inside the
/// circle with diameter uv. Duplicate positions throw std::invalid_argument.
SenGraph connect_gabriel(const std::vector<SenNode>& nodes, const Raster& r,
                         const FeatureConfig& feat = {});

/// Relative neighborhood graph: (u,v) connected iff no w has
/// max(d(u,w), d(v,w)) < d(u,v). Always a subgraph of the Gabriel graph.
SenGraph connect_rng(const std::vector<SenNode>& nodes, const Raster& r,
                     const FeatureConfig& feat = {});

enum class TerrainMode { edge_driven, node_driven, both };

struct TerrainConnectParams {
  double alpha = 4.0;
  std::optional<double> beta;   // default: 8 / raster value range
  std::optional<double> gamma;  // default: 1 / (2 * mean candidate length)
  int climb_samples = 64;
};

/// Thins Gabriel candidates with a terrain-dependent survival probability:
/// edge_driven uses the total absolute elevation change along the chord,
/// node_driven the difference of endpoint patch standard deviations, `both`
/// the product of the two survival probabilities. Dropped candidates are
/// re-added in ascending length order until the graph is connected.
SenGraph connect_terrain_conditioned(const std::vector<SenNode>& nodes,
                                     const Raster& r, TerrainMode mode,
                                     const TerrainConnectParams& params,
                                     std::uint64_t seed,
                                     const FeatureConfig& feat = {});

struct DegreeStats {
  std::map<int, int> histogram;
  int min = 0;
  double mean = 0.0;
  int max = 0;
};

struct LengthStats {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
};

DegreeStats degree_stats(const SenGraph& g);
LengthStats edge_length_stats(const SenGraph& g);

bool is_connected(const SenGraph& g);

/// Text exchange format: a NODES section of "id x y" lines and an EDGES
/// section of "u v" lines; '#' starts a comment. Features are re-derived from
/// the raster on read; coordinates outside the raster footprint and edges
/// naming unknown ids are errors.
SenGraph parse_edgelist(std::string_view text, const std::string& origin,
                        const Raster& r, const FeatureConfig& feat = {});
SenGraph read_edgelist(const std::filesystem::path& path, const Raster& r,
                       const FeatureConfig& feat = {});
std::string serialize_edgelist(const SenGraph& g);
void write_edgelist(const SenGraph& g, const std::filesystem::path& path);

}  // namespace sengraph
