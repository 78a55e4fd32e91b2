#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "sengraph/sen_graph.hpp"

namespace sengraph {

struct CandidateEdge {
  std::int64_t u = 0;  // global ids, u < v
  std::int64_t v = 0;
  int label = 0;  // 1 iff the pair is an edge of the simplified subgraph
  std::vector<double> edge_feat;
};

/// Complete graph over a simplified window subgraph. Node ids stay global so
/// reconstruction can pool votes across samples; positions are re-expressed
/// relative to the window centre.
struct SampleGraph {
  std::int64_t center_node = 0;
  std::vector<SenNode> nodes;  // sorted by id; pos relative to window centre
  std::vector<CandidateEdge> candidates;  // sorted by (u, v); n*(n-1)/2 of them
  // Provenance: source graph tag and window placement in world coordinates.
  std::string graph_id;
  Point center;  // window centre (world)
  double window = 0.0;

  std::size_t node_index(std::int64_t id) const;
  Point world_pos(std::size_t node_idx) const {
    return {center.x + nodes[node_idx].pos.x,
            center.y + nodes[node_idx].pos.y};
  }
  std::size_t real_edge_count() const;
};

/// Plain topology view used between extraction and conversion.
struct WindowSubgraph {
  std::vector<std::int64_t> node_ids;
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;  // u < v
};

/// Nodes of g within the axis-aligned square of side `window` centred on
/// `center`, plus the edges with both endpoints inside.
WindowSubgraph extract_window(const SenGraph& g, const SenNode& center,
                              double window);

/// Iteratively removes degree-2 nodes by merging their two incident edges,
/// skipping removals that would create a self-loop or duplicate an existing
/// edge. Nodes in `keep` are never removed.
WindowSubgraph simplify(const WindowSubgraph& sub,
                        const std::set<std::int64_t>& keep = {});

struct SamplingConfig {
  double window = 0.0;
  int max_sample_nodes = 64;
};

/// Converts a simplified window into a complete labelled graph with features
/// re-derived from the raster. Returns false (leaving `out` untouched) when
/// the window has fewer than 3 nodes, fewer than 2 real edges, or more than
/// max_sample_nodes nodes.
bool to_sample(const WindowSubgraph& sub, const SenGraph& g, const Raster& r,
               const SamplingConfig& cfg, Point center,
               const std::string& graph_id, SampleGraph* out);

struct SampleSet {
  std::vector<SampleGraph> samples;
  int rejected_small = 0;
  int rejected_oversize = 0;
};

/// One extraction attempt per node of g. Throws std::runtime_error when no
/// sample is accepted, or when some edge that fits inside a window (both
/// endpoint offsets within window/2 of an endpoint) ends up in no sample.
SampleSet sample_all(const SenGraph& g, const Raster& r,
                     const SamplingConfig& cfg, const std::string& graph_id);

/// Sample file: the edge-list format (relative coordinates) plus a
/// CANDIDATES section of "u v label" lines; provenance rides in `#!` comment
/// lines. Features are re-derived from the raster on read.
std::string serialize_sample(const SampleGraph& s);
SampleGraph parse_sample(std::string_view text, const std::string& origin,
                         const Raster& r, const FeatureConfig& feat);
void write_sample(const SampleGraph& s, const std::filesystem::path& path);
SampleGraph read_sample(const std::filesystem::path& path, const Raster& r,
                        const FeatureConfig& feat);

/// Writes samples/sample_00000.txt, ... and returns the paths.
std::vector<std::filesystem::path> write_sample_dir(
    const std::vector<SampleGraph>& samples, const std::filesystem::path& dir);
std::vector<SampleGraph> read_sample_dir(const std::filesystem::path& dir,
                                         const Raster& r,
                                         const FeatureConfig& feat);

}  // namespace sengraph
