#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sengraph/sampling.hpp"
#include "sengraph/tensor.hpp"

namespace sengraph {

/// One stage of the region encoder: a single-channel square kernel applied
/// with a fixed stride.
struct ConvStage {
  Tensor kernel;
  int stride = 2;
};

/// Per-layer weights for the multimodal message-passing variants. Only the
/// tensors the variant actually uses are allocated; the rest stay null.
struct GmuLayerParams {
  Tensor w_pos;    // 2 x d, maps position differences
  Tensor w_edge;   // S x d, maps chord sample vectors
  Tensor w_point;  // 1 x d, lifts the scalar point feature
  std::vector<ConvStage> conv;  // region difference encoder
  Tensor region_fc;             // flattened conv output x d
};

struct SageLayerParams {
  Tensor w_self;  // in x d
  Tensor w_nb;    // in x d, applied to the neighbor mean
};

/// Two-layer scoring head; the only place biases appear.
struct HeadParams {
  Tensor w1;  // 2d x hidden
  Tensor b1;  // 1 x hidden
  Tensor w2;  // hidden x 1
  Tensor b2;  // 1 x 1
};

struct ModelConfig {
  std::string variant = "gmu";  // gmu | rsgcn | esgcn | graphsage
  int layers = 2;
  int d = 32;
  double leaky_slope = 0.01;
  int head_hidden = 32;
  bool fuse_edge = true;  // gmu only: include the edge embedding factor
  int conv_kernel = 5;
  int conv_stride = 2;
  int conv_stages = 1;
};

bool uses_region(const ModelConfig& cfg);
bool uses_point(const ModelConfig& cfg);
bool uses_edge(const ModelConfig& cfg);

/// Throws std::invalid_argument when fields are out of range or the conv
/// stack does not fit the region grid.
void validate_model_config(const ModelConfig& cfg, const FeatureConfig& feat);

struct ModelParams {
  ModelConfig config;
  FeatureConfig feat;
  std::vector<GmuLayerParams> gmu_layers;
  std::vector<SageLayerParams> sage_layers;
  HeadParams head;

  /// Every trainable tensor with its canonical name, in a fixed order.
  std::vector<std::pair<std::string, Tensor>> named() const;
  void zero_grad() const;
};

/// Xavier-uniform weights (biases zero); each tensor draws from its own
/// seed stream so adding a layer elsewhere never shifts another tensor.
ModelParams init_model(const ModelConfig& cfg, const FeatureConfig& feat,
                       std::uint64_t seed);

// Embedding blocks, exposed for direct testing. All return 1 x d rows.
Tensor embed_position(Point p_u, Point p_v, const Tensor& w_pos, double slope);
Tensor embed_edge(const Tensor& e_uv, const Tensor& w_edge, double slope);
Tensor embed_region(const Tensor& r_u, const Tensor& r_v,
                    const GmuLayerParams& lp, double slope);
Tensor embed_point(double point_feat, const Tensor& w_point, double slope);

/// Element-wise product of the embeddings the variant consumes. Unused
/// factors may be null.
Tensor fuse(const Tensor& pos, const Tensor& point, const Tensor& region,
            const Tensor& edge, const ModelConfig& cfg);

/// Representation of every node of the sample after all layers, in node
/// order. Messages flow over label-1 candidate pairs, both directions, and
/// are summed in sender-position order so relabeling nodes cannot change
/// the floating-point result.
std::vector<Tensor> node_representations(const SampleGraph& s,
                                         const ModelParams& p);

/// Probability per candidate, in candidate order. Each score is the average
/// of the head applied to (u,v) and to (v,u), taken after the logistic.
std::vector<Tensor> predict_edges(const SampleGraph& s, const ModelParams& p);

/// predict_edges without gradient tracking, reduced to plain values.
std::vector<double> predict_values(const SampleGraph& s, const ModelParams& p);

// Self-describing checkpoint: config, feature geometry and named tensors in
// one JSON document; loads are shape- and name-checked.
std::string serialize_checkpoint(const ModelParams& p);
ModelParams parse_checkpoint(const std::string& text,
                             const std::string& origin);
void save_checkpoint(const ModelParams& p, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace sengraph
