#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sengraph/models.hpp"
#include "sengraph/sampling.hpp"

namespace sengraph {

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 1e-3;  // 0 is allowed and performs null steps
  std::string optimizer = "adam";  // adam | sgd
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  bool pos_weight_auto = true;
  double pos_weight = 1.0;  // ratio w_pos / w_neg when not auto
  std::uint64_t seed = 0;
  bool shuffle = true;
  int early_stop_patience = 0;  // 0 disables early stopping
};

struct EpochStats {
  double loss = 0.0;    // candidate-weighted mean over the epoch
  double f1 = 0.0;      // training F1 at threshold 0.5
  double val_f1 = -1.0;  // -1 when no validation set was given
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // 1-based; 0 when early stopping is off
  double wall_seconds = 0.0;
};

/// (#label-0) / (#label-1) across every candidate of the set. Throws
/// std::invalid_argument when there are no positive labels.
double auto_pos_weight(const std::vector<SampleGraph>& samples);

/// Class weights scaled so the average weight over the candidate
/// distribution is exactly 1; a degenerate split (no positives or no
/// negatives) falls back to unit weights.
struct ClassWeights {
  double pos = 1.0;
  double neg = 1.0;
};
ClassWeights normalized_class_weights(double pos_weight_ratio,
                                      std::size_t positives,
                                      std::size_t negatives);

/// Deterministic shuffled split; both sides non-empty or
/// std::invalid_argument. Order within each side follows the input order.
std::pair<std::vector<SampleGraph>, std::vector<SampleGraph>> split(
    const std::vector<SampleGraph>& samples, double fraction,
    std::uint64_t seed);

/// Optimizes p in place, one update per sample per epoch. Writes
/// "epoch N loss X f1 Y [val_f1 Z]" lines to log when given. A non-finite
/// loss aborts with DivergenceError naming the epoch and sample. With
/// early_stop_patience > 0 (requires a non-empty validation set) training
/// stops once validation F1 has not improved for that many epochs and the
/// best-epoch parameters are restored.
TrainReport train(ModelParams& p, const std::vector<SampleGraph>& train_set,
                  const std::vector<SampleGraph>& val_set,
                  const TrainConfig& cfg, std::ostream* log = nullptr);

}  // namespace sengraph
