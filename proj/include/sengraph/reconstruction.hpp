#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sengraph {

/// One scored candidate pair from one sample, in global node ids.
struct PairPrediction {
  std::int64_t u = 0;
  std::int64_t v = 0;
  double prob = 0.0;
};

/// All probabilities ever assigned to one canonical pair, across samples.
struct EdgeVote {
  std::int64_t u = 0;  // u < v
  std::int64_t v = 0;
  std::vector<double> probs;
  double mean = 0.0;
};

/// Groups per-sample predictions by canonical pair, in pair order. Pairs
/// never scored together in any sample simply do not appear.
std::vector<EdgeVote> aggregate(
    const std::vector<std::vector<PairPrediction>>& per_sample);

/// Pairs whose mean probability strictly exceeds the threshold, sorted.
/// Ties at the threshold are excluded.
std::vector<std::pair<std::int64_t, std::int64_t>> reassemble(
    const std::vector<EdgeVote>& votes, double threshold);

/// F1 = tp / (tp + (fp + fn)/2). A zero denominator yields 0 and sets
/// *degenerate when provided.
double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn,
                      bool* degenerate = nullptr);

/// Fraction of truth pairs present in the predicted edge set. Throws
/// std::invalid_argument when truth is empty.
double edge_recovery_accuracy(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& predicted,
    const std::vector<std::pair<std::int64_t, std::int64_t>>& truth);

struct EvalRow {
  std::int64_t u = 0;
  std::int64_t v = 0;
  std::size_t votes = 0;
  double mean = 0.0;
  bool predicted = false;
  bool in_truth = false;
};

struct EvalReport {
  double threshold = 0.5;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t unreachable = 0;  // truth pairs never voted; included in fn
  std::size_t truth_total = 0;
  double f1 = 0.0;
  double accuracy = 0.0;
  bool f1_degenerate = false;
  std::vector<EvalRow> rows;  // voted pairs in pair order
};

/// Confusion over the voted universe at the given threshold. Truth pairs
/// outside the universe count as false negatives and as `unreachable`.
EvalReport confusion(
    const std::vector<EdgeVote>& votes, double threshold,
    const std::vector<std::pair<std::int64_t, std::int64_t>>& truth);

std::string serialize_eval_report(const EvalReport& r);
std::string eval_table_csv(const EvalReport& r);

}  // namespace sengraph
