#include "sengraph/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "sengraph/errors.hpp"
#include "sengraph/fsio.hpp"
#include "sengraph/reconstruction.hpp"
#include "sengraph/rng.hpp"

namespace sengraph {

namespace {

void count_labels(const std::vector<SampleGraph>& samples, std::size_t* pos,
                  std::size_t* neg) {
  *pos = 0;
  *neg = 0;
  for (const SampleGraph& s : samples)
    for (const CandidateEdge& c : s.candidates) {
      if (c.label == 1)
        ++*pos;
      else
        ++*neg;
    }
}

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
    throw std::invalid_argument("learning_rate must be finite and >= 0");
  if (cfg.optimizer != "adam" && cfg.optimizer != "sgd")
    throw std::invalid_argument("optimizer must be 'adam' or 'sgd'");
  if (!cfg.pos_weight_auto && !(cfg.pos_weight > 0.0))
    throw std::invalid_argument("pos_weight must be > 0");
  if (cfg.early_stop_patience < 0)
    throw std::invalid_argument("early_stop_patience must be >= 0");
}

/// Per-tensor first/second moment state, indexed like ModelParams::named().
struct AdamState {
  std::vector<std::vector<double>> m, v;
  std::int64_t step = 0;
};

/// F1 over every candidate of the set at threshold 0.5, predictions strictly
/// above counting as positive.
double candidate_f1(const std::vector<SampleGraph>& samples,
                    const ModelParams& p) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const SampleGraph& s : samples) {
    std::vector<double> probs = predict_values(s, p);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      bool pred = probs[i] > 0.5;
      bool truth = s.candidates[i].label == 1;
      if (pred && truth) ++tp;
      if (pred && !truth) ++fp;
      if (!pred && truth) ++fn;
    }
  }
  return f1_from_counts(tp, fp, fn);
}

}  // namespace

double auto_pos_weight(const std::vector<SampleGraph>& samples) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  std::size_t pos = 0, neg = 0;
  count_labels(samples, &pos, &neg);
  if (pos == 0)
    throw std::invalid_argument(
        "sample set has no positive labels; cannot weight classes");
  return static_cast<double>(neg) / static_cast<double>(pos);
}

ClassWeights normalized_class_weights(double pos_weight_ratio,
                                      std::size_t positives,
                                      std::size_t negatives) {
  if (!(pos_weight_ratio >= 0.0) || !std::isfinite(pos_weight_ratio))
    throw std::invalid_argument("pos_weight ratio must be finite and >= 0");
  if (positives == 0 || negatives == 0) return {1.0, 1.0};
  double p = static_cast<double>(positives);
  double n = static_cast<double>(negatives);
  double scale = (p + n) / (pos_weight_ratio * p + n);
  return {pos_weight_ratio * scale, scale};
}

std::pair<std::vector<SampleGraph>, std::vector<SampleGraph>> split(
    const std::vector<SampleGraph>& samples, double fraction,
    std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split fraction must lie strictly in (0, 1)");
  std::size_t n = samples.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(child_seed(seed, "split"));
  rng.shuffle(idx);
  std::size_t n_train =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n)
    throw std::invalid_argument("split leaves one side empty; adjust the "
                                "fraction or provide more samples");
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[idx[i]] = true;
  std::pair<std::vector<SampleGraph>, std::vector<SampleGraph>> out;
  for (std::size_t i = 0; i < n; ++i)
    (in_train[i] ? out.first : out.second).push_back(samples[i]);
  return out;
}

TrainReport train(ModelParams& p, const std::vector<SampleGraph>& train_set,
                  const std::vector<SampleGraph>& val_set,
                  const TrainConfig& cfg, std::ostream* log) {
  validate_train_config(cfg);
  if (train_set.empty()) throw std::invalid_argument("no training samples");
  if (cfg.early_stop_patience > 0 && val_set.empty())
    throw std::invalid_argument(
        "early stopping needs a non-empty validation set");

  double ratio =
      cfg.pos_weight_auto ? auto_pos_weight(train_set) : cfg.pos_weight;
  std::size_t pos = 0, neg = 0;
  count_labels(train_set, &pos, &neg);
  ClassWeights w = normalized_class_weights(ratio, pos, neg);

  auto named = p.named();
  AdamState adam;
  if (cfg.optimizer == "adam") {
    adam.m.resize(named.size());
    adam.v.resize(named.size());
    for (std::size_t i = 0; i < named.size(); ++i) {
      adam.m[i].assign(named[i].second->numel(), 0.0);
      adam.v[i].assign(named[i].second->numel(), 0.0);
    }
  }

  auto snapshot = [&]() {
    std::vector<std::vector<double>> vals;
    vals.reserve(named.size());
    for (auto& [name, t] : named) vals.push_back(t->v);
    return vals;
  };
  auto restore = [&](const std::vector<std::vector<double>>& vals) {
    for (std::size_t i = 0; i < named.size(); ++i)
      named[i].second->v = vals[i];
  };

  TrainReport report;
  auto t0 = std::chrono::steady_clock::now();
  double best_val = -1.0;
  std::vector<std::vector<double>> best_params;
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (cfg.shuffle) {
      Rng rng(child_seed(cfg.seed, "shuffle.epoch" + std::to_string(epoch)));
      rng.shuffle(order);
    }

    double loss_acc = 0.0;
    std::size_t cand_total = 0;
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t si : order) {
      const SampleGraph& s = train_set[si];
      std::size_t n_cand = s.candidates.size();
      p.zero_grad();
      double sample_loss = 0.0;
      {
        TapeScope tape;
        std::vector<Tensor> probs = predict_edges(s, p);
        std::vector<Tensor> losses;
        losses.reserve(n_cand);
        for (std::size_t i = 0; i < n_cand; ++i) {
          bool positive = s.candidates[i].label == 1;
          losses.push_back(weighted_bce(probs[i], positive ? 1.0 : 0.0,
                                        positive ? w.pos : w.neg));
          bool pred = probs[i]->v[0] > 0.5;
          if (pred && positive) ++tp;
          if (pred && !positive) ++fp;
          if (!pred && positive) ++fn;
        }
        Tensor loss = scale(add_n(losses), 1.0 / static_cast<double>(n_cand));
        sample_loss = scalar_value(loss);
        if (!std::isfinite(sample_loss))
          throw DivergenceError("training diverged: non-finite loss at epoch " +
                                std::to_string(epoch) + ", sample " +
                                std::to_string(si));
        backward(loss);
      }
      // Parameter step; strictly sequential so reruns are bit-identical.
      if (cfg.optimizer == "sgd") {
        for (auto& [name, t] : named)
          for (std::size_t i = 0; i < t->numel(); ++i)
            t->v[i] -= cfg.learning_rate * t->g[i];
      } else {
        ++adam.step;
        double b1t = 1.0 - std::pow(cfg.adam_beta1, adam.step);
        double b2t = 1.0 - std::pow(cfg.adam_beta2, adam.step);
        for (std::size_t k = 0; k < named.size(); ++k) {
          Tensor& t = named[k].second;
          for (std::size_t i = 0; i < t->numel(); ++i) {
            double g = t->g[i];
            adam.m[k][i] = cfg.adam_beta1 * adam.m[k][i] +
                           (1.0 - cfg.adam_beta1) * g;
            adam.v[k][i] = cfg.adam_beta2 * adam.v[k][i] +
                           (1.0 - cfg.adam_beta2) * g * g;
            double mhat = adam.m[k][i] / b1t;
            double vhat = adam.v[k][i] / b2t;
            t->v[i] -=
                cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
          }
        }
      }
      loss_acc += sample_loss * static_cast<double>(n_cand);
      cand_total += n_cand;
    }

    EpochStats stats;
    stats.loss = loss_acc / static_cast<double>(cand_total);
    stats.f1 = f1_from_counts(tp, fp, fn);
    if (!val_set.empty()) stats.val_f1 = candidate_f1(val_set, p);
    report.epochs.push_back(stats);
    if (log) {
      *log << "epoch " << epoch << " loss " << fmt_double(stats.loss)
           << " f1 " << fmt_double(stats.f1);
      if (stats.val_f1 >= 0.0) *log << " val_f1 " << fmt_double(stats.val_f1);
      *log << "\n";
    }

    if (cfg.early_stop_patience > 0) {
      if (stats.val_f1 > best_val) {
        best_val = stats.val_f1;
        best_params = snapshot();
        report.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= cfg.early_stop_patience) {
        restore(best_params);
        break;
      }
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

}  // namespace sengraph
