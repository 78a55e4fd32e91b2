#include "sengraph/reconstruction.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "sengraph/fsio.hpp"

namespace sengraph {

namespace {

std::pair<std::int64_t, std::int64_t> canon(std::int64_t u, std::int64_t v) {
  return u < v ? std::pair{u, v} : std::pair{v, u};
}

void check_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("threshold must lie strictly in (0, 1)");
}

}  // namespace

std::vector<EdgeVote> aggregate(
    const std::vector<std::vector<PairPrediction>>& per_sample) {
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<double>> groups;
  for (const auto& sample : per_sample)
    for (const PairPrediction& p : sample) {
      if (p.u == p.v)
        throw std::invalid_argument("prediction pairs a node with itself");
      groups[canon(p.u, p.v)].push_back(p.prob);
    }
  std::vector<EdgeVote> out;
  out.reserve(groups.size());
  for (auto& [pair, probs] : groups) {
    EdgeVote v;
    v.u = pair.first;
    v.v = pair.second;
    double sum = 0.0;
    for (double p : probs) sum += p;
    v.mean = sum / static_cast<double>(probs.size());
    v.probs = std::move(probs);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::pair<std::int64_t, std::int64_t>> reassemble(
    const std::vector<EdgeVote>& votes, double threshold) {
  check_threshold(threshold);
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (const EdgeVote& v : votes)
    if (v.mean > threshold) out.push_back({v.u, v.v});
  std::sort(out.begin(), out.end());
  return out;
}

double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn,
                      bool* degenerate) {
  if (degenerate) *degenerate = false;
  double denom = static_cast<double>(tp) + (static_cast<double>(fp) +
                                            static_cast<double>(fn)) / 2.0;
  if (denom == 0.0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  return static_cast<double>(tp) / denom;
}

double edge_recovery_accuracy(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& predicted,
    const std::vector<std::pair<std::int64_t, std::int64_t>>& truth) {
  if (truth.empty())
    throw std::invalid_argument("truth edge set is empty");
  std::set<std::pair<std::int64_t, std::int64_t>> pred;
  for (auto [u, v] : predicted) pred.insert(canon(u, v));
  std::size_t hit = 0;
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  for (auto [u, v] : truth) {
    auto c = canon(u, v);
    if (!seen.insert(c).second)
      throw std::invalid_argument("duplicate truth edge");
    if (pred.count(c)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(seen.size());
}

EvalReport confusion(
    const std::vector<EdgeVote>& votes, double threshold,
    const std::vector<std::pair<std::int64_t, std::int64_t>>& truth) {
  check_threshold(threshold);
  if (truth.empty())
    throw std::invalid_argument("truth edge set is empty");
  std::set<std::pair<std::int64_t, std::int64_t>> truth_set;
  for (auto [u, v] : truth)
    if (!truth_set.insert(canon(u, v)).second)
      throw std::invalid_argument("duplicate truth edge");

  EvalReport r;
  r.threshold = threshold;
  r.truth_total = truth_set.size();
  std::set<std::pair<std::int64_t, std::int64_t>> voted;
  for (const EdgeVote& v : votes) {
    EvalRow row;
    row.u = v.u;
    row.v = v.v;
    row.votes = v.probs.size();
    row.mean = v.mean;
    row.predicted = v.mean > threshold;
    row.in_truth = truth_set.count({v.u, v.v}) > 0;
    voted.insert({v.u, v.v});
    if (row.predicted && row.in_truth) ++r.tp;
    if (row.predicted && !row.in_truth) ++r.fp;
    if (!row.predicted && row.in_truth) ++r.fn;
    if (!row.predicted && !row.in_truth) ++r.tn;
    r.rows.push_back(row);
  }
  std::sort(r.rows.begin(), r.rows.end(), [](const EvalRow& a,
                                             const EvalRow& b) {
    return std::pair{a.u, a.v} < std::pair{b.u, b.v};
  });
  for (const auto& t : truth_set)
    if (!voted.count(t)) ++r.unreachable;
  r.fn += r.unreachable;  // never-voted truth pairs are misses too
  r.f1 = f1_from_counts(r.tp, r.fp, r.fn, &r.f1_degenerate);
  r.accuracy = static_cast<double>(r.tp) / static_cast<double>(r.truth_total);
  return r;
}

std::string serialize_eval_report(const EvalReport& r) {
  std::string out;
  out += "threshold " + fmt_double(r.threshold) + "\n";
  out += "voted_pairs " + std::to_string(r.rows.size()) + "\n";
  out += "truth_edges " + std::to_string(r.truth_total) + "\n";
  out += "tp " + std::to_string(r.tp) + "\n";
  out += "fp " + std::to_string(r.fp) + "\n";
  out += "fn " + std::to_string(r.fn) + "\n";
  out += "tn " + std::to_string(r.tn) + "\n";
  out += "unreachable_truth_edges " + std::to_string(r.unreachable) + "\n";
  out += "f1 " + fmt_double(r.f1) + "\n";
  if (r.f1_degenerate)
    out += "warning f1 denominator is zero; score reported as 0\n";
  out += "accuracy " + fmt_double(r.accuracy) + "\n";
  return out;
}

std::string eval_table_csv(const EvalReport& r) {
  std::string out = "u,v,votes,mean_prob,predicted,in_truth\n";
  for (const EvalRow& row : r.rows) {
    out += std::to_string(row.u) + "," + std::to_string(row.v) + "," +
           std::to_string(row.votes) + "," + fmt_double(row.mean) + "," +
           (row.predicted ? "1" : "0") + "," + (row.in_truth ? "1" : "0") +
           "\n";
  }
  return out;
}

}  // namespace sengraph
