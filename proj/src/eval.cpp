#include "xmover/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "xmover/error.hpp"

namespace xmover {

std::string to_string(Statistic statistic) { return statistic == Statistic::kPearson ? "pearson" : "kendall"; }
std::string to_string(Level level) { return level == Level::kSegment ? "segment" : "system"; }

Statistic parse_statistic(const std::string& name) {
  if (name == "pearson") return Statistic::kPearson;
  if (name == "kendall") return Statistic::kKendall;
  throw InvalidArgument("unknown statistic '" + name + "'");
}

Level parse_level(const std::string& name) {
  if (name == "segment") return Level::kSegment;
  if (name == "system") return Level::kSystem;
  throw InvalidArgument("unknown level '" + name + "'");
}

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b, const char* who) {
  if (a.size() != b.size()) throw InvalidArgument(std::string(who) + ": length mismatch");
  if (a.size() < 2) throw InvalidArgument(std::string(who) + ": need at least 2 points");
}

// Number of inversions in v (pairs i < j with v[i] > v[j]); sorts v.
std::uint64_t count_inversions(std::vector<double>& v) {
  std::vector<double> buffer(v.size());
  std::uint64_t swaps = 0;
  for (std::size_t width = 1; width < v.size(); width *= 2) {
    for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, v.size());
      const std::size_t hi = std::min(lo + 2 * width, v.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          swaps += mid - i;
          buffer[k++] = v[j++];
        } else {
          buffer[k++] = v[i++];
        }
      }
      while (i < mid) buffer[k++] = v[i++];
      while (j < hi) buffer[k++] = v[j++];
    }
    v.swap(buffer);
  }
  return swaps;
}

// Sum over groups of equal consecutive values of t (t - 1) / 2.
template <typename Equal>
std::uint64_t tied_pairs(std::size_t n, Equal equal) {
  std::uint64_t total = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      total += static_cast<std::uint64_t>(run) * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

}  // namespace

double pearson(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b, "pearson");
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a, db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (!(var_a > 0.0) || !(var_b > 0.0)) throw InvalidArgument("pearson: zero variance");
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

double kendall(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b, "kendall");
  const std::size_t n = a.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a[i] < a[j] || (a[i] == a[j] && b[i] < b[j]); });

  const std::uint64_t ties_a = tied_pairs(n, [&](auto i, auto j) { return a[order[i]] == a[order[j]]; });
  const std::uint64_t ties_ab = tied_pairs(
      n, [&](auto i, auto j) { return a[order[i]] == a[order[j]] && b[order[i]] == b[order[j]]; });

  std::vector<double> by_b(n);
  for (std::size_t i = 0; i < n; ++i) by_b[i] = b[order[i]];
  const std::uint64_t swaps = count_inversions(by_b);
  const std::uint64_t ties_b = tied_pairs(n, [&](auto i, auto j) { return by_b[i] == by_b[j]; });

  const auto total = static_cast<double>(static_cast<std::uint64_t>(n) * (n - 1) / 2);
  const double left = total - static_cast<double>(ties_a);
  const double right = total - static_cast<double>(ties_b);
  if (!(left > 0.0) || !(right > 0.0)) throw InvalidArgument("kendall: all values tied");
  // concordant - discordant over pairs untied in both coordinates
  const double s = total - static_cast<double>(ties_a) - static_cast<double>(ties_b) + static_cast<double>(ties_ab) -
                   2.0 * static_cast<double>(swaps);
  return std::clamp(s / std::sqrt(left * right), -1.0, 1.0);
}

double correlate(Statistic statistic, std::span<const double> a, std::span<const double> b) {
  return statistic == Statistic::kPearson ? pearson(a, b) : kendall(a, b);
}

double CorrelationReport::average() const {
  if (rows.empty()) return std::nan("");
  double sum = 0.0;
  for (const auto& r : rows) sum += r.value;
  return sum / static_cast<double>(rows.size());
}

namespace {

using Key = std::pair<std::string, std::string>;

std::map<Key, const SegmentScore*> index_scores(const std::vector<SegmentScore>& scores) {
  std::map<Key, const SegmentScore*> index;
  for (const auto& s : scores) {
    if (!index.emplace(Key{s.system_id, s.segment_id}, &s).second) {
      throw InvalidArgument("duplicate score for system '" + s.system_id + "', segment '" + s.segment_id + "'");
    }
  }
  return index;
}

}  // namespace

CorrelationRow segment_correlation(const std::vector<SegmentScore>& scores,
                                   const std::vector<EvaluationRecord>& records, Statistic statistic) {
  const auto index = index_scores(scores);
  std::vector<double> metric, human;
  CorrelationRow row;
  for (const auto& r : records) {
    if (!r.human_score) continue;
    auto it = index.find(Key{r.system_id, r.segment_id});
    if (it == index.end() || !it->second->scorable) {
      ++row.excluded;
      continue;
    }
    metric.push_back(it->second->similarity);
    human.push_back(*r.human_score);
  }
  if (metric.size() < 2) {
    throw InvalidArgument("segment_correlation: fewer than 2 scorable segments with human scores");
  }
  row.n = metric.size();
  row.value = correlate(statistic, metric, human);
  if (row.excluded > 0) row.warnings.push_back(std::to_string(row.excluded) + " segments excluded");
  return row;
}

CorrelationRow system_correlation(const std::vector<SegmentScore>& scores,
                                  const std::vector<EvaluationRecord>& records, Statistic statistic) {
  struct Totals {
    double metric = 0.0, human = 0.0;
    std::size_t metric_n = 0, human_n = 0;
  };
  std::map<std::string, Totals> systems;
  for (const auto& r : records) {
    auto& t = systems[r.system_id];
    if (r.human_score) {
      t.human += *r.human_score;
      ++t.human_n;
    }
  }
  for (const auto& s : scores) {
    auto it = systems.find(s.system_id);
    if (it == systems.end() || !s.scorable) continue;
    it->second.metric += s.similarity;
    ++it->second.metric_n;
  }

  CorrelationRow row;
  std::vector<double> metric, human;
  for (const auto& [system, t] : systems) {
    if (t.human_n == 0) continue;
    if (t.metric_n == 0) {
      ++row.excluded;
      row.warnings.push_back("system '" + system + "' has no scorable segments and was excluded");
      continue;
    }
    metric.push_back(t.metric / static_cast<double>(t.metric_n));
    human.push_back(t.human / static_cast<double>(t.human_n));
  }
  if (metric.size() < 2) throw InvalidArgument("system_correlation: fewer than 2 systems with scores");
  if (metric.size() == 2) row.warnings.push_back("only 2 systems: correlation is degenerate (always +-1)");
  row.n = metric.size();
  row.value = correlate(statistic, metric, human);
  return row;
}

double preference_diff(const SegmentMetric& metric, const Sentence& x, const Sentence& y_tilde,
                       const Sentence& y_hat) {
  const SegmentScore first = metric(SegmentInput{x, y_tilde});
  if (!first.scorable) throw UnscorableError("preference_diff: first candidate unscorable: " + first.reason);
  const SegmentScore second = metric(SegmentInput{x, y_hat});
  if (!second.scorable) throw UnscorableError("preference_diff: second candidate unscorable: " + second.reason);
  return first.similarity - second.similarity;
}

W2wResult w2w_statistic(const SegmentMetric& metric, const std::vector<W2wTriple>& triples) {
  W2wResult result;
  for (const auto& t : triples) {
    double d = 0.0;
    try {
      d = preference_diff(metric, t.source, t.word_by_word, t.reference);
    } catch (const UnscorableError&) {
      ++result.excluded;
      continue;
    }
    ++result.n;
    if (d > 0.0) ++result.preferred;
  }
  if (result.n == 0) throw InvalidArgument("w2w_statistic: no scorable triples");
  result.value = static_cast<double>(result.preferred) / static_cast<double>(result.n);
  return result;
}

std::vector<W2wTriple> w2w_triples(const std::vector<EvaluationRecord>& records, const Scorer& scorer) {
  std::vector<W2wTriple> triples;
  std::map<std::string, bool> seen;
  for (const auto& r : records) {
    if (!r.w2w || !r.reference) continue;
    // One triple per source segment, however many systems translated it.
    if (!seen.emplace(r.segment_id, true).second) continue;
    triples.push_back(W2wTriple{scorer.sentence(r.source, {r.segment_id}),
                                scorer.sentence(*r.w2w, {r.segment_id + "#w2w"}),
                                scorer.sentence(*r.reference, {r.segment_id + "#ref"})});
  }
  return triples;
}

BilingualLexicon subsample_lexicon(const BilingualLexicon& lexicon, std::size_t size, std::uint64_t seed) {
  if (size == 0) throw InvalidArgument("subsample_lexicon: size must be positive");
  if (size > lexicon.size()) {
    throw InvalidArgument("subsample_lexicon: size " + std::to_string(size) + " exceeds lexicon size " +
                          std::to_string(lexicon.size()));
  }
  // Fisher-Yates driven by mt19937_64, whose output sequence is fixed by the
  // standard, so the permutation is identical across platforms.
  std::vector<std::size_t> order(lexicon.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  order.resize(size);
  std::sort(order.begin(), order.end());
  BilingualLexicon out;
  out.kind = lexicon.kind;
  out.pairs.reserve(size);
  for (auto i : order) out.pairs.push_back(lexicon.pairs[i]);
  return out;
}

std::vector<SweepRow> dictionary_size_sweep(const std::vector<std::size_t>& sizes, const BilingualLexicon& lexicon,
                                            const EmbeddingSpace& src_space, const EmbeddingSpace& tgt_space,
                                            const std::vector<EvaluationRecord>& records, const MetricConfig& config,
                                            const SweepOptions& options) {
  if (sizes.empty()) throw InvalidArgument("dictionary_size_sweep: no sizes given");
  for (auto size : sizes) {
    if (size == 0) throw InvalidArgument("dictionary_size_sweep: size must be positive");
    if (size > lexicon.size()) {
      throw InvalidArgument("dictionary_size_sweep: size " + std::to_string(size) + " exceeds lexicon size " +
                            std::to_string(lexicon.size()));
    }
  }
  std::vector<SweepRow> rows;
  for (auto size : sizes) {
    const BilingualLexicon sample = subsample_lexicon(lexicon, size, options.seed);
    const AlignedPairs pairs = stack_pairs(sample, src_space, tgt_space);
    MetricConfig fitted = config;
    fitted.pipeline = std::make_shared<const TransformPipeline>(fit_pipeline(options.pipeline, pairs, options.fit));
    const Scorer scorer(src_space, tgt_space, fitted);
    const auto scores = score_batch(records, scorer, options.workers);
    const CorrelationRow row = segment_correlation(scores, records, options.statistic);
    rows.push_back(SweepRow{size, pairs.size(), row.value, row.n});
  }
  return rows;
}

}  // namespace xmover
