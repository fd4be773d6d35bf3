#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "xmover/error.hpp"
#include "xmover/metrics.hpp"
#include "xmover/record.hpp"
#include "xmover/remap.hpp"

namespace xmover {

enum class Statistic { kPearson, kKendall };
enum class Level { kSegment, kSystem };

std::string to_string(Statistic statistic);
std::string to_string(Level level);
Statistic parse_statistic(const std::string& name);
Level parse_level(const std::string& name);

// Sample Pearson correlation. Needs equal lengths >= 2 and non-zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

// Kendall tau-b (tie-corrected), O(n log n).
double kendall(std::span<const double> a, std::span<const double> b);

double correlate(Statistic statistic, std::span<const double> a, std::span<const double> b);

struct CorrelationRow {
  std::string language_pair;
  double value = 0.0;
  std::size_t n = 0;
  std::size_t excluded = 0;  // unscorable or unmatched segments / systems
  std::vector<std::string> warnings;
};

struct CorrelationReport {
  Level level = Level::kSegment;
  Statistic statistic = Statistic::kPearson;
  std::vector<CorrelationRow> rows;

  // Unweighted mean over language pairs.
  double average() const;
};

// Correlates per-segment similarity with the human score of the matching
// record, all systems pooled. Scores are matched on (system_id, segment_id).
CorrelationRow segment_correlation(const std::vector<SegmentScore>& scores,
                                   const std::vector<EvaluationRecord>& records, Statistic statistic);

// Correlates per-system mean similarity with per-system mean human score.
CorrelationRow system_correlation(const std::vector<SegmentScore>& scores,
                                  const std::vector<EvaluationRecord>& records, Statistic statistic);

// Raised when a metric cannot score a candidate that a statistic needs.
class UnscorableError : public Error {
 public:
  using Error::Error;
};

using SegmentMetric = std::function<SegmentScore(const SegmentInput&)>;

// d(y_tilde, y_hat; x) = m(x, y_tilde) - m(x, y_hat); positive means the
// metric prefers y_tilde.
double preference_diff(const SegmentMetric& metric, const Sentence& x, const Sentence& y_tilde,
                       const Sentence& y_hat);

struct W2wTriple {
  Sentence source;
  Sentence word_by_word;
  Sentence reference;
};

struct W2wResult {
  double value = 0.0;         // fraction in [0, 1]
  std::size_t n = 0;          // scorable triples
  std::size_t preferred = 0;  // triples with d(x', y*) > 0
  std::size_t excluded = 0;
};

// Fraction of triples on which the metric strictly prefers the word-by-word
// translation over the reference. Unscorable triples are left out of N.
W2wResult w2w_statistic(const SegmentMetric& metric, const std::vector<W2wTriple>& triples);

// Triples from the records that carry both a reference and a word-by-word
// variant. Keys: "<segment_id>#w2w" and "<segment_id>#ref".
std::vector<W2wTriple> w2w_triples(const std::vector<EvaluationRecord>& records, const Scorer& scorer);

// Nested random subsample: the pairs kept at size s are a subset of those kept
// at any larger size (same seed). Kept pairs stay in file order.
BilingualLexicon subsample_lexicon(const BilingualLexicon& lexicon, std::size_t size, std::uint64_t seed);

struct SweepOptions {
  std::vector<RemapMethod> pipeline{RemapMethod::kClp};  // application order
  Statistic statistic = Statistic::kPearson;
  std::uint64_t seed = 2020;
  FitOptions fit;
  unsigned workers = 1;
};

struct SweepRow {
  std::size_t size = 0;
  std::size_t pairs_used = 0;
  double value = 0.0;
  std::size_t n = 0;
};

// For every size: subsample the lexicon, refit the pipeline, rescore and
// compute the segment-level correlation against the human scores.
std::vector<SweepRow> dictionary_size_sweep(const std::vector<std::size_t>& sizes, const BilingualLexicon& lexicon,
                                            const EmbeddingSpace& src_space, const EmbeddingSpace& tgt_space,
                                            const std::vector<EvaluationRecord>& records, const MetricConfig& config,
                                            const SweepOptions& options = {});

}  // namespace xmover
