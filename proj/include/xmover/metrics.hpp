#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "xmover/lm.hpp"
#include "xmover/record.hpp"
#include "xmover/remap.hpp"
#include "xmover/vecspace.hpp"

namespace xmover {

enum class MetricFamily { kMover, kCosine };

// Where the re-mapping is applied for Mover metrics: to token vectors before
// n-gram pooling, or to the pooled n-gram vectors.
enum class RemapStage { kTokens, kGrams };

enum class SentenceSource { kPooled, kExternal };

using ExternalScores = std::unordered_map<std::string, double>;

struct MetricConfig {
  MetricFamily family = MetricFamily::kMover;
  int ngram_order = 2;  // Mover only
  std::shared_ptr<const TransformPipeline> pipeline;
  RemapStage remap_stage = RemapStage::kTokens;
  std::shared_ptr<const NgramLm> lm;
  std::shared_ptr<const ExternalScores> external_lm;
  double lm_weight = 0.1;
  SentenceSource sentence_source = SentenceSource::kPooled;  // Cosine only
  bool lowercase = true;

  bool lm_active() const { return lm != nullptr || external_lm != nullptr; }
  void validate() const;
  // e.g. "Mover-2 + CLP.UMD (+) LM"
  std::string name() const;
};

// A sentence plus the ids under which externally supplied vectors or LM
// scores may be filed; lookups try the keys in order.
struct Sentence {
  TokenList tokens;
  std::vector<std::string> keys;
};

struct SegmentInput {
  Sentence source;
  Sentence candidate;
};

struct SegmentScore {
  std::string system_id;
  std::string segment_id;
  double similarity = std::numeric_limits<double>::quiet_NaN();
  double base_similarity = std::numeric_limits<double>::quiet_NaN();
  double lm_score = 0.0;
  double lm_weight = 0.0;
  bool lm_active = false;
  bool scorable = false;
  std::string reason;  // why the segment could not be scored

  static SegmentScore unscorable(std::string reason);
};

// Higher is better. similarity = base + lm_weight * lm_score when an LM is
// attached, otherwise similarity = base.
SegmentScore fuse_lm(double base_similarity, double lm_score, double lm_weight);

// Externally computed sentence vectors, keyed by sentence id.
struct ExternalSentences {
  const EmbeddingSpace* source = nullptr;
  const EmbeddingSpace* candidate = nullptr;
};

// Mover-n: base similarity is the negated Word Mover's Distance between the
// n-gram sequences, after re-mapping the embeddings.
SegmentScore score_mover(const Sentence& x, const Sentence& y, const EmbeddingSpace& src_space,
                         const EmbeddingSpace& tgt_space, const MetricConfig& config);

// Cosine of (optionally re-mapped) sentence embeddings.
SegmentScore score_cosine(const Sentence& x, const Sentence& y, const EmbeddingSpace& src_space,
                          const EmbeddingSpace& tgt_space, const MetricConfig& config,
                          const ExternalSentences& external = {});

// Bundles spaces and configuration into a reusable, thread-safe metric.
class Scorer {
 public:
  Scorer(const EmbeddingSpace& src_space, const EmbeddingSpace& tgt_space, MetricConfig config,
         ExternalSentences external = {});

  SegmentScore operator()(const SegmentInput& input) const;
  SegmentScore score(const EvaluationRecord& record) const;

  // Builds the scoring input for a record: the source is keyed by segment id,
  // the hypothesis by "<system_id>:<segment_id>" and then by segment id.
  SegmentInput input_for(const EvaluationRecord& record) const;
  Sentence sentence(const std::string& text, std::vector<std::string> keys) const;

  const MetricConfig& config() const { return config_; }

 private:
  const EmbeddingSpace* src_;
  const EmbeddingSpace* tgt_;
  MetricConfig config_;
  ExternalSentences external_;
};

// Scores every record; output order matches input order for any worker count.
std::vector<SegmentScore> score_batch(const std::vector<EvaluationRecord>& records, const Scorer& scorer,
                                      unsigned workers = 1);

}  // namespace xmover
