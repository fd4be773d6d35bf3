#include "xmover/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <mutex>
#include <thread>

#include "xmover/error.hpp"
#include "xmover/transport.hpp"

namespace xmover {

void MetricConfig::validate() const {
  if (!(lm_weight >= 0.0)) throw InvalidArgument("metric config: lm_weight must be >= 0");
  if (family == MetricFamily::kMover && ngram_order != 1 && ngram_order != 2) {
    throw InvalidArgument("metric config: Mover n-gram order must be 1 or 2");
  }
  if (lm && external_lm) throw InvalidArgument("metric config: attach either a trained LM or external LM scores");
}

std::string MetricConfig::name() const {
  std::string out = family == MetricFamily::kMover ? "Mover-" + std::to_string(ngram_order) : "Cosine";
  if (pipeline && !pipeline->empty()) {
    std::string spec = pipeline->name();
    std::transform(spec.begin(), spec.end(), spec.begin(), [](unsigned char c) { return std::toupper(c); });
    out += " + " + spec;
  }
  if (lm_active()) out += " (+) LM";
  return out;
}

SegmentScore SegmentScore::unscorable(std::string reason) {
  SegmentScore s;
  s.scorable = false;
  s.reason = std::move(reason);
  return s;
}

SegmentScore fuse_lm(double base_similarity, double lm_score, double lm_weight) {
  SegmentScore s;
  s.scorable = true;
  s.base_similarity = base_similarity;
  s.lm_score = lm_score;
  s.lm_weight = lm_weight;
  s.lm_active = true;
  s.similarity = base_similarity + lm_weight * lm_score;
  return s;
}

namespace {

// Adds the LM term (if configured) to a base similarity.
SegmentScore finish(double base, const Sentence& candidate, const MetricConfig& config) {
  if (config.lm) {
    return fuse_lm(base, score_sentence(*config.lm, candidate.tokens).avg_log_prob, config.lm_weight);
  }
  if (config.external_lm) {
    for (const auto& key : candidate.keys) {
      auto it = config.external_lm->find(key);
      if (it != config.external_lm->end()) return fuse_lm(base, it->second, config.lm_weight);
    }
    return SegmentScore::unscorable("missing external LM score for '" +
                                    (candidate.keys.empty() ? std::string("<no key>") : candidate.keys.front()) + "'");
  }
  SegmentScore s;
  s.scorable = true;
  s.base_similarity = base;
  s.similarity = base;
  return s;
}

const Vector* find_external(const EmbeddingSpace* space, const Sentence& s, Vector& storage) {
  if (!space) return nullptr;
  for (const auto& key : s.keys) {
    if (auto v = space->lookup(key)) {
      storage = std::move(*v);
      return &storage;
    }
  }
  return nullptr;
}

}  // namespace

SegmentScore score_mover(const Sentence& x, const Sentence& y, const EmbeddingSpace& src_space,
                         const EmbeddingSpace& tgt_space, const MetricConfig& config) {
  if (config.family != MetricFamily::kMover) throw InvalidArgument("score_mover: config family is not mover");
  if (src_space.dimension() != tgt_space.dimension()) throw InvalidArgument("score_mover: dimension mismatch");

  EmbeddedTokens ex = embed_tokens(x.tokens, src_space);
  EmbeddedTokens ey = embed_tokens(y.tokens, tgt_space);
  if (ex.empty()) return SegmentScore::unscorable("source has no in-vocabulary tokens");
  if (ey.empty()) return SegmentScore::unscorable("candidate has no in-vocabulary tokens");

  const TransformPipeline* pipeline = config.pipeline.get();
  if (pipeline && !pipeline->empty() && config.remap_stage == RemapStage::kTokens) {
    ex.vectors = pipeline->apply_columns(ex.vectors, Side::kSource);
    ey.vectors = pipeline->apply_columns(ey.vectors, Side::kTarget);
  }
  NgramSequence gx = ngramize(ex, config.ngram_order);
  NgramSequence gy = ngramize(ey, config.ngram_order);
  if (pipeline && !pipeline->empty() && config.remap_stage == RemapStage::kGrams) {
    gx.embeddings = pipeline->apply_columns(gx.embeddings, Side::kSource);
    gy.embeddings = pipeline->apply_columns(gy.embeddings, Side::kTarget);
  }
  return finish(-wmd(gx, gy), y, config);
}

SegmentScore score_cosine(const Sentence& x, const Sentence& y, const EmbeddingSpace& src_space,
                          const EmbeddingSpace& tgt_space, const MetricConfig& config,
                          const ExternalSentences& external) {
  if (config.family != MetricFamily::kCosine) throw InvalidArgument("score_cosine: config family is not cosine");

  Vector ex, ey;
  if (config.sentence_source == SentenceSource::kExternal) {
    Vector sx, sy;
    const Vector* px = find_external(external.source, x, sx);
    const Vector* py = find_external(external.candidate, y, sy);
    if (!px) return SegmentScore::unscorable("missing external source vector");
    if (!py) return SegmentScore::unscorable("missing external candidate vector");
    ex = *px;
    ey = *py;
  } else {
    SentenceEmbedding px = pool_sentence(x.tokens, src_space);
    SentenceEmbedding py = pool_sentence(y.tokens, tgt_space);
    if (px.degenerate) return SegmentScore::unscorable("degenerate source embedding");
    if (py.degenerate) return SegmentScore::unscorable("degenerate candidate embedding");
    ex = std::move(px.vector);
    ey = std::move(py.vector);
  }
  if (ex.size() != ey.size()) throw InvalidArgument("score_cosine: dimension mismatch");
  if (config.pipeline && !config.pipeline->empty()) {
    ex = config.pipeline->apply(ex, Side::kSource);
    ey = config.pipeline->apply(ey, Side::kTarget);
  }
  const double nx = ex.norm(), ny = ey.norm();
  if (!(nx > 0.0)) return SegmentScore::unscorable("degenerate source embedding");
  if (!(ny > 0.0)) return SegmentScore::unscorable("degenerate candidate embedding");
  const double cosine = std::clamp(ex.dot(ey) / (nx * ny), -1.0, 1.0);
  return finish(cosine, y, config);
}

Scorer::Scorer(const EmbeddingSpace& src_space, const EmbeddingSpace& tgt_space, MetricConfig config,
               ExternalSentences external)
    : src_(&src_space), tgt_(&tgt_space), config_(std::move(config)), external_(external) {
  config_.validate();
  if (src_->dimension() != tgt_->dimension()) throw InvalidArgument("Scorer: embedding dimensions differ");
  if (config_.pipeline && !config_.pipeline->empty() && config_.pipeline->dimension() != src_->dimension()) {
    throw InvalidArgument("Scorer: transform dimension does not match the embeddings");
  }
  if (config_.family == MetricFamily::kCosine && config_.sentence_source == SentenceSource::kExternal &&
      (!external_.source || !external_.candidate)) {
    throw InvalidArgument("Scorer: external sentence vectors requested but not supplied");
  }
}

SegmentScore Scorer::operator()(const SegmentInput& input) const {
  if (config_.family == MetricFamily::kMover) {
    return score_mover(input.source, input.candidate, *src_, *tgt_, config_);
  }
  return score_cosine(input.source, input.candidate, *src_, *tgt_, config_, external_);
}

Sentence Scorer::sentence(const std::string& text, std::vector<std::string> keys) const {
  return Sentence{tokenize(text, config_.lowercase), std::move(keys)};
}

SegmentInput Scorer::input_for(const EvaluationRecord& record) const {
  return SegmentInput{sentence(record.source, {record.segment_id}),
                      sentence(record.hypothesis, {record.system_id + ":" + record.segment_id, record.segment_id})};
}

SegmentScore Scorer::score(const EvaluationRecord& record) const {
  SegmentScore s = (*this)(input_for(record));
  s.system_id = record.system_id;
  s.segment_id = record.segment_id;
  return s;
}

std::vector<SegmentScore> score_batch(const std::vector<EvaluationRecord>& records, const Scorer& scorer,
                                      unsigned workers) {
  std::vector<SegmentScore> out(records.size());
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, records.size()))));
  if (workers == 1) {
    for (std::size_t i = 0; i < records.size(); ++i) out[i] = scorer.score(records[i]);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        out[i] = scorer.score(records[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace xmover
