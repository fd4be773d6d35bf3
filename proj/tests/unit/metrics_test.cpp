#include "xmover/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "planted_world.hpp"
#include "xmover/error.hpp"
#include "xmover/transport.hpp"

namespace xmover {
namespace {

class MetricsTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    testing::PlantedWorldOptions o;
    o.vocab = 400;
    o.segments = 60;
    o.lm_sentences = 300;
    world_ = new testing::PlantedWorld(testing::make_planted_world(o));
    auto [src, tgt] = testing::with_dataset_idf(*world_);
    src_ = new EmbeddingSpace(std::move(src));
    tgt_ = new EmbeddingSpace(std::move(tgt));
    clp_ = std::make_shared<const TransformPipeline>(
        fit_pipeline({RemapMethod::kClp}, world_->lexicon, world_->source, world_->target));
    lm_ = std::make_shared<const NgramLm>(train_lm(world_->target_corpus));
  }
  static void TearDownTestSuite() {
    delete world_;
    delete src_;
    delete tgt_;
    clp_.reset();
    lm_.reset();
  }

  static Sentence s(const std::string& text) { return Sentence{tokenize(text), {}}; }

  static testing::PlantedWorld* world_;
  static EmbeddingSpace* src_;
  static EmbeddingSpace* tgt_;
  static std::shared_ptr<const TransformPipeline> clp_;
  static std::shared_ptr<const NgramLm> lm_;
};

testing::PlantedWorld* MetricsTest::world_ = nullptr;
EmbeddingSpace* MetricsTest::src_ = nullptr;
EmbeddingSpace* MetricsTest::tgt_ = nullptr;
std::shared_ptr<const TransformPipeline> MetricsTest::clp_;
std::shared_ptr<const NgramLm> MetricsTest::lm_;

TEST(FuseLm, IsBasePlusWeightedLm) {
  const SegmentScore s = fuse_lm(-1.25, -3.5, 0.1);
  EXPECT_EQ(s.similarity, -1.25 + 0.1 * -3.5);
  EXPECT_TRUE(s.lm_active);
  EXPECT_TRUE(s.scorable);
}

TEST_F(MetricsTest, MoverBaseIsNegatedWmd) {
  MetricConfig config;
  config.pipeline = clp_;
  const Sentence x = s("s1 s2 s3 s4"), y = s("t1 t2 t9 t4");
  const SegmentScore score = score_mover(x, y, *src_, *tgt_, config);
  EmbeddedTokens ex = embed_tokens(x.tokens, *src_), ey = embed_tokens(y.tokens, *tgt_);
  ex.vectors = clp_->apply_columns(ex.vectors, Side::kSource);
  const double expected = -wmd(ngramize(ex, 2), ngramize(ey, 2));
  EXPECT_EQ(score.base_similarity, expected);
  EXPECT_EQ(score.similarity, expected);
  EXPECT_FALSE(score.lm_active);
}

TEST_F(MetricsTest, IdenticalSpacesGiveZeroDistance) {
  MetricConfig config;
  config.ngram_order = 1;
  const SegmentScore score = score_mover(s("s5 s6 s7"), s("s7 s5 s6"), *src_, *src_, config);
  EXPECT_NEAR(score.base_similarity, 0.0, 1e-12);
}

TEST_F(MetricsTest, RemapStageMattersOnlyForUmd) {
  MetricConfig tokens;
  tokens.pipeline = clp_;
  MetricConfig grams = tokens;
  grams.remap_stage = RemapStage::kGrams;
  for (const auto& r : world_->records) {
    const Sentence x = s(r.source), y = s(r.hypothesis);
    EXPECT_NEAR(score_mover(x, y, *src_, *tgt_, tokens).similarity, score_mover(x, y, *src_, *tgt_, grams).similarity,
                1e-9);
  }
  // UMD scales its correction by the cosine, so pooling before or after differs.
  tokens.pipeline = std::make_shared<const TransformPipeline>(
      fit_pipeline({RemapMethod::kUmd}, world_->lexicon, world_->source, world_->target));
  grams.pipeline = tokens.pipeline;
  const auto& r = world_->records.front();
  EXPECT_NE(score_mover(s(r.source), s(r.hypothesis), *src_, *tgt_, tokens).similarity,
            score_mover(s(r.source), s(r.hypothesis), *src_, *tgt_, grams).similarity);
}

TEST_F(MetricsTest, LmFusionAddsWeightedFluency) {
  MetricConfig config;
  config.pipeline = clp_;
  config.lm = lm_;
  config.lm_weight = 0.3;
  const Sentence y = s("t1 t2 t3");
  const SegmentScore score = score_mover(s("s1 s2 s3"), y, *src_, *tgt_, config);
  EXPECT_EQ(score.lm_score, score_sentence(*lm_, y.tokens).avg_log_prob);
  EXPECT_EQ(score.similarity, score.base_similarity + 0.3 * score.lm_score);
}

TEST_F(MetricsTest, ExternalLmLooksUpKeysInOrder) {
  MetricConfig config;
  config.external_lm = std::make_shared<const ExternalScores>(ExternalScores{{"sysA:7", -2.0}, {"7", -9.0}});
  const Scorer scorer(*src_, *tgt_, config);
  EvaluationRecord r{"sysA", "7", "s1 s2", "t1 t2", {}, {}, {}};
  EXPECT_EQ(scorer.score(r).lm_score, -2.0);
  r.system_id = "sysB";
  EXPECT_EQ(scorer.score(r).lm_score, -9.0);
  r.segment_id = "8";
  EXPECT_FALSE(scorer.score(r).scorable);
}

TEST_F(MetricsTest, UnscorableInputs) {
  MetricConfig mover;
  EXPECT_FALSE(score_mover(s("zzz"), s("t1"), *src_, *tgt_, mover).scorable);
  EXPECT_FALSE(score_mover(s("s1"), s(""), *src_, *tgt_, mover).scorable);
  MetricConfig cosine;
  cosine.family = MetricFamily::kCosine;
  EXPECT_FALSE(score_cosine(s("qqq"), s("t1"), *src_, *tgt_, cosine).scorable);
  EXPECT_TRUE(score_cosine(s("s1 s2"), s("t1"), *src_, *tgt_, cosine).scorable);
}

TEST_F(MetricsTest, CosineMatchesPooledVectors) {
  MetricConfig config;
  config.family = MetricFamily::kCosine;
  config.pipeline = clp_;
  const Sentence x = s("s3 s4 s5"), y = s("t3 t4 t8");
  const Vector ex = clp_->apply(pool_sentence(x.tokens, *src_).vector, Side::kSource);
  const Vector ey = pool_sentence(y.tokens, *tgt_).vector;
  EXPECT_NEAR(score_cosine(x, y, *src_, *tgt_, config).similarity, ex.dot(ey) / (ex.norm() * ey.norm()), 1e-14);
}

TEST_F(MetricsTest, ExternalSentenceVectors) {
  Matrix rows(2, 2);
  rows << 1, 0, 0, 1;
  const EmbeddingSpace src_sent({"1", "2"}, rows);
  Matrix hyp(2, 2);
  hyp << 1, 1, 0, 1;
  const EmbeddingSpace hyp_sent({"A:1", "2"}, hyp);
  MetricConfig config;
  config.family = MetricFamily::kCosine;
  config.sentence_source = SentenceSource::kExternal;
  const Scorer scorer(*src_, *tgt_, config, ExternalSentences{&src_sent, &hyp_sent});
  EXPECT_NEAR(scorer.score(EvaluationRecord{"A", "1", "", "", {}, {}, {}}).similarity, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(scorer.score(EvaluationRecord{"B", "2", "", "", {}, {}, {}}).similarity, 1.0, 1e-15);
  EXPECT_FALSE(scorer.score(EvaluationRecord{"B", "3", "", "", {}, {}, {}}).scorable);
  EXPECT_THROW(Scorer(*src_, *tgt_, config), InvalidArgument);
}

TEST_F(MetricsTest, BatchIsIndependentOfWorkerCount) {
  MetricConfig config;
  config.pipeline = clp_;
  config.lm = lm_;
  const Scorer scorer(*src_, *tgt_, config);
  const auto one = score_batch(world_->records, scorer, 1);
  for (unsigned w : {2u, 3u, 8u, 64u}) {
    const auto many = score_batch(world_->records, scorer, w);
    ASSERT_EQ(many.size(), one.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
      EXPECT_EQ(many[i].segment_id, one[i].segment_id);
      EXPECT_EQ(many[i].similarity, one[i].similarity);
    }
  }
}

TEST(MetricConfig, ValidationAndNames) {
  MetricConfig c;
  EXPECT_EQ(c.name(), "Mover-2");
  c.ngram_order = 3;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.ngram_order = 1;
  c.lm_weight = -1;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.lm_weight = 0.1;
  c.lm = std::make_shared<const NgramLm>(train_lm({{"a"}}));
  c.external_lm = std::make_shared<const ExternalScores>();
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.external_lm.reset();
  Matrix rows = Matrix::Identity(2, 2);
  c.pipeline = std::make_shared<const TransformPipeline>(fit_pipeline(
      {RemapMethod::kUmd, RemapMethod::kClp}, AlignedPairs{rows, Matrix(rows * 2.0 + Matrix::Ones(2, 2)), 0}));
  EXPECT_EQ(c.name(), "Mover-1 + CLP.UMD (+) LM");
}

}  // namespace
}  // namespace xmover
