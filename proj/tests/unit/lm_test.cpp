#include "xmover/lm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "temp_dir.hpp"
#include "xmover/error.hpp"

namespace xmover {
namespace {

TEST(NgramLm, HandComputedBigramProbabilities) {
  // Types a, b, c, </s>: V = 4, base 1/5. Unigram history: 6 tokens, 4 types.
  const NgramLm lm = train_lm({{"a", "b"}, {"a", "c"}}, 2, 0.75);
  const double base = 1.0 / 5.0;
  const double p1_a = (2 - 0.75) / 6 + 0.75 * 4 / 6 * base;
  const double p1_b = (1 - 0.75) / 6 + 0.75 * 4 / 6 * base;
  const double p1_unk = 0.75 * 4 / 6 * base;
  EXPECT_NEAR(lm.probability("a", {}), p1_a, 1e-15);
  EXPECT_NEAR(lm.probability("a", {kBos}), (2 - 0.75) / 2 + 0.75 * 1 / 2 * p1_a, 1e-15);
  EXPECT_NEAR(lm.probability("b", {"a"}), (1 - 0.75) / 2 + 0.75 * 2 / 2 * p1_b, 1e-15);
  EXPECT_NEAR(lm.probability("zzz", {"a"}), 0.75 * 2 / 2 * p1_unk, 1e-15);
  EXPECT_NEAR(lm.probability("b", {"zzz"}), p1_b, 1e-15);
  EXPECT_EQ(lm.vocab_size(), 4u);
}

TEST(NgramLm, DistributionsSumToOneForEveryOrder) {
  std::mt19937_64 rng(41);
  std::vector<TokenList> corpus;
  for (int s = 0; s < 200; ++s) {
    TokenList t;
    const int n = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) t.push_back("w" + std::to_string(rng() % 30));
    corpus.push_back(t);
  }
  for (int order : {1, 2, 3, 4}) {
    const NgramLm lm = train_lm(corpus, order, 0.6);
    const auto outcomes = lm.outcomes();
    for (int h = 0; h < 40; ++h) {
      std::vector<std::string> history;
      for (int i = 0; i < order - 1; ++i) {
        const auto r = rng() % 33;
        history.push_back(r == 30 ? std::string(kBos) : r == 31 ? "unseen" : "w" + std::to_string(r % 30));
      }
      double total = 0.0;
      for (const auto& w : outcomes) total += lm.probability(w, history);
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(NgramLm, ScoreAndPerplexity) {
  const NgramLm lm = train_lm({{"a", "b"}, {"a", "c"}}, 2, 0.75);
  const FluencyScore s = score_sentence(lm, {"a", "b"});
  EXPECT_EQ(s.token_count, 3u);
  const double expected = std::log(lm.probability("a", {kBos})) + std::log(lm.probability("b", {"a"})) +
                          std::log(lm.probability(kEos, {"b"}));
  EXPECT_NEAR(s.total_log_prob, expected, 1e-14);
  EXPECT_NEAR(s.avg_log_prob, expected / 3, 1e-14);
  EXPECT_NEAR(perplexity(lm, {{"a", "b"}}), std::exp(-expected / 3), 1e-12);
  EXPECT_EQ(score_sentence(lm, {}).token_count, 1u);
}

TEST(NgramLm, RejectsBadParameters) {
  EXPECT_THROW(train_lm({}), InvalidArgument);
  EXPECT_THROW(train_lm({{"a"}}, 0), InvalidArgument);
  EXPECT_THROW(train_lm({{"a"}}, 3, 1.0), InvalidArgument);
  EXPECT_THROW(train_lm({{"a"}}, 3, 0.0), InvalidArgument);
}

TEST(NgramLm, SerializationRoundTrip) {
  const NgramLm lm = train_lm({{"the", "cat"}, {"the", "dog", "sat"}, {}}, 3, 0.7);
  testing::TempDir dir;
  save_lm(lm, dir.file("m.lm"));
  const NgramLm back = load_lm(dir.file("m.lm"));
  EXPECT_TRUE(back == lm);
  EXPECT_EQ(serialize_lm(back), serialize_lm(lm));
  EXPECT_EQ(back.probability("cat", {"<s>", "the"}), lm.probability("cat", {"<s>", "the"}));
}

TEST(NgramLm, ParseRejectsMalformedModels) {
  EXPECT_THROW(parse_lm("order\t2\n"), ParseError);
  EXPECT_THROW(parse_lm("# xmover-lm v1\norder\t2\ndiscount\t0.75\n0\t\ta\t1\n5\tx\ta\t1\n"), ParseError);
  EXPECT_THROW(parse_lm("# xmover-lm v1\norder\t2\ndiscount\t0.75\n0\t\ta\t1\n1\tx y\ta\t1\n"), ParseError);
  EXPECT_THROW(parse_lm("# xmover-lm v1\norder\t2\ndiscount\t0.75\n0\t\ta\t1\n0\t\ta\t2\n"), ParseError);
  EXPECT_THROW(parse_lm("# xmover-lm v1\norder\t2\ndiscount\t1.5\n0\t\ta\t1\n"), ParseError);
  EXPECT_THROW(parse_lm("# xmover-lm v1\norder\t1\ndiscount\t0.5\n"), ParseError);
}

TEST(Corpus, BlankLinesAreEmptySentences) {
  testing::TempDir dir;
  const auto corpus = read_corpus(dir.write("c.txt", "A b\n\nc\r\n"));
  ASSERT_EQ(corpus.size(), 3u);
  EXPECT_EQ(corpus[0], (TokenList{"a", "b"}));
  EXPECT_TRUE(corpus[1].empty());
  EXPECT_EQ(corpus[2], TokenList{"c"});
}

TEST(ExternalScores, ParsesAndRejectsDuplicates) {
  testing::TempDir dir;
  const auto scores = load_external_lm_scores(dir.write("s.tsv", "# header\n1\t-2.5\n\nsys:2\t-1\n"));
  EXPECT_EQ(scores.at("1"), -2.5);
  EXPECT_EQ(scores.at("sys:2"), -1.0);
  EXPECT_THROW(load_external_lm_scores(dir.write("d.tsv", "1\t-2\n1\t-3\n")), ParseError);
  EXPECT_THROW(load_external_lm_scores(dir.write("b.tsv", "1\tabc\n")), ParseError);
}

}  // namespace
}  // namespace xmover
