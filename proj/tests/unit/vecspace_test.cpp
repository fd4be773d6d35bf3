#include "xmover/vecspace.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "temp_dir.hpp"
#include "xmover/error.hpp"

namespace xmover {
namespace {

using testing::TempDir;

EmbeddingSpace toy_space() {
  Matrix rows(3, 2);
  rows << 1, 0,  //
      0, 1,      //
      1, 1;
  return EmbeddingSpace({"a", "b", "c"}, rows);
}

TEST(Tokenize, LowercasesAsciiOnly) {
  EXPECT_EQ(tokenize("The  Cat\tSAT"), (TokenList{"the", "cat", "sat"}));
  EXPECT_EQ(tokenize("The Cat", false), (TokenList{"The", "Cat"}));
  EXPECT_EQ(tokenize("\xC3\x84pfel"), (TokenList{"\xC3\x84pfel"}));
  EXPECT_TRUE(tokenize("   ").empty());
}

TEST(Idf, MatchesSmoothedFormula) {
  const IdfTable idf = compute_idf({{"a", "b"}, {"a", "a"}, {"c"}});
  EXPECT_DOUBLE_EQ(idf("a"), std::log(4.0 / 3.0));
  EXPECT_DOUBLE_EQ(idf("b"), std::log(4.0 / 2.0));
  EXPECT_DOUBLE_EQ(idf("zzz"), std::log(4.0));
  EXPECT_EQ(idf.doc_count(), 3u);
  EXPECT_THROW(compute_idf({}), InvalidArgument);
  EXPECT_EQ(IdfTable{}("anything"), 0.0);
}

TEST(EmbeddingSpace, DuplicateKeepsLastVectorAndFirstPosition) {
  Matrix rows(3, 1);
  rows << 1, 2, 3;
  const EmbeddingSpace s({"x", "y", "x"}, rows);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.token(0), "x");
  EXPECT_EQ((*s.lookup("x"))(0), 3.0);
  EXPECT_FALSE(s.lookup("z").has_value());
}

TEST(EmbeddingSpace, LoadSaveRoundTrip) {
  TempDir dir;
  Matrix rows(2, 3);
  rows << 0.1, -2.5e-7, 3, 1.0 / 3.0, 0, -1;
  const EmbeddingSpace s({"u", "v"}, rows);
  save_embedding_space(s, dir.file("a.vec"));
  const EmbeddingSpace back = load_embedding_space(dir.file("a.vec"), 3);
  EXPECT_EQ(back.vectors(), s.vectors());
  save_embedding_space(back, dir.file("b.vec"));
  EXPECT_EQ(testing::slurp(dir.file("a.vec")), testing::slurp(dir.file("b.vec")));
}

TEST(EmbeddingSpace, LoadRejectsMalformedFiles) {
  TempDir dir;
  EXPECT_THROW(load_embedding_space(dir.write("h.vec", "two 3\n")), ParseError);
  EXPECT_THROW(load_embedding_space(dir.write("a.vec", "1 3\nx 1 2\n")), ParseError);
  EXPECT_THROW(load_embedding_space(dir.write("n.vec", "1 2\nx 1 nan\n")), ParseError);
  EXPECT_THROW(load_embedding_space(dir.write("c.vec", "2 2\nx 1 2\n")), ParseError);
  EXPECT_THROW(load_embedding_space(dir.write("d.vec", "1 2\nx 1 2\n"), 3), ParseError);
  EXPECT_THROW(load_embedding_space(dir.file("missing.vec")), IoError);
  try {
    load_embedding_space(dir.write("line.vec", "2 2\nx 1 2\ny 1\n"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(EmbeddingSpace, DuplicateTokenWarns) {
  TempDir dir;
  std::vector<std::string> warnings;
  const auto s = load_embedding_space(dir.write("dup.vec", "2 1\nx 1\nx 2\n"), std::nullopt, &warnings);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_EQ((*s.lookup("x"))(0), 2.0);
}

TEST(SentenceVectors, RoundTripAndDuplicateIds) {
  TempDir dir;
  const auto s = load_sentence_vectors(dir.write("s.tsv", "# comment\n1\t0.5 1\n2\t-1 2\n"));
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ((*s.lookup("2"))(0), -1.0);
  save_sentence_vectors(s, dir.file("t.tsv"));
  EXPECT_EQ(load_sentence_vectors(dir.file("t.tsv")).vectors(), s.vectors());
  EXPECT_THROW(load_sentence_vectors(dir.write("d.tsv", "1\t1 2\n1\t3 4\n")), ParseError);
}

TEST(Ngramize, BigramsAreMeansWeightedByIdfSums) {
  const IdfTable idf({{"a", 1.0}, {"b", 2.0}, {"c", 3.0}}, 5);
  const auto space = toy_space().with_idf(idf);
  const auto seq = ngramize({"a", "zzz", "b", "c"}, space, 2);
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_EQ(seq.embeddings.col(0), (Vector(2) << 0.5, 0.5).finished());
  EXPECT_EQ(seq.embeddings.col(1), (Vector(2) << 0.5, 1.0).finished());
  EXPECT_DOUBLE_EQ(seq.raw_weights[0], 3.0);
  EXPECT_DOUBLE_EQ(seq.raw_weights[1], 5.0);
  EXPECT_DOUBLE_EQ(seq.weights[0] + seq.weights[1], 1.0);
  EXPECT_EQ(embed_tokens({"a", "zzz", "b"}, space).dropped, 1u);
}

TEST(Ngramize, ShortAndEmptyInputs) {
  const auto space = toy_space();
  const auto one = ngramize({"a"}, space, 2);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one.length[0], 1u);
  EXPECT_EQ(one.weights[0], 1.0);
  EXPECT_TRUE(ngramize({"zzz"}, space, 2).empty());
  EXPECT_TRUE(ngramize(TokenList{}, space, 1).empty());
  EXPECT_THROW(ngramize({"a"}, space, 3), InvalidArgument);
}

TEST(Ngramize, ZeroIdfFallsBackToUniform) {
  const auto seq = ngramize({"a", "b", "c"}, toy_space(), 1);
  ASSERT_EQ(seq.size(), 3u);
  for (double w : seq.weights) EXPECT_DOUBLE_EQ(w, 1.0 / 3.0);
}

TEST(PoolSentence, IdfWeightedMean) {
  const IdfTable idf({{"a", 1.0}, {"b", 3.0}}, 5);
  const auto pooled = pool_sentence({"a", "b"}, toy_space().with_idf(idf));
  EXPECT_FALSE(pooled.degenerate);
  EXPECT_DOUBLE_EQ(pooled.vector(0), 0.25);
  EXPECT_DOUBLE_EQ(pooled.vector(1), 0.75);
  EXPECT_TRUE(pool_sentence({"zzz"}, toy_space()).degenerate);
}

}  // namespace
}  // namespace xmover
