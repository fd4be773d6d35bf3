#include "xmover/cli.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "planted_world.hpp"
#include "temp_dir.hpp"
#include "xmover/eval.hpp"
#include "xmover/format.hpp"
#include "xmover/io.hpp"

namespace xmover {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "xmover");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    testing::PlantedWorldOptions o;
    o.vocab = 500;
    o.segments = 80;
    o.lm_sentences = 400;
    world_ = testing::make_planted_world(o);
    testing::write_planted_world(world_, dir_.file("world"));
  }

  std::string w(const std::string& name) const { return dir_.file("world/" + name); }

  testing::TempDir dir_;
  testing::PlantedWorld world_;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  EXPECT_EQ(cli({"score", "--help"}).code, kExitOk);
  EXPECT_EQ(cli({}).code, kExitUsageError);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsageError);
  EXPECT_EQ(cli({"score", "--dataset", w("dataset.tsv")}).code, kExitUsageError);
  EXPECT_EQ(cli({"score", "--dataset", w("dataset.tsv"), "--src-emb", w("src.vec"), "--tgt-emb", w("tgt.vec"),
                 "--output", dir_.file("s.tsv"), "--metric", "bleu"})
                .code,
            kExitUsageError);
  const Result bad_spec = cli({"remap-fit", "--src-emb", w("src.vec"), "--tgt-emb", w("tgt.vec"), "--lexicon",
                               w("lexicon.tsv"), "--pipeline", "xyz", "--output", dir_.file("t.txt")});
  EXPECT_EQ(bad_spec.code, kExitUsageError);
  EXPECT_NE(bad_spec.err.find("xyz"), std::string::npos);
}

TEST_F(CliTest, MissingInputIsRuntimeErrorNamingThePath) {
  const Result r = cli({"score", "--dataset", w("dataset.tsv"), "--src-emb", dir_.file("nope.vec"), "--tgt-emb",
                        w("tgt.vec"), "--output", dir_.file("s.tsv")});
  EXPECT_EQ(r.code, kExitRuntimeError);
  EXPECT_NE(r.err.find(dir_.file("nope.vec")), std::string::npos);
}

TEST_F(CliTest, FitScoreEvaluate) {
  const Result fit = cli({"remap-fit", "--src-emb", w("src.vec"), "--tgt-emb", w("tgt.vec"), "--lexicon",
                          w("lexicon.tsv"), "--pipeline", "clp.umd", "--output", dir_.file("t.txt")});
  ASSERT_EQ(fit.code, kExitOk) << fit.err;
  EXPECT_NE(fit.out.find("pairs used: 500, skipped: 0"), std::string::npos);
  EXPECT_NE(fit.out.find("fitted in order: umd clp"), std::string::npos);

  const Result lm = cli({"lm-train", "--corpus", w("corpus.txt"), "--output", dir_.file("m.lm")});
  ASSERT_EQ(lm.code, kExitOk) << lm.err;
  EXPECT_NE(lm.out.find("held-out perplexity"), std::string::npos);

  const std::vector<std::string> score_args{"score",   "--dataset",   w("dataset.tsv"), "--src-emb",
                                            w("src.vec"), "--tgt-emb", w("tgt.vec"),     "--transform",
                                            dir_.file("t.txt"), "--lm-model", dir_.file("m.lm"), "--output"};
  auto with_output = [&](const std::string& out, std::vector<std::string> extra) {
    std::vector<std::string> a = score_args;
    a.push_back(out);
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  const Result score = cli(with_output(dir_.file("s1.tsv"), {}));
  ASSERT_EQ(score.code, kExitOk) << score.err;
  EXPECT_NE(score.out.find("Mover-2 + CLP.UMD (+) LM: scored 80 segments"), std::string::npos);
  ASSERT_EQ(cli(with_output(dir_.file("s8.tsv"), {"--workers", "8"})).code, kExitOk);
  EXPECT_EQ(testing::slurp(dir_.file("s1.tsv")), testing::slurp(dir_.file("s8.tsv")));

  for (const auto& s : read_scores(dir_.file("s1.tsv"))) {
    ASSERT_TRUE(s.scorable);
    EXPECT_EQ(s.similarity, s.base_similarity + 0.1 * s.lm_score);
  }

  const Result eval = cli({"evaluate", "--dataset", w("dataset.tsv"), "--scores", dir_.file("s1.tsv")});
  ASSERT_EQ(eval.code, kExitOk) << eval.err;
  const auto table = read_dataset(w("dataset.tsv"));
  const double expected =
      segment_correlation(read_scores(dir_.file("s1.tsv")), table.rows, Statistic::kPearson).value;
  EXPECT_NE(eval.out.find("segment\tpearson\txx-yy\t80\t0\t" + format_sig6(expected) + "\n"), std::string::npos);

  const Result sys = cli({"evaluate", "--dataset", w("dataset.tsv"), "--scores", dir_.file("s1.tsv"), "--level",
                          "system", "--statistic", "kendall", "--format", "structured"});
  ASSERT_EQ(sys.code, kExitOk) << sys.err;
  EXPECT_NE(sys.out.find("\"level\": \"system\""), std::string::npos);

  EXPECT_EQ(cli({"evaluate", "--dataset", w("dataset.tsv")}).code, kExitUsageError);
}

TEST_F(CliTest, W2wSweepAndLmScore) {
  const Result w2w = cli({"w2w", "--dataset", w("dataset.tsv"), "--src-emb", w("src.vec"), "--tgt-emb", w("tgt.vec"),
                          "--metric", "cosine"});
  ASSERT_EQ(w2w.code, kExitOk) << w2w.err;
  EXPECT_NE(w2w.out.find("xx-yy\t80\t"), std::string::npos);

  const Result sweep = cli({"sweep", "--dataset", w("dataset.tsv"), "--src-emb", w("src.vec"), "--tgt-emb",
                            w("tgt.vec"), "--lexicon", w("lexicon.tsv"), "--sizes", "100,500"});
  ASSERT_EQ(sweep.code, kExitOk) << sweep.err;
  EXPECT_NE(sweep.out.find("500\t500\t80\t"), std::string::npos);
  EXPECT_EQ(cli({"sweep", "--dataset", w("dataset.tsv"), "--src-emb", w("src.vec"), "--tgt-emb", w("tgt.vec"),
                 "--lexicon", w("lexicon.tsv"), "--sizes", "100,x"})
                .code,
            kExitUsageError);
  EXPECT_EQ(cli({"sweep", "--dataset", w("dataset.tsv"), "--src-emb", w("src.vec"), "--tgt-emb", w("tgt.vec"),
                 "--lexicon", w("lexicon.tsv"), "--sizes", "100,5000"})
                .code,
            kExitRuntimeError);

  ASSERT_EQ(cli({"lm-train", "--corpus", w("corpus.txt"), "--output", dir_.file("m.lm")}).code, kExitOk);
  const Result scored =
      cli({"lm-score", "--model", dir_.file("m.lm"), "--dataset", w("dataset.tsv"), "--output", dir_.file("lm.tsv")});
  ASSERT_EQ(scored.code, kExitOk) << scored.err;
  const Result fused = cli({"score", "--dataset", w("dataset.tsv"), "--src-emb", w("src.vec"), "--tgt-emb",
                            w("tgt.vec"), "--lm-scores", dir_.file("lm.tsv"), "--output", dir_.file("s.tsv")});
  ASSERT_EQ(fused.code, kExitOk) << fused.err;
  const Result internal = cli({"score", "--dataset", w("dataset.tsv"), "--src-emb", w("src.vec"), "--tgt-emb",
                               w("tgt.vec"), "--lm-model", dir_.file("m.lm"), "--output", dir_.file("s2.tsv")});
  ASSERT_EQ(internal.code, kExitOk);
  EXPECT_EQ(testing::slurp(dir_.file("s.tsv")), testing::slurp(dir_.file("s2.tsv")));

  EXPECT_EQ(cli({"lm-score", "--model", dir_.file("m.lm")}).code, kExitUsageError);
}

TEST_F(CliTest, W2wNeedsTheColumn) {
  DatasetTable table = read_dataset(w("dataset.tsv"));
  for (auto& r : table.rows) r.w2w.reset();
  write_dataset(table, dir_.file("plain.tsv"));
  const Result r = cli({"w2w", "--dataset", dir_.file("plain.tsv"), "--src-emb", w("src.vec"), "--tgt-emb",
                        w("tgt.vec")});
  EXPECT_EQ(r.code, kExitRuntimeError);
  EXPECT_NE(r.err.find("w2w"), std::string::npos);
}

}  // namespace
}  // namespace xmover
