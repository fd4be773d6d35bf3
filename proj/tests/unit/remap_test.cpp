#include "xmover/remap.hpp"

#include <gtest/gtest.h>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <random>

#include "temp_dir.hpp"
#include "xmover/error.hpp"

namespace xmover {
namespace {

Matrix gaussian(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = n(rng);
  }
  return m;
}

Matrix rotation(int d, std::mt19937_64& rng) {
  return Eigen::HouseholderQR<Matrix>(gaussian(d, d, rng)).householderQ();
}

TEST(FitClp, MatchesEigenProcrustesOracle) {
  std::mt19937_64 rng(31);
  const Matrix x = gaussian(120, 10, rng);
  const Matrix y = x * rotation(10, rng) + gaussian(120, 10, rng, 0.3);
  const LinearTransform w = fit_clp(AlignedPairs{x, y, 0});
  const Eigen::JacobiSVD<Matrix> svd(x.transpose() * y, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix oracle = svd.matrixU() * svd.matrixV().transpose();
  EXPECT_LE((w.clp().w - oracle).norm(), 1e-10);
}

TEST(FitClp, IsTheBestOrthogonalMap) {
  std::mt19937_64 rng(32);
  const Matrix x = gaussian(60, 6, rng);
  const Matrix y = x * rotation(6, rng) + gaussian(60, 6, rng, 0.5);
  const Matrix w = fit_clp(AlignedPairs{x, y, 0}).clp().w;
  const double best = (x * w - y).norm();
  for (int t = 0; t < 200; ++t) {
    // Nearby orthogonal competitors from the Cayley transform of a small skew matrix.
    const Matrix skew = gaussian(6, 6, rng, 0.05);
    const Matrix a = skew - skew.transpose();
    const Matrix id = Matrix::Identity(6, 6);
    const Matrix q = (id - a).inverse() * (id + a);
    EXPECT_LE(best, (x * w * q - y).norm() + 1e-12);
  }
}

TEST(FitClp, ActsOnSourceOnly) {
  std::mt19937_64 rng(33);
  const Matrix x = gaussian(40, 4, rng);
  const Matrix r = rotation(4, rng);
  const LinearTransform w = fit_clp(AlignedPairs{x, x * r, 0});
  const Vector v = gaussian(4, 1, rng);
  EXPECT_LE((w.apply(v, Side::kSource) - r.transpose() * v).norm(), 1e-10);
  EXPECT_EQ(w.apply(v, Side::kTarget), v);
}

TEST(FitClp, NormalizeOptionUsesUnitRows) {
  std::mt19937_64 rng(34);
  const Matrix x = gaussian(30, 5, rng);
  Matrix scaled = x;
  for (int i = 0; i < 30; ++i) scaled.row(i) *= 1.0 + i;
  const Matrix r = rotation(5, rng);
  FitOptions options;
  options.normalize = true;
  const Matrix a = fit_clp(AlignedPairs{x, x * r, 0}, options).clp().w;
  const Matrix b = fit_clp(AlignedPairs{scaled, scaled * r, 0}, options).clp().w;
  EXPECT_LE((a - b).norm(), 1e-10);
  EXPECT_LE((a - r).norm(), 1e-10);
}

TEST(FitUmd, RemovesTheDominantDifference) {
  std::mt19937_64 rng(35);
  Vector b = gaussian(8, 1, rng);
  b.normalize();
  const Matrix x = gaussian(100, 8, rng);
  const Matrix y = Matrix(x.rowwise() - 3.0 * b.transpose()) + gaussian(100, 8, rng, 0.01);
  const LinearTransform umd = fit_umd(AlignedPairs{x, y, 0});
  EXPECT_NEAR(std::abs(umd.umd().direction.dot(b)), 1.0, 1e-4);
  const Vector& d = umd.umd().direction;
  const Vector v = gaussian(8, 1, rng);
  // v - cos(v, d) d: orthogonal to d for unit inputs only.
  EXPECT_LE((umd.apply(v, Side::kTarget) - (v - v.dot(d) / v.norm() * d)).norm(), 1e-12);
  EXPECT_NEAR(umd.apply(v.normalized(), Side::kTarget).dot(d), 0.0, 1e-12);
  EXPECT_EQ(umd.apply(Vector::Zero(8), Side::kSource), Vector::Zero(8));
}

TEST(FitUmd, RejectsDegenerateInput) {
  std::mt19937_64 rng(36);
  const Matrix x = gaussian(5, 3, rng);
  EXPECT_THROW(fit_umd(AlignedPairs{x, x, 0}), InvalidArgument);
  EXPECT_THROW(fit_umd(AlignedPairs{x.topRows(1), x.topRows(1) * 2.0, 0}), InvalidArgument);
  EXPECT_THROW(fit_clp(AlignedPairs{Matrix(0, 3), Matrix(0, 3), 0}), InvalidArgument);
}

TEST(PipelineSpec, LeftmostIsAppliedLast) {
  EXPECT_EQ(parse_pipeline_spec("clp"), std::vector<RemapMethod>{RemapMethod::kClp});
  EXPECT_EQ(parse_pipeline_spec("clp.umd"), (std::vector<RemapMethod>{RemapMethod::kUmd, RemapMethod::kClp}));
  EXPECT_EQ(pipeline_spec_name({RemapMethod::kUmd, RemapMethod::kClp}), "clp.umd");
  EXPECT_THROW(parse_pipeline_spec("xyz"), InvalidArgument);
  EXPECT_THROW(parse_pipeline_spec("clp..umd"), InvalidArgument);
  EXPECT_THROW(parse_pipeline_spec(""), InvalidArgument);
}

TEST(FitPipeline, StepsSeeTransformedData) {
  std::mt19937_64 rng(37);
  Vector b = gaussian(6, 1, rng);
  b.normalize();
  const Matrix x = gaussian(80, 6, rng);
  const Matrix r = rotation(6, rng);
  const Matrix y = Matrix((x * r).rowwise() + b.transpose()) + gaussian(80, 6, rng, 0.01);
  const AlignedPairs pairs{x, y, 0};
  const TransformPipeline p = fit_pipeline(parse_pipeline_spec("clp.umd"), pairs);
  ASSERT_EQ(p.steps().size(), 2u);
  EXPECT_TRUE(p.steps()[0].is_umd());
  EXPECT_TRUE(p.steps()[1].is_clp());
  const AlignedPairs after_umd = TransformPipeline({p.steps()[0]}).apply(pairs);
  EXPECT_EQ(fit_clp(after_umd).clp().w, p.steps()[1].clp().w);
  EXPECT_LT(alignment_residual(p.apply(pairs)), alignment_residual(pairs));
  EXPECT_EQ(p.name(), "clp.umd");
}

TEST(StackPairs, SkipsUnresolvablePairs) {
  Matrix rows(2, 2);
  rows << 1, 2, 3, 4;
  const EmbeddingSpace s({"a", "b"}, rows), t({"x", "y"}, rows);
  const BilingualLexicon lex{{{"a", "y"}, {"c", "x"}, {"b", "z"}, {"b", "x"}}, LexiconKind::kWord};
  const AlignedPairs p = stack_pairs(lex, s, t);
  EXPECT_EQ(p.size(), 2u);
  EXPECT_EQ(p.skipped, 2u);
  EXPECT_EQ(p.source.row(0), rows.row(0));
  EXPECT_EQ(p.target.row(0), rows.row(1));
}

TEST(PipelineFile, RoundTripsExactly) {
  std::mt19937_64 rng(38);
  const Matrix x = gaussian(50, 7, rng);
  const Matrix y = x * rotation(7, rng) + gaussian(50, 7, rng, 0.2);
  const TransformPipeline p = fit_pipeline(parse_pipeline_spec("umd.clp"), AlignedPairs{x, y, 0});
  testing::TempDir dir;
  save_pipeline(p, dir.file("t.txt"));
  const TransformPipeline back = load_pipeline(dir.file("t.txt"));
  EXPECT_TRUE(back == p);
  EXPECT_EQ(serialize_pipeline(back), serialize_pipeline(p));
  EXPECT_EQ(back.steps()[0].fitted_on(), 50u);
}

TEST(PipelineFile, RejectsMalformedText) {
  EXPECT_THROW(parse_pipeline("steps 1\n"), ParseError);
  EXPECT_THROW(parse_pipeline("# xmover-transform v1\nsteps 1\nstep foo dim 2 pairs 3\n1 0\n0 1\n"), ParseError);
  EXPECT_THROW(parse_pipeline("# xmover-transform v1\nsteps 1\nstep clp dim 2 pairs 3\n1 0\n"), ParseError);
  EXPECT_THROW(parse_pipeline("# xmover-transform v1\nsteps 1\nstep umd dim 2 pairs 3\n3 4\n"), ParseError);
  const auto ok = parse_pipeline("# xmover-transform v1\nsteps 1\nstep clp dim 2 pairs 3\n0 1\n-1 0\n");
  EXPECT_EQ(ok.dimension(), 2u);
}

}  // namespace
}  // namespace xmover
