#include "xmover/remap.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "xmover/error.hpp"
#include "xmover/format.hpp"
#include "xmover/linalg.hpp"

namespace xmover {

AlignedPairs stack_pairs(const BilingualLexicon& lexicon, const EmbeddingSpace& src_space,
                         const EmbeddingSpace& tgt_space) {
  if (src_space.dimension() != tgt_space.dimension()) {
    throw InvalidArgument("stack_pairs: source and target dimensions differ");
  }
  std::vector<std::pair<std::size_t, std::size_t>> resolved;
  AlignedPairs out;
  for (const auto& [src, tgt] : lexicon.pairs) {
    auto i = src_space.find(src);
    auto j = tgt_space.find(tgt);
    if (i && j) {
      resolved.emplace_back(*i, *j);
    } else {
      ++out.skipped;
    }
  }
  const auto d = static_cast<Eigen::Index>(src_space.dimension());
  out.source.resize(static_cast<Eigen::Index>(resolved.size()), d);
  out.target.resize(static_cast<Eigen::Index>(resolved.size()), d);
  for (std::size_t r = 0; r < resolved.size(); ++r) {
    out.source.row(static_cast<Eigen::Index>(r)) = src_space.vector(resolved[r].first).transpose();
    out.target.row(static_cast<Eigen::Index>(r)) = tgt_space.vector(resolved[r].second).transpose();
  }
  return out;
}

LinearTransform::LinearTransform(ClpMap map, std::size_t fitted_on)
    : map_(std::move(map)), fitted_on_(fitted_on) {
  const Matrix& w = std::get<ClpMap>(map_).w;
  if (w.rows() != w.cols() || w.rows() == 0) throw InvalidArgument("CLP matrix must be square and non-empty");
  dimension_ = static_cast<std::size_t>(w.rows());
}

LinearTransform::LinearTransform(UmdMap map, std::size_t fitted_on)
    : map_(std::move(map)), fitted_on_(fitted_on) {
  const Vector& b = std::get<UmdMap>(map_).direction;
  if (b.size() == 0) throw InvalidArgument("UMD direction must be non-empty");
  if (std::abs(b.norm() - 1.0) > 1e-10) throw InvalidArgument("UMD direction must have unit norm");
  dimension_ = static_cast<std::size_t>(b.size());
}

Vector LinearTransform::apply(const Vector& v, Side side) const {
  if (static_cast<std::size_t>(v.size()) != dimension_) throw InvalidArgument("apply_transform: dimension mismatch");
  if (is_clp()) {
    if (side == Side::kTarget) return v;
    return clp().w.transpose() * v;  // row-vector convention: v W
  }
  const Vector& b = umd().direction;
  const double norm = v.norm();
  if (norm == 0.0) return v;
  const double cosine = v.dot(b) / (norm * b.norm());
  return v - cosine * b;
}

Matrix LinearTransform::apply_columns(const Matrix& vectors, Side side) const {
  if (static_cast<std::size_t>(vectors.rows()) != dimension_) {
    throw InvalidArgument("apply_transform: dimension mismatch");
  }
  Matrix out(vectors.rows(), vectors.cols());
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) out.col(j) = apply(vectors.col(j), side);
  return out;
}

bool LinearTransform::operator==(const LinearTransform& other) const {
  if (fitted_on_ != other.fitted_on_ || dimension_ != other.dimension_ || map_.index() != other.map_.index()) {
    return false;
  }
  return is_clp() ? clp().w == other.clp().w : umd().direction == other.umd().direction;
}

namespace {

void require_fit_input(const AlignedPairs& pairs, const char* who) {
  if (pairs.size() == 0) throw InvalidArgument(std::string(who) + ": no resolvable lexicon pairs");
  if (pairs.source.cols() != pairs.target.cols()) throw InvalidArgument(std::string(who) + ": dimension mismatch");
}

Matrix normalized_rows(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (n > 0.0) out.row(i) /= n;
  }
  return out;
}

}  // namespace

LinearTransform fit_clp(const AlignedPairs& pairs, const FitOptions& options) {
  require_fit_input(pairs, "fit_clp");
  if (pairs.size() < static_cast<std::size_t>(pairs.source.cols())) {
    std::clog << "warning: fit_clp: " << pairs.size() << " pairs for dimension " << pairs.source.cols()
              << "; the map is underdetermined\n";
  }
  const Matrix cross = options.normalize
                           ? Matrix(normalized_rows(pairs.source).transpose() * normalized_rows(pairs.target))
                           : Matrix(pairs.source.transpose() * pairs.target);
  const Svd svd = svd_square(cross);
  return LinearTransform(ClpMap{svd.u * svd.v.transpose()}, pairs.size());
}

LinearTransform fit_clp(const BilingualLexicon& lexicon, const EmbeddingSpace& src_space,
                        const EmbeddingSpace& tgt_space, const FitOptions& options) {
  return fit_clp(stack_pairs(lexicon, src_space, tgt_space), options);
}

LinearTransform fit_umd(const AlignedPairs& pairs) {
  require_fit_input(pairs, "fit_umd");
  if (pairs.size() < 2) throw InvalidArgument("fit_umd: at least 2 resolvable pairs are required");
  const Matrix q = pairs.source - pairs.target;
  const double scale = std::max(1.0, pairs.source.norm() + pairs.target.norm());
  if (q.norm() <= 1e-12 * scale) {
    throw InvalidArgument("fit_umd: no misalignment, every pair maps to identical vectors");
  }
  Vector direction = dominant_right_singular_vector(q);
  direction.normalize();
  fix_sign(direction);
  return LinearTransform(UmdMap{std::move(direction)}, pairs.size());
}

LinearTransform fit_umd(const BilingualLexicon& lexicon, const EmbeddingSpace& src_space,
                        const EmbeddingSpace& tgt_space) {
  return fit_umd(stack_pairs(lexicon, src_space, tgt_space));
}

std::vector<RemapMethod> parse_pipeline_spec(const std::string& spec) {
  if (spec.empty()) throw InvalidArgument("empty pipeline spec");
  std::vector<RemapMethod> outer_first;
  for (auto part : split(spec, '.')) {
    if (part == "clp") {
      outer_first.push_back(RemapMethod::kClp);
    } else if (part == "umd") {
      outer_first.push_back(RemapMethod::kUmd);
    } else {
      throw InvalidArgument("unknown re-mapping '" + std::string(part) + "' in pipeline spec '" + spec +
                            "' (expected clp or umd, joined by '.')");
    }
  }
  return {outer_first.rbegin(), outer_first.rend()};
}

std::string pipeline_spec_name(const std::vector<RemapMethod>& application_order) {
  std::string out;
  for (auto it = application_order.rbegin(); it != application_order.rend(); ++it) {
    if (!out.empty()) out += '.';
    out += *it == RemapMethod::kClp ? "clp" : "umd";
  }
  return out;
}

TransformPipeline::TransformPipeline(std::vector<LinearTransform> steps) : steps_(std::move(steps)) {
  for (const auto& step : steps_) {
    if (step.dimension() != steps_.front().dimension()) {
      throw InvalidArgument("TransformPipeline: steps have different dimensions");
    }
  }
}

std::string TransformPipeline::name() const {
  std::vector<RemapMethod> order;
  for (const auto& s : steps_) order.push_back(s.is_clp() ? RemapMethod::kClp : RemapMethod::kUmd);
  return pipeline_spec_name(order);
}

Vector TransformPipeline::apply(const Vector& v, Side side) const {
  Vector out = v;
  for (const auto& step : steps_) out = step.apply(out, side);
  return out;
}

Matrix TransformPipeline::apply_columns(const Matrix& vectors, Side side) const {
  Matrix out = vectors;
  for (const auto& step : steps_) out = step.apply_columns(out, side);
  return out;
}

AlignedPairs TransformPipeline::apply(const AlignedPairs& pairs) const {
  AlignedPairs out;
  out.skipped = pairs.skipped;
  out.source = apply_columns(pairs.source.transpose(), Side::kSource).transpose();
  out.target = apply_columns(pairs.target.transpose(), Side::kTarget).transpose();
  return out;
}

TransformPipeline fit_pipeline(const std::vector<RemapMethod>& application_order, const AlignedPairs& pairs,
                               const FitOptions& options) {
  if (application_order.empty()) throw InvalidArgument("fit_pipeline: empty pipeline spec");
  std::vector<LinearTransform> steps;
  AlignedPairs current = pairs;
  for (auto method : application_order) {
    LinearTransform step = method == RemapMethod::kClp ? fit_clp(current, options) : fit_umd(current);
    current = TransformPipeline({step}).apply(current);
    steps.push_back(std::move(step));
  }
  return TransformPipeline(std::move(steps));
}

TransformPipeline fit_pipeline(const std::vector<RemapMethod>& application_order, const BilingualLexicon& lexicon,
                               const EmbeddingSpace& src_space, const EmbeddingSpace& tgt_space,
                               const FitOptions& options) {
  return fit_pipeline(application_order, stack_pairs(lexicon, src_space, tgt_space), options);
}

double alignment_residual(const AlignedPairs& pairs) { return (pairs.source - pairs.target).norm(); }

namespace {

constexpr const char* kTransformTag = "# xmover-transform v1";

}  // namespace

std::string serialize_pipeline(const TransformPipeline& pipeline) {
  std::ostringstream os;
  os << kTransformTag << '\n';
  os << "steps " << pipeline.steps().size() << '\n';
  for (const auto& step : pipeline.steps()) {
    os << "step " << step.name() << " dim " << step.dimension() << " pairs " << step.fitted_on() << '\n';
    if (step.is_clp()) {
      const Matrix& w = step.clp().w;
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) os << (j ? " " : "") << format_exact(w(i, j));
        os << '\n';
      }
    } else {
      const Vector& b = step.umd().direction;
      for (Eigen::Index j = 0; j < b.size(); ++j) os << (j ? " " : "") << format_exact(b(j));
      os << '\n';
    }
  }
  return os.str();
}

TransformPipeline parse_pipeline(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string_view {
    if (!std::getline(in, line)) throw ParseError(origin, line_no + 1, "unexpected end of transform file");
    ++line_no;
    return trim_eol(line);
  };
  auto values_of = [&](std::string_view row, std::size_t expected) {
    auto fields = split_ws(row);
    if (fields.size() != expected) {
      throw ParseError(origin, line_no, "expected " + std::to_string(expected) + " values, found " +
                                            std::to_string(fields.size()));
    }
    std::vector<double> values;
    for (auto f : fields) {
      try {
        values.push_back(parse_double(f));
      } catch (const InvalidArgument& e) {
        throw ParseError(origin, line_no, e.what());
      }
    }
    return values;
  };

  if (next_line() != kTransformTag) throw ParseError(origin, 1, "missing '# xmover-transform v1' tag");
  auto header = split_ws(next_line());
  if (header.size() != 2 || header[0] != "steps") throw ParseError(origin, line_no, "expected 'steps <count>'");
  std::size_t count = 0;
  try {
    count = parse_uint(header[1]);
  } catch (const InvalidArgument& e) {
    throw ParseError(origin, line_no, e.what());
  }

  std::vector<LinearTransform> steps;
  for (std::size_t s = 0; s < count; ++s) {
    auto f = split_ws(next_line());
    if (f.size() != 6 || f[0] != "step" || f[2] != "dim" || f[4] != "pairs") {
      throw ParseError(origin, line_no, "expected 'step <clp|umd> dim <d> pairs <n>'");
    }
    std::size_t dim = 0, fitted = 0;
    try {
      dim = parse_uint(f[3]);
      fitted = parse_uint(f[5]);
    } catch (const InvalidArgument& e) {
      throw ParseError(origin, line_no, e.what());
    }
    if (dim == 0) throw ParseError(origin, line_no, "dimension must be positive");
    const auto d = static_cast<Eigen::Index>(dim);
    try {
      if (f[1] == "clp") {
        Matrix w(d, d);
        for (Eigen::Index i = 0; i < d; ++i) {
          auto row = values_of(next_line(), dim);
          for (Eigen::Index j = 0; j < d; ++j) w(i, j) = row[static_cast<std::size_t>(j)];
        }
        steps.emplace_back(ClpMap{std::move(w)}, fitted);
      } else if (f[1] == "umd") {
        auto row = values_of(next_line(), dim);
        steps.emplace_back(UmdMap{Eigen::Map<Vector>(row.data(), d)}, fitted);
      } else {
        throw ParseError(origin, line_no, "unknown step kind '" + std::string(f[1]) + "'");
      }
    } catch (const InvalidArgument& e) {
      throw ParseError(origin, line_no, e.what());
    }
  }
  try {
    return TransformPipeline(std::move(steps));
  } catch (const InvalidArgument& e) {
    throw ParseError(origin, 0, e.what());
  }
}

void save_pipeline(const TransformPipeline& pipeline, const std::string& path) {
  write_file(path, serialize_pipeline(pipeline));
}

TransformPipeline load_pipeline(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_pipeline(buffer.str(), path);
}

}  // namespace xmover
