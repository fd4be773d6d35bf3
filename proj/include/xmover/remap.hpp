#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "xmover/vecspace.hpp"

namespace xmover {

enum class LexiconKind { kWord, kSentence };

// Matched (source, target) keys. For sentence lexicons the keys are sentence
// ids resolved against spaces built from sentence-embedding dumps.
struct BilingualLexicon {
  std::vector<std::pair<std::string, std::string>> pairs;
  LexiconKind kind = LexiconKind::kWord;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

// Stacked embeddings of the resolvable lexicon pairs: row i of `source` and
// row i of `target` belong to the same pair.
struct AlignedPairs {
  Matrix source;  // n x d
  Matrix target;  // n x d
  std::size_t skipped = 0;

  std::size_t size() const { return static_cast<std::size_t>(source.rows()); }
};

AlignedPairs stack_pairs(const BilingualLexicon& lexicon, const EmbeddingSpace& src_space,
                         const EmbeddingSpace& tgt_space);

enum class Side { kSource, kTarget };

// Orthogonal map fitted by Procrustes. Applied to source row vectors as v W.
struct ClpMap {
  Matrix w;
};

// Unit misalignment direction removed from both sides as v - cos(v, b) b.
struct UmdMap {
  Vector direction;
};

class LinearTransform {
 public:
  LinearTransform(ClpMap map, std::size_t fitted_on);
  LinearTransform(UmdMap map, std::size_t fitted_on);

  bool is_clp() const { return std::holds_alternative<ClpMap>(map_); }
  bool is_umd() const { return std::holds_alternative<UmdMap>(map_); }
  const ClpMap& clp() const { return std::get<ClpMap>(map_); }
  const UmdMap& umd() const { return std::get<UmdMap>(map_); }

  std::size_t dimension() const { return dimension_; }
  std::size_t fitted_on() const { return fitted_on_; }
  std::string name() const { return is_clp() ? "clp" : "umd"; }

  // CLP moves source vectors only; UMD acts on both sides. A zero vector
  // passes through UMD unchanged.
  Vector apply(const Vector& v, Side side) const;

  // Applies the transform to every column of a d x n matrix.
  Matrix apply_columns(const Matrix& vectors, Side side) const;

  bool operator==(const LinearTransform& other) const;

 private:
  std::variant<ClpMap, UmdMap> map_;
  std::size_t dimension_ = 0;
  std::size_t fitted_on_ = 0;
};

struct FitOptions {
  // L2-normalize dictionary rows before fitting CLP.
  bool normalize = false;
};

LinearTransform fit_clp(const AlignedPairs& pairs, const FitOptions& options = {});
LinearTransform fit_clp(const BilingualLexicon& lexicon, const EmbeddingSpace& src_space,
                        const EmbeddingSpace& tgt_space, const FitOptions& options = {});

LinearTransform fit_umd(const AlignedPairs& pairs);
LinearTransform fit_umd(const BilingualLexicon& lexicon, const EmbeddingSpace& src_space,
                        const EmbeddingSpace& tgt_space);

enum class RemapMethod { kClp, kUmd };

// Parses "clp", "umd", "clp.umd", ... Leftmost is outermost, so the returned
// list is in application order: "clp.umd" -> {kUmd, kClp}.
std::vector<RemapMethod> parse_pipeline_spec(const std::string& spec);

// Composition name in conventional order ("clp.umd" for CLP after UMD).
std::string pipeline_spec_name(const std::vector<RemapMethod>& application_order);

// Ordered re-mapping steps; steps_[0] is applied first.
class TransformPipeline {
 public:
  TransformPipeline() = default;
  explicit TransformPipeline(std::vector<LinearTransform> steps);

  const std::vector<LinearTransform>& steps() const { return steps_; }
  bool empty() const { return steps_.empty(); }
  std::size_t dimension() const { return steps_.empty() ? 0 : steps_.front().dimension(); }
  std::string name() const;

  Vector apply(const Vector& v, Side side) const;
  Matrix apply_columns(const Matrix& vectors, Side side) const;

  // Transforms the stacked rows of both sides.
  AlignedPairs apply(const AlignedPairs& pairs) const;

  bool operator==(const TransformPipeline& other) const { return steps_ == other.steps_; }

 private:
  std::vector<LinearTransform> steps_;
};

// Fits steps in application order, each on embeddings already transformed by
// the previous steps.
TransformPipeline fit_pipeline(const std::vector<RemapMethod>& application_order, const AlignedPairs& pairs,
                               const FitOptions& options = {});
TransformPipeline fit_pipeline(const std::vector<RemapMethod>& application_order, const BilingualLexicon& lexicon,
                               const EmbeddingSpace& src_space, const EmbeddingSpace& tgt_space,
                               const FitOptions& options = {});

// ||source - target||_F over the stacked pairs.
double alignment_residual(const AlignedPairs& pairs);

std::string serialize_pipeline(const TransformPipeline& pipeline);
TransformPipeline parse_pipeline(const std::string& text, const std::string& origin = "<string>");
void save_pipeline(const TransformPipeline& pipeline, const std::string& path);
TransformPipeline load_pipeline(const std::string& path);

}  // namespace xmover
