#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "xmover/eval.hpp"
#include "xmover/io.hpp"
#include "xmover/lm.hpp"
#include "xmover/metrics.hpp"
#include "xmover/remap.hpp"
#include "xmover/transport.hpp"
#include "xmover/vecspace.hpp"

namespace py = pybind11;
using namespace xmover;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Side parse_side(const std::string& side) {
  if (side == "source") return Side::kSource;
  if (side == "target") return Side::kTarget;
  throw InvalidArgument("side must be 'source' or 'target', got '" + side + "'");
}

IdfTable idf_from_dict(const std::unordered_map<std::string, double>& values, std::size_t doc_count) {
  return IdfTable(values, doc_count);
}

// Owns the spaces so the scorer's pointers stay valid for its lifetime.
class PyMetric {
 public:
  PyMetric(std::shared_ptr<const EmbeddingSpace> src, std::shared_ptr<const EmbeddingSpace> tgt,
           const std::string& family, int ngram, std::shared_ptr<const TransformPipeline> pipeline,
           const std::string& remap_stage, std::shared_ptr<const NgramLm> lm, double lm_weight, bool lowercase)
      : src_(std::move(src)), tgt_(std::move(tgt)) {
    MetricConfig config;
    if (family == "mover") {
      config.family = MetricFamily::kMover;
    } else if (family == "cosine") {
      config.family = MetricFamily::kCosine;
    } else {
      throw InvalidArgument("family must be 'mover' or 'cosine', got '" + family + "'");
    }
    config.ngram_order = ngram;
    config.pipeline = std::move(pipeline);
    if (remap_stage == "tokens") {
      config.remap_stage = RemapStage::kTokens;
    } else if (remap_stage == "grams") {
      config.remap_stage = RemapStage::kGrams;
    } else {
      throw InvalidArgument("remap_stage must be 'tokens' or 'grams', got '" + remap_stage + "'");
    }
    config.lm = std::move(lm);
    config.lm_weight = lm_weight;
    config.lowercase = lowercase;
    scorer_ = std::make_unique<Scorer>(*src_, *tgt_, config);
  }

  SegmentScore score(const std::string& source, const std::string& candidate) const {
    return (*scorer_)(SegmentInput{scorer_->sentence(source, {}), scorer_->sentence(candidate, {})});
  }

  std::vector<SegmentScore> score_records(const std::vector<EvaluationRecord>& records, unsigned workers) const {
    py::gil_scoped_release release;
    return score_batch(records, *scorer_, workers);
  }

  W2wResult w2w(const std::vector<EvaluationRecord>& records) const {
    return w2w_statistic(std::cref(*scorer_), w2w_triples(records, *scorer_));
  }

  std::string name() const { return scorer_->config().name(); }

 private:
  std::shared_ptr<const EmbeddingSpace> src_;
  std::shared_ptr<const EmbeddingSpace> tgt_;
  std::unique_ptr<Scorer> scorer_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reference-free MT evaluation with cross-lingual embeddings";

  auto base = py::register_exception<Error>(m, "XmoverError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<UnscorableError>(m, "UnscorableError", base.ptr());

  m.def("tokenize", [](const std::string& text, bool lowercase) { return tokenize(text, lowercase); },
        py::arg("text"), py::arg("lowercase") = true);
  m.def(
      "compute_idf",
      [](const std::vector<TokenList>& corpus) {
        const IdfTable table = compute_idf(corpus);
        return py::make_tuple(table.values(), table.doc_count());
      },
      py::arg("corpus"), "Returns (values, document count).");

  py::class_<EmbeddingSpace, std::shared_ptr<EmbeddingSpace>>(m, "EmbeddingSpace")
      .def(py::init([](std::vector<std::string> tokens, const RowMatrix& rows,
                       const std::unordered_map<std::string, double>& idf, std::size_t idf_docs) {
             const IdfTable table = idf.empty() && idf_docs == 0 ? IdfTable{} : idf_from_dict(idf, idf_docs);
             return std::make_shared<EmbeddingSpace>(std::move(tokens), rows, table);
           }),
           py::arg("tokens"), py::arg("vectors"), py::arg("idf") = std::unordered_map<std::string, double>{},
           py::arg("idf_docs") = 0)
      .def_static(
          "load", [](const std::string& path) { return std::make_shared<EmbeddingSpace>(load_embedding_space(path)); },
          py::arg("path"))
      .def_static(
          "load_sentences",
          [](const std::string& path) { return std::make_shared<EmbeddingSpace>(load_sentence_vectors(path)); },
          py::arg("path"))
      .def("save", [](const EmbeddingSpace& s, const std::string& path) { save_embedding_space(s, path); })
      .def(
          "with_idf",
          [](const EmbeddingSpace& s, const std::unordered_map<std::string, double>& idf, std::size_t docs) {
            return std::make_shared<EmbeddingSpace>(s.with_idf(idf_from_dict(idf, docs)));
          },
          py::arg("idf"), py::arg("idf_docs"))
      .def_property_readonly("dimension", &EmbeddingSpace::dimension)
      .def("__len__", &EmbeddingSpace::size)
      .def("__contains__", &EmbeddingSpace::contains)
      .def("lookup", &EmbeddingSpace::lookup, py::arg("token"))
      .def("idf", py::overload_cast<const std::string&>(&EmbeddingSpace::idf, py::const_), py::arg("token"));

  m.def(
      "solve_wmd",
      [](const Matrix& cost, const std::vector<double>& source, const std::vector<double>& target) {
        const TransportPlan plan = solve_wmd(cost, source, target);
        return py::make_tuple(plan.flows, plan.objective);
      },
      py::arg("cost"), py::arg("source"), py::arg("target"), "Returns (flows, objective).");
  m.def(
      "point_cloud_distance",
      [](const RowMatrix& a, const std::vector<double>& wa, const RowMatrix& b, const std::vector<double>& wb) {
        const Matrix cost = cost_matrix(Matrix(a.transpose()), Matrix(b.transpose()));
        return solve_wmd(cost, wa, wb).objective;
      },
      py::arg("a"), py::arg("a_weights"), py::arg("b"), py::arg("b_weights"),
      "Earth mover's distance between weighted point sets given as rows.");

  py::class_<TransformPipeline, std::shared_ptr<TransformPipeline>>(m, "TransformPipeline")
      .def_static(
          "load", [](const std::string& path) { return std::make_shared<TransformPipeline>(load_pipeline(path)); },
          py::arg("path"))
      .def("save", [](const TransformPipeline& p, const std::string& path) { save_pipeline(p, path); })
      .def_property_readonly("name", &TransformPipeline::name)
      .def_property_readonly("dimension", &TransformPipeline::dimension)
      .def_property_readonly("steps",
                             [](const TransformPipeline& p) {
                               std::vector<std::string> names;
                               for (const auto& s : p.steps()) names.push_back(s.name());
                               return names;
                             })
      .def(
          "apply",
          [](const TransformPipeline& p, const Vector& v, const std::string& side) {
            return p.apply(v, parse_side(side));
          },
          py::arg("vector"), py::arg("side") = "source")
      .def(
          "apply_rows",
          [](const TransformPipeline& p, const RowMatrix& rows, const std::string& side) {
            return RowMatrix(p.apply_columns(Matrix(rows.transpose()), parse_side(side)).transpose());
          },
          py::arg("rows"), py::arg("side") = "source")
      .def("__eq__", [](const TransformPipeline& a, const TransformPipeline& b) { return a == b; });

  m.def(
      "fit_pipeline",
      [](const std::string& spec, const RowMatrix& source, const RowMatrix& target, bool normalize) {
        AlignedPairs pairs{source, target, 0};
        return std::make_shared<TransformPipeline>(
            fit_pipeline(parse_pipeline_spec(spec), pairs, FitOptions{normalize}));
      },
      py::arg("spec"), py::arg("source"), py::arg("target"), py::arg("normalize") = false,
      "Fits e.g. 'clp', 'umd' or 'clp.umd' on row-aligned pairs.");
  m.def(
      "alignment_residual",
      [](const RowMatrix& source, const RowMatrix& target) {
        return alignment_residual(AlignedPairs{source, target, 0});
      },
      py::arg("source"), py::arg("target"));

  py::class_<NgramLm, std::shared_ptr<NgramLm>>(m, "NgramLm")
      .def_static(
          "load", [](const std::string& path) { return std::make_shared<NgramLm>(load_lm(path)); }, py::arg("path"))
      .def("save", [](const NgramLm& lm, const std::string& path) { save_lm(lm, path); })
      .def_property_readonly("order", &NgramLm::order)
      .def_property_readonly("vocab_size", &NgramLm::vocab_size)
      .def("probability", &NgramLm::probability, py::arg("word"), py::arg("history"))
      .def(
          "score",
          [](const NgramLm& lm, const TokenList& tokens) { return score_sentence(lm, tokens).avg_log_prob; },
          py::arg("tokens"), "Average natural-log probability per token, end marker included.")
      .def(
          "perplexity", [](const NgramLm& lm, const std::vector<TokenList>& s) { return perplexity(lm, s); },
          py::arg("sentences"));
  m.def(
      "train_lm",
      [](const std::vector<TokenList>& corpus, int order, double discount) {
        return std::make_shared<NgramLm>(train_lm(corpus, order, discount));
      },
      py::arg("corpus"), py::arg("order") = 3, py::arg("discount") = 0.75);

  m.def(
      "pearson", [](const std::vector<double>& a, const std::vector<double>& b) { return pearson(a, b); },
      py::arg("a"), py::arg("b"));
  m.def(
      "kendall", [](const std::vector<double>& a, const std::vector<double>& b) { return kendall(a, b); },
      py::arg("a"), py::arg("b"));

  py::class_<EvaluationRecord>(m, "EvaluationRecord")
      .def(py::init<>())
      .def(py::init([](std::string system_id, std::string segment_id, std::string source, std::string hypothesis,
                       std::optional<std::string> reference, std::optional<std::string> w2w,
                       std::optional<double> human_score) {
             return EvaluationRecord{std::move(system_id), std::move(segment_id), std::move(source),
                                     std::move(hypothesis), std::move(reference), std::move(w2w), human_score};
           }),
           py::arg("system_id"), py::arg("segment_id"), py::arg("source"), py::arg("hypothesis"),
           py::arg("reference") = py::none(), py::arg("w2w") = py::none(), py::arg("human_score") = py::none())
      .def_readwrite("system_id", &EvaluationRecord::system_id)
      .def_readwrite("segment_id", &EvaluationRecord::segment_id)
      .def_readwrite("source", &EvaluationRecord::source)
      .def_readwrite("hypothesis", &EvaluationRecord::hypothesis)
      .def_readwrite("reference", &EvaluationRecord::reference)
      .def_readwrite("w2w", &EvaluationRecord::w2w)
      .def_readwrite("human_score", &EvaluationRecord::human_score);

  m.def(
      "read_dataset",
      [](const std::string& path) {
        DatasetTable table = read_dataset(path);
        return py::make_tuple(table.language_pair, table.rows);
      },
      py::arg("path"), "Returns (language_pair, records).");

  py::class_<SegmentScore>(m, "SegmentScore")
      .def_readonly("system_id", &SegmentScore::system_id)
      .def_readonly("segment_id", &SegmentScore::segment_id)
      .def_readonly("similarity", &SegmentScore::similarity)
      .def_readonly("base_similarity", &SegmentScore::base_similarity)
      .def_readonly("lm_score", &SegmentScore::lm_score)
      .def_readonly("lm_weight", &SegmentScore::lm_weight)
      .def_readonly("lm_active", &SegmentScore::lm_active)
      .def_readonly("scorable", &SegmentScore::scorable)
      .def_readonly("reason", &SegmentScore::reason)
      .def("__repr__", [](const SegmentScore& s) {
        return s.scorable ? "SegmentScore(similarity=" + format_exact(s.similarity) + ")"
                          : "SegmentScore(unscorable: " + s.reason + ")";
      });

  py::class_<W2wResult>(m, "W2wResult")
      .def_readonly("value", &W2wResult::value)
      .def_readonly("n", &W2wResult::n)
      .def_readonly("preferred", &W2wResult::preferred)
      .def_readonly("excluded", &W2wResult::excluded);

  py::class_<PyMetric>(m, "Metric")
      .def(py::init<std::shared_ptr<const EmbeddingSpace>, std::shared_ptr<const EmbeddingSpace>, const std::string&,
                    int, std::shared_ptr<const TransformPipeline>, const std::string&,
                    std::shared_ptr<const NgramLm>, double, bool>(),
           py::arg("source_space"), py::arg("target_space"), py::arg("family") = "mover", py::arg("ngram") = 2,
           py::arg("pipeline") = nullptr, py::arg("remap_stage") = "tokens", py::arg("lm") = nullptr,
           py::arg("lm_weight") = 0.1, py::arg("lowercase") = true)
      .def("score", &PyMetric::score, py::arg("source"), py::arg("candidate"))
      .def("score_records", &PyMetric::score_records, py::arg("records"), py::arg("workers") = 1)
      .def("w2w", &PyMetric::w2w, py::arg("records"))
      .def_property_readonly("name", &PyMetric::name);
}
