#include "xmover/cli.hpp"

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "xmover/error.hpp"
#include "xmover/eval.hpp"
#include "xmover/format.hpp"
#include "xmover/io.hpp"
#include "xmover/lm.hpp"
#include "xmover/metrics.hpp"
#include "xmover/remap.hpp"
#include "xmover/vecspace.hpp"

namespace xmover {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::vector<std::string> datasets;
  std::vector<std::string> scores;
  std::string src_emb, tgt_emb;
  std::string src_sent, hyp_sent;
  std::string lexicon;
  std::string lexicon_kind = "word";
  std::string transform;
  std::string lm_model, lm_corpus, lm_scores;
  std::string corpus, input;

  std::string metric = "mover";
  int ngram = 2;
  std::string pipeline = "clp";
  std::string remap_stage = "tokens";
  double lambda = 0.1;
  std::string idf = "dataset";
  bool normalize = false;
  bool no_lowercase = false;

  std::string output;
  std::string format = "tsv";
  std::string level = "segment";
  std::string statistic = "pearson";
  std::string sizes;

  std::uint64_t seed = 2020;
  unsigned workers = 1;
  int order = 3;
  double discount = 0.75;
};

void add_metric_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--src-emb", cfg.src_emb, "Source word-vector file")->required();
  cmd->add_option("--tgt-emb", cfg.tgt_emb, "Target word-vector file")->required();
  cmd->add_option("--metric", cfg.metric, "mover or cosine")->check(CLI::IsMember({"mover", "cosine"}));
  cmd->add_option("--ngram", cfg.ngram, "Mover n-gram order")->check(CLI::IsMember({1, 2}));
  cmd->add_option("--remap-stage", cfg.remap_stage, "Re-map token vectors or pooled n-gram vectors")
      ->check(CLI::IsMember({"tokens", "grams"}));
  cmd->add_option("--src-sent", cfg.src_sent, "External source sentence vectors (cosine)");
  cmd->add_option("--hyp-sent", cfg.hyp_sent, "External candidate sentence vectors (cosine)");
  auto* model = cmd->add_option("--lm-model", cfg.lm_model, "Trained n-gram LM");
  auto* corpus = cmd->add_option("--lm-corpus", cfg.lm_corpus, "Train a trigram LM on this corpus");
  auto* external = cmd->add_option("--lm-scores", cfg.lm_scores, "External LM scores TSV");
  model->excludes(corpus)->excludes(external);
  corpus->excludes(external);
  cmd->add_option("--lambda", cfg.lambda, "LM weight")->check(CLI::NonNegativeNumber);
  cmd->add_option("--idf", cfg.idf, "IDF source: dataset or none")->check(CLI::IsMember({"dataset", "none"}));
  cmd->add_flag("--no-lowercase", cfg.no_lowercase, "Keep letter case when tokenizing");
  cmd->add_option("--workers", cfg.workers, "Scoring threads")->check(CLI::PositiveNumber);
}

void check_pipeline_spec(const std::string& spec) {
  try {
    parse_pipeline_spec(spec);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

void require_files(const std::vector<std::string>& paths) {
  for (const auto& p : paths) {
    if (!p.empty() && !std::filesystem::exists(p)) throw IoError("input file not found: " + p);
  }
}

std::string language_pair_of(const DatasetTable& table) {
  if (!table.language_pair.empty()) return table.language_pair;
  return std::filesystem::path(table.path).stem().string();
}

void emit(const RunConfig& cfg, const std::string& content, std::ostream& out) {
  if (cfg.output.empty() || cfg.output == "-") {
    out << content;
  } else {
    write_file(cfg.output, content);
  }
}

struct MetricSetup {
  std::unique_ptr<EmbeddingSpace> src;
  std::unique_ptr<EmbeddingSpace> tgt;
  std::unique_ptr<EmbeddingSpace> src_sent;
  std::unique_ptr<EmbeddingSpace> hyp_sent;
  MetricConfig config;

  Scorer scorer() const {
    return Scorer(*src, *tgt, config, ExternalSentences{src_sent.get(), hyp_sent.get()});
  }
};

MetricSetup setup_metric(const RunConfig& cfg, const std::vector<DatasetTable>& tables, bool load_transform) {
  MetricSetup setup;
  const bool lowercase = !cfg.no_lowercase;
  EmbeddingSpace src = load_embedding_space(cfg.src_emb);
  EmbeddingSpace tgt = load_embedding_space(cfg.tgt_emb);
  if (cfg.idf == "dataset") {
    std::vector<TokenList> src_docs, tgt_docs;
    std::set<std::string> seen_segments;
    for (const auto& table : tables) {
      for (const auto& r : table.rows) {
        if (seen_segments.insert(language_pair_of(table) + "\t" + r.segment_id).second) {
          src_docs.push_back(tokenize(r.source, lowercase));
          if (r.reference) tgt_docs.push_back(tokenize(*r.reference, lowercase));
          if (r.w2w) tgt_docs.push_back(tokenize(*r.w2w, lowercase));
        }
        tgt_docs.push_back(tokenize(r.hypothesis, lowercase));
      }
    }
    if (!src_docs.empty()) src = src.with_idf(compute_idf(src_docs));
    if (!tgt_docs.empty()) tgt = tgt.with_idf(compute_idf(tgt_docs));
  }
  setup.src = std::make_unique<EmbeddingSpace>(std::move(src));
  setup.tgt = std::make_unique<EmbeddingSpace>(std::move(tgt));

  MetricConfig& c = setup.config;
  c.family = cfg.metric == "cosine" ? MetricFamily::kCosine : MetricFamily::kMover;
  c.ngram_order = cfg.ngram;
  c.remap_stage = cfg.remap_stage == "grams" ? RemapStage::kGrams : RemapStage::kTokens;
  c.lm_weight = cfg.lambda;
  c.lowercase = lowercase;
  if (load_transform && !cfg.transform.empty()) {
    c.pipeline = std::make_shared<const TransformPipeline>(load_pipeline(cfg.transform));
  }
  if (!cfg.lm_model.empty()) c.lm = std::make_shared<const NgramLm>(load_lm(cfg.lm_model));
  if (!cfg.lm_corpus.empty()) c.lm = std::make_shared<const NgramLm>(train_lm(read_corpus(cfg.lm_corpus, lowercase)));
  if (!cfg.lm_scores.empty()) c.external_lm = std::make_shared<const ExternalScores>(load_external_lm_scores(cfg.lm_scores));
  if (!cfg.src_sent.empty() || !cfg.hyp_sent.empty()) {
    if (cfg.src_sent.empty() || cfg.hyp_sent.empty()) throw UsageError("--src-sent and --hyp-sent go together");
    if (c.family != MetricFamily::kCosine) throw UsageError("external sentence vectors need --metric cosine");
    setup.src_sent = std::make_unique<EmbeddingSpace>(load_sentence_vectors(cfg.src_sent));
    setup.hyp_sent = std::make_unique<EmbeddingSpace>(load_sentence_vectors(cfg.hyp_sent));
    c.sentence_source = SentenceSource::kExternal;
  }
  return setup;
}

std::vector<DatasetTable> read_datasets(const std::vector<std::string>& paths) {
  std::vector<DatasetTable> tables;
  for (const auto& p : paths) tables.push_back(read_dataset(p));
  return tables;
}

int cmd_remap_fit(const RunConfig& cfg, std::ostream& out) {
  check_pipeline_spec(cfg.pipeline);
  require_files({cfg.src_emb, cfg.tgt_emb, cfg.lexicon});
  const auto order = parse_pipeline_spec(cfg.pipeline);
  const LexiconKind kind = cfg.lexicon_kind == "sentence" ? LexiconKind::kSentence : LexiconKind::kWord;
  const LexiconFile lexicon = read_lexicon(cfg.lexicon, kind);
  const EmbeddingSpace src =
      kind == LexiconKind::kSentence ? load_sentence_vectors(cfg.src_emb) : load_embedding_space(cfg.src_emb);
  const EmbeddingSpace tgt =
      kind == LexiconKind::kSentence ? load_sentence_vectors(cfg.tgt_emb) : load_embedding_space(cfg.tgt_emb);

  const AlignedPairs pairs = stack_pairs(lexicon.lexicon, src, tgt);
  FitOptions options;
  options.normalize = cfg.normalize;
  const TransformPipeline pipeline = fit_pipeline(order, pairs, options);
  save_pipeline(pipeline, cfg.output);

  out << "pipeline: " << pipeline.name() << " (fitted in order:";
  for (const auto& step : pipeline.steps()) out << ' ' << step.name();
  out << ")\n";
  out << "pairs used: " << pairs.size() << ", skipped: " << pairs.skipped << '\n';
  out << "residual before: " << format_sig6(alignment_residual(pairs)) << '\n';
  out << "residual after: " << format_sig6(alignment_residual(pipeline.apply(pairs))) << '\n';
  return kExitOk;
}

int cmd_score(const RunConfig& cfg, std::ostream& out) {
  require_files({cfg.datasets.front(), cfg.src_emb, cfg.tgt_emb, cfg.transform, cfg.lm_model, cfg.lm_corpus,
                 cfg.lm_scores, cfg.src_sent, cfg.hyp_sent});
  const auto tables = read_datasets(cfg.datasets);
  const MetricSetup setup = setup_metric(cfg, tables, true);
  const Scorer scorer = setup.scorer();
  const auto scores = score_batch(tables.front().rows, scorer, cfg.workers);
  write_scores(scores, cfg.output, parse_report_format(cfg.format));
  std::size_t ok = 0;
  for (const auto& s : scores) ok += s.scorable ? 1 : 0;
  out << setup.config.name() << ": scored " << scores.size() << " segments, " << ok << " scorable, "
      << scores.size() - ok << " unscorable\n";
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.datasets.size() != cfg.scores.size()) {
    throw UsageError("--dataset and --scores must be given the same number of times");
  }
  std::vector<std::string> inputs = cfg.datasets;
  inputs.insert(inputs.end(), cfg.scores.begin(), cfg.scores.end());
  require_files(inputs);

  CorrelationReport report;
  report.level = parse_level(cfg.level);
  report.statistic = parse_statistic(cfg.statistic);
  for (std::size_t i = 0; i < cfg.datasets.size(); ++i) {
    const DatasetTable table = read_dataset(cfg.datasets[i]);
    const auto scores = read_scores(cfg.scores[i]);
    CorrelationRow row = report.level == Level::kSegment ? segment_correlation(scores, table.rows, report.statistic)
                                                         : system_correlation(scores, table.rows, report.statistic);
    row.language_pair = language_pair_of(table);
    for (const auto& w : row.warnings) err << "warning: " << row.language_pair << ": " << w << '\n';
    report.rows.push_back(std::move(row));
  }
  emit(cfg, serialize_report(report, parse_report_format(cfg.format)), out);
  return kExitOk;
}

int cmd_w2w(const RunConfig& cfg, std::ostream& out) {
  std::vector<std::string> inputs = cfg.datasets;
  for (const auto* p : {&cfg.src_emb, &cfg.tgt_emb, &cfg.transform, &cfg.lm_model, &cfg.lm_corpus, &cfg.lm_scores,
                        &cfg.src_sent, &cfg.hyp_sent}) {
    inputs.push_back(*p);
  }
  require_files(inputs);
  const auto tables = read_datasets(cfg.datasets);
  const MetricSetup setup = setup_metric(cfg, tables, true);
  const Scorer scorer = setup.scorer();

  std::vector<W2wReportRow> rows;
  for (const auto& table : tables) {
    const auto triples = w2w_triples(table.rows, scorer);
    if (triples.empty()) {
      throw InvalidArgument(table.path + ": no rows with both 'w2w' and 'reference' columns filled");
    }
    rows.push_back(W2wReportRow{language_pair_of(table), w2w_statistic(std::cref(scorer), triples)});
  }
  emit(cfg, serialize_report(rows, parse_report_format(cfg.format)), out);
  return kExitOk;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> sizes;
  for (auto piece : split(text, ',')) {
    try {
      sizes.push_back(static_cast<std::size_t>(parse_uint(piece)));
    } catch (const InvalidArgument& e) {
      throw UsageError(std::string("--sizes: ") + e.what());
    }
  }
  return sizes;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  check_pipeline_spec(cfg.pipeline);
  const auto sizes = parse_sizes(cfg.sizes);
  require_files({cfg.datasets.front(), cfg.src_emb, cfg.tgt_emb, cfg.lexicon, cfg.lm_model, cfg.lm_corpus,
                 cfg.lm_scores});
  const auto tables = read_datasets(cfg.datasets);
  const MetricSetup setup = setup_metric(cfg, tables, false);
  const LexiconFile lexicon = read_lexicon(cfg.lexicon);

  SweepOptions options;
  options.pipeline = parse_pipeline_spec(cfg.pipeline);
  options.statistic = parse_statistic(cfg.statistic);
  options.seed = cfg.seed;
  options.fit.normalize = cfg.normalize;
  options.workers = cfg.workers;
  const auto rows = dictionary_size_sweep(sizes, lexicon.lexicon, *setup.src, *setup.tgt, tables.front().rows,
                                          setup.config, options);
  emit(cfg, serialize_report(rows, options.statistic, parse_report_format(cfg.format)), out);
  return kExitOk;
}

int cmd_lm_train(const RunConfig& cfg, std::ostream& out) {
  require_files({cfg.corpus});
  const auto corpus = read_corpus(cfg.corpus, !cfg.no_lowercase);
  if (corpus.empty()) throw InvalidArgument(cfg.corpus + ": empty corpus");
  const NgramLm lm = train_lm(corpus, cfg.order, cfg.discount);
  save_lm(lm, cfg.output);
  out << "trained order-" << lm.order() << " model on " << corpus.size() << " sentences, vocabulary "
      << lm.vocab_size() << '\n';

  const std::size_t held = corpus.size() / 10;
  if (held == 0) {
    out << "held-out split is empty; perplexity not reported\n";
    return kExitOk;
  }
  const std::vector<TokenList> train(corpus.begin(), corpus.end() - static_cast<std::ptrdiff_t>(held));
  const std::vector<TokenList> heldout(corpus.end() - static_cast<std::ptrdiff_t>(held), corpus.end());
  const NgramLm split_lm = train_lm(train, cfg.order, cfg.discount);
  out << "train perplexity: " << format_sig6(perplexity(split_lm, train)) << '\n';
  out << "held-out perplexity: " << format_sig6(perplexity(split_lm, heldout)) << '\n';
  return kExitOk;
}

int cmd_lm_score(const RunConfig& cfg, std::ostream& out) {
  const bool from_dataset = !cfg.datasets.empty();
  if (from_dataset == !cfg.input.empty()) throw UsageError("lm-score needs exactly one of --input or --dataset");
  require_files({cfg.lm_model, cfg.input, from_dataset ? cfg.datasets.front() : std::string()});
  const NgramLm lm = load_lm(cfg.lm_model);
  const bool lowercase = !cfg.no_lowercase;
  std::ostringstream os;
  os << "# xmover-lm-scores v1\n";
  if (from_dataset) {
    const DatasetTable table = read_dataset(cfg.datasets.front());
    for (const auto& r : table.rows) {
      os << r.system_id << ':' << r.segment_id << '\t'
         << format_exact(score_sentence(lm, tokenize(r.hypothesis, lowercase)).avg_log_prob) << '\n';
    }
  } else {
    const auto corpus = read_corpus(cfg.input, lowercase);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      os << (i + 1) << '\t' << format_exact(score_sentence(lm, corpus[i]).avg_log_prob) << '\n';
    }
  }
  emit(cfg, os.str(), out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Reference-free MT evaluation with cross-lingual embeddings", "xmover"};
  app.require_subcommand(1);

  auto* remap = app.add_subcommand("remap-fit", "Fit a re-mapping pipeline on a bilingual lexicon");
  remap->add_option("--src-emb", cfg.src_emb, "Source vectors (word format, or sentence dump)")->required();
  remap->add_option("--tgt-emb", cfg.tgt_emb, "Target vectors (word format, or sentence dump)")->required();
  remap->add_option("--lexicon", cfg.lexicon, "Lexicon TSV")->required();
  remap->add_option("--lexicon-kind", cfg.lexicon_kind, "word or sentence")->check(CLI::IsMember({"word", "sentence"}));
  remap->add_option("--pipeline", cfg.pipeline, "clp, umd, clp.umd or umd.clp (leftmost applied last)");
  remap->add_flag("--normalize", cfg.normalize, "L2-normalize lexicon vectors before CLP fitting");
  remap->add_option("--output", cfg.output, "Transform file to write")->required();

  auto* score = app.add_subcommand("score", "Score a dataset segment by segment");
  score->add_option("--dataset", cfg.datasets, "Dataset TSV")->required()->expected(1);
  add_metric_options(score, cfg);
  score->add_option("--transform", cfg.transform, "Transform file from remap-fit");
  score->add_option("--output", cfg.output, "Score file to write")->required();
  score->add_option("--format", cfg.format, "tsv or structured")->check(CLI::IsMember({"tsv", "structured"}));

  auto* evaluate = app.add_subcommand("evaluate", "Correlate scores with human judgments");
  evaluate->add_option("--dataset", cfg.datasets, "Dataset TSV (repeat per language pair)")->required();
  evaluate->add_option("--scores", cfg.scores, "Score file (one per --dataset)")->required();
  evaluate->add_option("--level", cfg.level, "segment or system")->check(CLI::IsMember({"segment", "system"}));
  evaluate->add_option("--statistic", cfg.statistic, "pearson or kendall")
      ->check(CLI::IsMember({"pearson", "kendall"}));
  evaluate->add_option("--output", cfg.output, "Report file (stdout when omitted)");
  evaluate->add_option("--format", cfg.format, "tsv or structured")->check(CLI::IsMember({"tsv", "structured"}));

  auto* w2w = app.add_subcommand("w2w", "Translationese preference statistic");
  w2w->add_option("--dataset", cfg.datasets, "Dataset TSV with w2w and reference columns")->required();
  add_metric_options(w2w, cfg);
  w2w->add_option("--transform", cfg.transform, "Transform file from remap-fit");
  w2w->add_option("--output", cfg.output, "Report file (stdout when omitted)");
  w2w->add_option("--format", cfg.format, "tsv or structured")->check(CLI::IsMember({"tsv", "structured"}));

  auto* sweep = app.add_subcommand("sweep", "Correlation as a function of lexicon size");
  sweep->add_option("--dataset", cfg.datasets, "Dataset TSV with human scores")->required()->expected(1);
  add_metric_options(sweep, cfg);
  sweep->add_option("--lexicon", cfg.lexicon, "Lexicon TSV")->required();
  sweep->add_option("--sizes", cfg.sizes, "Comma-separated lexicon sizes")->required();
  sweep->add_option("--pipeline", cfg.pipeline, "Re-mapping spec refitted at every size");
  sweep->add_flag("--normalize", cfg.normalize, "L2-normalize lexicon vectors before CLP fitting");
  sweep->add_option("--statistic", cfg.statistic, "pearson or kendall")->check(CLI::IsMember({"pearson", "kendall"}));
  sweep->add_option("--seed", cfg.seed, "Subsampling seed");
  sweep->add_option("--output", cfg.output, "Report file (stdout when omitted)");
  sweep->add_option("--format", cfg.format, "tsv or structured")->check(CLI::IsMember({"tsv", "structured"}));

  auto* lm_train = app.add_subcommand("lm-train", "Train the target-side n-gram LM");
  lm_train->add_option("--corpus", cfg.corpus, "One sentence per line")->required();
  lm_train->add_option("--order", cfg.order, "n-gram order")->check(CLI::Range(1, 10));
  lm_train->add_option("--discount", cfg.discount, "Absolute discount in (0, 1)")
      ->check(CLI::Range(0.0, 1.0));
  lm_train->add_flag("--no-lowercase", cfg.no_lowercase, "Keep letter case when tokenizing");
  lm_train->add_option("--output", cfg.output, "Model file to write")->required();

  auto* lm_score = app.add_subcommand("lm-score", "Per-sentence average log-probabilities");
  lm_score->add_option("--model", cfg.lm_model, "Model from lm-train")->required();
  lm_score->add_option("--input", cfg.input, "Text file, one sentence per line (ids are line numbers)");
  lm_score->add_option("--dataset", cfg.datasets, "Dataset TSV; ids are <system_id>:<segment_id>")->expected(1);
  lm_score->add_flag("--no-lowercase", cfg.no_lowercase, "Keep letter case when tokenizing");
  lm_score->add_option("--output", cfg.output, "Score file (stdout when omitted)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsageError;
  }

  try {
    if (*remap) return cmd_remap_fit(cfg, out);
    if (*score) return cmd_score(cfg, out);
    if (*evaluate) return cmd_evaluate(cfg, out, err);
    if (*w2w) return cmd_w2w(cfg, out);
    if (*sweep) return cmd_sweep(cfg, out);
    if (*lm_train) return cmd_lm_train(cfg, out);
    if (*lm_score) return cmd_lm_score(cfg, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitUsageError;
}

}  // namespace xmover
