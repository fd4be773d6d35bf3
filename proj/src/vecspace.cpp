#include "xmover/vecspace.hpp"

#include <cmath>
#include <iostream>
#include <set>
#include <sstream>

#include "xmover/error.hpp"
#include "xmover/format.hpp"

namespace xmover {

TokenList tokenize(std::string_view text, bool lowercase) {
  TokenList out;
  for (auto piece : split_ws(text)) {
    std::string token(piece);
    if (lowercase) {
      for (char& c : token) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
    }
    out.push_back(std::move(token));
  }
  return out;
}

IdfTable::IdfTable(std::unordered_map<std::string, double> values, std::size_t doc_count)
    : values_(std::move(values)), doc_count_(doc_count) {
  for (const auto& [token, value] : values_) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw InvalidArgument("idf value for '" + token + "' must be finite and >= 0");
    }
  }
}

double IdfTable::operator()(const std::string& token) const {
  auto it = values_.find(token);
  return it == values_.end() ? oov_value() : it->second;
}

double IdfTable::oov_value() const { return std::log(static_cast<double>(doc_count_) + 1.0); }

IdfTable compute_idf(const std::vector<TokenList>& corpus) {
  if (corpus.empty()) throw InvalidArgument("compute_idf: empty corpus");
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    std::set<std::string_view> seen(doc.begin(), doc.end());
    for (auto token : seen) ++df[std::string(token)];
  }
  const double n_docs = static_cast<double>(corpus.size());
  std::unordered_map<std::string, double> values;
  values.reserve(df.size());
  for (const auto& [token, count] : df) {
    values.emplace(token, std::log((n_docs + 1.0) / (static_cast<double>(count) + 1.0)));
  }
  return IdfTable(std::move(values), corpus.size());
}

EmbeddingSpace::EmbeddingSpace(std::vector<std::string> tokens, const Matrix& vectors, IdfTable idf)
    : idf_(std::move(idf)) {
  if (static_cast<std::size_t>(vectors.rows()) != tokens.size()) {
    throw InvalidArgument("EmbeddingSpace: token count does not match vector rows");
  }
  if (vectors.cols() <= 0) throw InvalidArgument("EmbeddingSpace: dimension must be positive");
  if (!vectors.allFinite()) throw InvalidArgument("EmbeddingSpace: non-finite vector component");

  // Resolve duplicates (last occurrence wins) while keeping first-seen order.
  std::vector<Eigen::Index> source_row;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto [it, inserted] = index_.emplace(tokens[i], tokens_.size());
    if (inserted) {
      tokens_.push_back(tokens[i]);
      source_row.push_back(static_cast<Eigen::Index>(i));
    } else {
      source_row[it->second] = static_cast<Eigen::Index>(i);
    }
  }
  vectors_.resize(vectors.cols(), static_cast<Eigen::Index>(tokens_.size()));
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    vectors_.col(static_cast<Eigen::Index>(i)) = vectors.row(source_row[i]).transpose();
  }
}

std::optional<std::size_t> EmbeddingSpace::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<Vector> EmbeddingSpace::lookup(const std::string& token) const {
  auto index = find(token);
  if (!index) return std::nullopt;
  return Vector(vector(*index));
}

EmbeddingSpace EmbeddingSpace::with_idf(IdfTable idf) const {
  EmbeddingSpace copy = *this;
  copy.idf_ = std::move(idf);
  return copy;
}

namespace {

struct ParsedRows {
  std::vector<std::string> tokens;
  std::vector<std::vector<double>> rows;
};

Matrix stack_rows(const std::vector<std::vector<double>>& rows, std::size_t dim) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

std::vector<double> parse_values(const std::vector<std::string_view>& fields, std::size_t offset,
                                 const std::string& path, std::size_t line_no) {
  std::vector<double> values;
  values.reserve(fields.size() - offset);
  for (std::size_t j = offset; j < fields.size(); ++j) {
    try {
      values.push_back(parse_double(fields[j]));
    } catch (const InvalidArgument& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  return values;
}

void report_duplicates(const std::vector<std::string>& tokens, const std::string& path,
                       std::vector<std::string>* warnings) {
  std::unordered_map<std::string_view, int> seen;
  for (const auto& t : tokens) {
    if (++seen[t] == 2) {
      std::string msg = path + ": duplicate token '" + t + "', keeping the last vector";
      if (warnings) {
        warnings->push_back(std::move(msg));
      } else {
        std::clog << "warning: " << msg << '\n';
      }
    }
  }
}

}  // namespace

EmbeddingSpace load_embedding_space(const std::string& path, std::optional<std::size_t> expected_dim,
                                    std::vector<std::string>* warnings) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path, 1, "missing header line");

  auto header = split_ws(line);
  if (header.size() != 2) throw ParseError(path, 1, "malformed header, expected '<count> <dim>'");
  unsigned long long count = 0, dim = 0;
  try {
    count = parse_uint(header[0]);
    dim = parse_uint(header[1]);
  } catch (const InvalidArgument& e) {
    throw ParseError(path, 1, std::string("malformed header: ") + e.what());
  }
  if (dim == 0) throw ParseError(path, 1, "malformed header: dimension must be positive");
  if (expected_dim && *expected_dim != dim) {
    throw ParseError(path, 1, "dimension " + std::to_string(dim) + " does not match expected " +
                                  std::to_string(*expected_dim));
  }

  ParsedRows parsed;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != dim + 1) {
      throw ParseError(path, line_no, "row has " + std::to_string(fields.size() - 1) + " values, expected " +
                                          std::to_string(dim));
    }
    parsed.rows.push_back(parse_values(fields, 1, path, line_no));
    parsed.tokens.emplace_back(fields[0]);
  }
  if (parsed.rows.size() != count) {
    throw ParseError(path, 1, "header announces " + std::to_string(count) + " rows but file has " +
                                  std::to_string(parsed.rows.size()));
  }
  report_duplicates(parsed.tokens, path, warnings);
  return EmbeddingSpace(std::move(parsed.tokens), stack_rows(parsed.rows, dim));
}

void save_embedding_space(const EmbeddingSpace& space, const std::string& path) {
  std::ostringstream os;
  os << space.size() << ' ' << space.dimension() << '\n';
  for (std::size_t i = 0; i < space.size(); ++i) {
    os << space.token(i);
    auto v = space.vector(i);
    for (Eigen::Index j = 0; j < v.size(); ++j) os << ' ' << format_exact(v(j));
    os << '\n';
  }
  write_file(path, os.str());
}

EmbeddingSpace load_sentence_vectors(const std::string& path, std::optional<std::size_t> expected_dim) {
  auto in = open_input(path);
  ParsedRows parsed;
  std::optional<std::size_t> dim = expected_dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim_eol(line);
    if (text.empty() || text.front() == '#') continue;
    auto tab = text.find('\t');
    if (tab == std::string_view::npos || tab == 0) throw ParseError(path, line_no, "expected '<id>\\t<values>'");
    auto values = split_ws(text.substr(tab + 1));
    values.insert(values.begin(), text.substr(0, tab));
    if (values.size() < 2) throw ParseError(path, line_no, "no vector values");
    if (!dim) dim = values.size() - 1;
    if (values.size() - 1 != *dim) {
      throw ParseError(path, line_no, "row has " + std::to_string(values.size() - 1) + " values, expected " +
                                          std::to_string(*dim));
    }
    parsed.rows.push_back(parse_values(values, 1, path, line_no));
    parsed.tokens.emplace_back(values[0]);
  }
  if (parsed.rows.empty()) throw ParseError(path, 0, "no sentence vectors");
  std::unordered_map<std::string_view, int> seen;
  for (const auto& id : parsed.tokens) {
    if (++seen[id] == 2) throw ParseError(path, 0, "duplicate sentence id '" + id + "'");
  }
  return EmbeddingSpace(std::move(parsed.tokens), stack_rows(parsed.rows, *dim));
}

void save_sentence_vectors(const EmbeddingSpace& space, const std::string& path) {
  std::ostringstream os;
  for (std::size_t i = 0; i < space.size(); ++i) {
    os << space.token(i) << '\t';
    auto v = space.vector(i);
    for (Eigen::Index j = 0; j < v.size(); ++j) os << (j ? " " : "") << format_exact(v(j));
    os << '\n';
  }
  write_file(path, os.str());
}

EmbeddedTokens embed_tokens(const TokenList& tokens, const EmbeddingSpace& space) {
  EmbeddedTokens out;
  std::vector<std::size_t> rows;
  for (const auto& token : tokens) {
    if (auto index = space.find(token)) {
      rows.push_back(*index);
      out.tokens.push_back(token);
      out.idf.push_back(space.idf(token));
    } else {
      ++out.dropped;
    }
  }
  out.vectors.resize(static_cast<Eigen::Index>(space.dimension()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out.vectors.col(static_cast<Eigen::Index>(i)) = space.vector(rows[i]);
  return out;
}

NgramSequence ngramize(const EmbeddedTokens& embedded, int n) {
  if (n != 1 && n != 2) throw InvalidArgument("ngramize: n must be 1 or 2");
  NgramSequence seq;
  seq.order = n;
  const auto dim = embedded.vectors.rows();
  const std::size_t t = embedded.size();
  if (t == 0) {
    seq.embeddings.resize(dim, 0);
    return seq;
  }

  const std::size_t width = std::min<std::size_t>(static_cast<std::size_t>(n), t);
  const std::size_t count = t - width + 1;
  seq.embeddings.resize(dim, static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    Vector sum = Vector::Zero(dim);
    double weight = 0.0;
    for (std::size_t k = i; k < i + width; ++k) {
      sum += embedded.vectors.col(static_cast<Eigen::Index>(k));
      weight += embedded.idf[k];
    }
    seq.embeddings.col(static_cast<Eigen::Index>(i)) = sum / static_cast<double>(width);
    seq.first.push_back(i);
    seq.length.push_back(width);
    seq.raw_weights.push_back(weight);
  }

  double total = 0.0;
  for (double w : seq.raw_weights) total += w;
  seq.weights.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    seq.weights[i] = total > 0.0 ? seq.raw_weights[i] / total : 1.0 / static_cast<double>(count);
  }
  return seq;
}

NgramSequence ngramize(const TokenList& tokens, const EmbeddingSpace& space, int n) {
  return ngramize(embed_tokens(tokens, space), n);
}

SentenceEmbedding pool_sentence(const EmbeddedTokens& embedded, std::size_t dimension) {
  SentenceEmbedding out;
  out.provenance = SentenceProvenance::kPooled;
  out.vector = Vector::Zero(static_cast<Eigen::Index>(dimension));
  if (embedded.empty()) {
    out.degenerate = true;
    return out;
  }
  double total = 0.0;
  for (double w : embedded.idf) total += w;
  for (std::size_t i = 0; i < embedded.size(); ++i) {
    const double w = total > 0.0 ? embedded.idf[i] / total : 1.0 / static_cast<double>(embedded.size());
    out.vector += w * embedded.vectors.col(static_cast<Eigen::Index>(i));
  }
  out.degenerate = !(out.vector.norm() > 0.0);
  return out;
}

SentenceEmbedding pool_sentence(const TokenList& tokens, const EmbeddingSpace& space) {
  return pool_sentence(embed_tokens(tokens, space), space.dimension());
}

}  // namespace xmover
