#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xmover {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using TokenList = std::vector<std::string>;

// Whitespace tokenizer. Lowercasing touches ASCII letters only.
TokenList tokenize(std::string_view text, bool lowercase = true);

// Inverse document frequencies, idf(w) = ln((N + 1) / (df(w) + 1)).
// Tokens that never occurred resolve to ln(N + 1). A default-constructed
// table has N = 0, so every token resolves to 0.
class IdfTable {
 public:
  IdfTable() = default;
  IdfTable(std::unordered_map<std::string, double> values, std::size_t doc_count);

  double operator()(const std::string& token) const;
  double oov_value() const;
  std::size_t doc_count() const { return doc_count_; }
  const std::unordered_map<std::string, double>& values() const { return values_; }

 private:
  std::unordered_map<std::string, double> values_;
  std::size_t doc_count_ = 0;
};

IdfTable compute_idf(const std::vector<TokenList>& corpus);

// Immutable token -> vector map. Vectors are stored as columns of a d x V matrix.
class EmbeddingSpace {
 public:
  // Empty space of dimension 0.
  EmbeddingSpace() = default;
  // Rows of `vectors` are the token vectors, in the order of `tokens`.
  // A token listed twice keeps its last vector.
  EmbeddingSpace(std::vector<std::string> tokens, const Matrix& vectors, IdfTable idf = {});

  std::size_t dimension() const { return static_cast<std::size_t>(vectors_.rows()); }
  std::size_t size() const { return tokens_.size(); }

  // Index of `token`, or nullopt when it is not in the vocabulary.
  std::optional<std::size_t> find(const std::string& token) const;
  bool contains(const std::string& token) const { return find(token).has_value(); }

  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  Eigen::Ref<const Vector> vector(std::size_t index) const { return vectors_.col(static_cast<Eigen::Index>(index)); }
  std::optional<Vector> lookup(const std::string& token) const;

  const IdfTable& idf() const { return idf_; }
  double idf(const std::string& token) const { return idf_(token); }

  // Copy of this space carrying a different IDF table.
  EmbeddingSpace with_idf(IdfTable idf) const;

  // d x V matrix, column i is the vector of token(i).
  const Matrix& vectors() const { return vectors_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  Matrix vectors_;
  IdfTable idf_;
};

// Word-vector text format: "<count> <dim>" header, then "<token> <f1> ... <fd>".
// Duplicate tokens keep the last row and add a warning to `warnings`
// (or std::clog when `warnings` is null).
EmbeddingSpace load_embedding_space(const std::string& path,
                                    std::optional<std::size_t> expected_dim = std::nullopt,
                                    std::vector<std::string>* warnings = nullptr);

// Writes the word-vector text format with shortest round-trip decimals.
void save_embedding_space(const EmbeddingSpace& space, const std::string& path);

// Sentence-embedding dump: "<sentence_id>\t<f1> ... <fd>" per line. The ids
// become the vocabulary of the returned space.
EmbeddingSpace load_sentence_vectors(const std::string& path,
                                     std::optional<std::size_t> expected_dim = std::nullopt);

void save_sentence_vectors(const EmbeddingSpace& space, const std::string& path);

// In-vocabulary tokens of a sentence with their vectors and IDF weights.
struct EmbeddedTokens {
  TokenList tokens;
  Matrix vectors;  // d x T
  std::vector<double> idf;
  std::size_t dropped = 0;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

EmbeddedTokens embed_tokens(const TokenList& tokens, const EmbeddingSpace& space);

// A sentence decomposed into weighted n-grams. Gram i covers retained tokens
// [first[i], first[i] + length[i]).
struct NgramSequence {
  int order = 1;
  std::vector<std::size_t> first;
  std::vector<std::size_t> length;
  Matrix embeddings;  // d x m, mean of the constituent token vectors
  std::vector<double> raw_weights;
  std::vector<double> weights;  // sums to 1

  std::size_t size() const { return raw_weights.size(); }
  bool empty() const { return raw_weights.empty(); }
  std::size_t dimension() const { return static_cast<std::size_t>(embeddings.rows()); }
};

// n must be 1 or 2. A sentence with fewer retained tokens than n yields a
// single gram over all of them. All-OOV input yields an empty sequence.
NgramSequence ngramize(const EmbeddedTokens& embedded, int n);
NgramSequence ngramize(const TokenList& tokens, const EmbeddingSpace& space, int n);

enum class SentenceProvenance { kPooled, kExternal };

struct SentenceEmbedding {
  Vector vector;
  SentenceProvenance provenance = SentenceProvenance::kPooled;
  bool degenerate = false;
};

// IDF-weighted mean of in-vocabulary token vectors (uniform mean when every
// weight is zero).
SentenceEmbedding pool_sentence(const EmbeddedTokens& embedded, std::size_t dimension);
SentenceEmbedding pool_sentence(const TokenList& tokens, const EmbeddingSpace& space);

}  // namespace xmover
