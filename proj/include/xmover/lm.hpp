#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "xmover/vecspace.hpp"

namespace xmover {

inline constexpr const char* kBos = "<s>";
inline constexpr const char* kEos = "</s>";
inline constexpr const char* kUnk = "<unk>";

// Interpolated absolute-discounting n-gram model:
//   p(w | h) = max(c(h, w) - D, 0) / c(h) + D N1+(h .) / c(h) * p(w | h')
// recursing down to a uniform 1 / (V + 1) base, where V counts the training
// types (EOS included) and the extra slot belongs to the unknown token.
// Histories never seen in training back off directly to p(w | h').
class NgramLm {
 public:
  struct HistoryCounts {
    std::uint64_t total = 0;
    std::map<std::string, std::uint64_t> next;
  };
  // tables[k] maps a history of k tokens (joined by ' ') to its counts.
  using Table = std::map<std::string, HistoryCounts>;

  NgramLm(int order, double discount, std::vector<Table> tables);

  int order() const { return order_; }
  double discount() const { return discount_; }
  std::size_t vocab_size() const { return vocab_size_; }
  const std::vector<Table>& tables() const { return tables_; }

  bool in_vocabulary(const std::string& token) const;

  // p(word | history); `history` holds the preceding tokens (any length, only
  // the last order-1 are used). Out-of-vocabulary words are scored as UNK.
  double probability(const std::string& word, const std::vector<std::string>& history) const;

  // Every outcome the model can predict: training types, EOS and UNK.
  std::vector<std::string> outcomes() const;

  bool operator==(const NgramLm& other) const;

 private:
  double probability_at(const std::string& word, const std::vector<std::string>& context, std::size_t length) const;

  int order_;
  double discount_;
  std::vector<Table> tables_;
  std::size_t vocab_size_ = 0;
};

NgramLm train_lm(const std::vector<TokenList>& corpus, int order = 3, double discount = 0.75);

struct FluencyScore {
  double avg_log_prob = 0.0;  // natural log, averaged over tokens + EOS
  double total_log_prob = 0.0;
  std::size_t token_count = 0;  // T + 1
};

FluencyScore score_sentence(const NgramLm& lm, const TokenList& tokens);

// exp(-sum log p / sum (T + 1)) over a set of sentences.
double perplexity(const NgramLm& lm, const std::vector<TokenList>& sentences);

std::string serialize_lm(const NgramLm& lm);
NgramLm parse_lm(const std::string& text, const std::string& origin = "<string>");
void save_lm(const NgramLm& lm, const std::string& path);
NgramLm load_lm(const std::string& path);

// One sentence per line, tokenized with `tokenize`. Blank lines are kept as
// empty sentences.
std::vector<TokenList> read_corpus(const std::string& path, bool lowercase = true);

// "<segment_id>\t<float>" per line. Duplicate ids are an error.
std::unordered_map<std::string, double> load_external_lm_scores(const std::string& path);

}  // namespace xmover
