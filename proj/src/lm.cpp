#include "xmover/lm.hpp"

#include <cmath>
#include <sstream>

#include "xmover/error.hpp"
#include "xmover/format.hpp"

namespace xmover {

namespace {

std::string join(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

NgramLm::NgramLm(int order, double discount, std::vector<Table> tables)
    : order_(order), discount_(discount), tables_(std::move(tables)) {
  if (order_ < 1) throw InvalidArgument("NgramLm: order must be >= 1");
  if (!(discount_ > 0.0 && discount_ < 1.0)) throw InvalidArgument("NgramLm: discount must lie in (0, 1)");
  if (tables_.size() != static_cast<std::size_t>(order_)) {
    throw InvalidArgument("NgramLm: expected one count table per order");
  }
  auto unigrams = tables_[0].find("");
  if (unigrams == tables_[0].end() || unigrams->second.total == 0) {
    throw InvalidArgument("NgramLm: missing unigram counts");
  }
  vocab_size_ = unigrams->second.next.size();
}

bool NgramLm::in_vocabulary(const std::string& token) const {
  const auto& unigrams = tables_[0].at("").next;
  return unigrams.count(token) > 0;
}

double NgramLm::probability_at(const std::string& word, const std::vector<std::string>& context,
                               std::size_t length) const {
  const double lower = length == 0 ? 1.0 / static_cast<double>(vocab_size_ + 1)
                                   : probability_at(word, context, length - 1);
  const std::string key = join(context, context.size() - length, context.size());
  const auto& table = tables_[length];
  auto it = table.find(key);
  if (it == table.end() || it->second.total == 0) return lower;
  const HistoryCounts& h = it->second;
  const auto found = h.next.find(word);
  const double count = found == h.next.end() ? 0.0 : static_cast<double>(found->second);
  const double total = static_cast<double>(h.total);
  const double types = static_cast<double>(h.next.size());
  return std::max(count - discount_, 0.0) / total + discount_ * types / total * lower;
}

double NgramLm::probability(const std::string& word, const std::vector<std::string>& history) const {
  const std::string& w = in_vocabulary(word) ? word : std::string(kUnk);
  const std::size_t length = std::min(history.size(), static_cast<std::size_t>(order_ - 1));
  std::vector<std::string> context(history.end() - static_cast<std::ptrdiff_t>(length), history.end());
  return probability_at(w, context, length);
}

std::vector<std::string> NgramLm::outcomes() const {
  std::vector<std::string> out;
  for (const auto& [word, count] : tables_[0].at("").next) out.push_back(word);
  out.emplace_back(kUnk);
  return out;
}

bool NgramLm::operator==(const NgramLm& other) const {
  if (order_ != other.order_ || discount_ != other.discount_ || tables_.size() != other.tables_.size()) return false;
  for (std::size_t k = 0; k < tables_.size(); ++k) {
    const auto& a = tables_[k];
    const auto& b = other.tables_[k];
    if (a.size() != b.size()) return false;
    for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
      if (ia->first != ib->first || ia->second.total != ib->second.total || ia->second.next != ib->second.next) {
        return false;
      }
    }
  }
  return true;
}

NgramLm train_lm(const std::vector<TokenList>& corpus, int order, double discount) {
  if (corpus.empty()) throw InvalidArgument("train_lm: empty corpus");
  if (order < 1) throw InvalidArgument("train_lm: order must be >= 1");
  if (!(discount > 0.0 && discount < 1.0)) throw InvalidArgument("train_lm: discount must lie in (0, 1)");

  const auto pad = static_cast<std::size_t>(order - 1);
  std::vector<NgramLm::Table> tables(static_cast<std::size_t>(order));
  for (const auto& sentence : corpus) {
    std::vector<std::string> padded(pad, kBos);
    padded.insert(padded.end(), sentence.begin(), sentence.end());
    padded.emplace_back(kEos);
    for (std::size_t t = pad; t < padded.size(); ++t) {
      for (std::size_t k = 0; k <= pad; ++k) {
        auto& h = tables[k][join(padded, t - k, t)];
        ++h.total;
        ++h.next[padded[t]];
      }
    }
  }
  return NgramLm(order, discount, std::move(tables));
}

FluencyScore score_sentence(const NgramLm& lm, const TokenList& tokens) {
  const auto pad = static_cast<std::size_t>(lm.order() - 1);
  std::vector<std::string> history(pad, kBos);
  FluencyScore score;
  auto add = [&](const std::string& word) {
    score.total_log_prob += std::log(lm.probability(word, history));
    ++score.token_count;
    history.push_back(lm.in_vocabulary(word) ? word : std::string(kUnk));
  };
  for (const auto& token : tokens) add(token);
  add(kEos);
  score.avg_log_prob = score.total_log_prob / static_cast<double>(score.token_count);
  return score;
}

double perplexity(const NgramLm& lm, const std::vector<TokenList>& sentences) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& s : sentences) {
    auto score = score_sentence(lm, s);
    total += score.total_log_prob;
    count += score.token_count;
  }
  if (count == 0) throw InvalidArgument("perplexity: no sentences");
  return std::exp(-total / static_cast<double>(count));
}

namespace {

constexpr const char* kLmTag = "# xmover-lm v1";

}  // namespace

std::string serialize_lm(const NgramLm& lm) {
  std::ostringstream os;
  os << kLmTag << '\n';
  os << "order\t" << lm.order() << '\n';
  os << "discount\t" << format_exact(lm.discount()) << '\n';
  for (std::size_t k = 0; k < lm.tables().size(); ++k) {
    for (const auto& [history, counts] : lm.tables()[k]) {
      for (const auto& [word, count] : counts.next) {
        os << k << '\t' << history << '\t' << word << '\t' << count << '\n';
      }
    }
  }
  return os.str();
}

NgramLm parse_lm(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() {
    if (!std::getline(in, line)) throw ParseError(origin, line_no + 1, "unexpected end of model file");
    ++line_no;
    return std::string(trim_eol(line));
  };
  if (next() != kLmTag) throw ParseError(origin, 1, "missing '# xmover-lm v1' tag");
  try {
    auto order_fields = split(next(), '\t');
    if (order_fields.size() != 2 || order_fields[0] != "order") throw ParseError(origin, line_no, "expected 'order'");
    const int order = static_cast<int>(parse_uint(order_fields[1]));
    std::string discount_line = next();
    auto discount_fields = split(discount_line, '\t');
    if (discount_fields.size() != 2 || discount_fields[0] != "discount") {
      throw ParseError(origin, line_no, "expected 'discount'");
    }
    const double discount = parse_double(discount_fields[1]);
    if (order < 1) throw ParseError(origin, 2, "order must be >= 1");

    std::vector<NgramLm::Table> tables(static_cast<std::size_t>(order));
    while (std::getline(in, line)) {
      ++line_no;
      auto row = trim_eol(line);
      if (row.empty()) continue;
      auto f = split(row, '\t');
      if (f.size() != 4) throw ParseError(origin, line_no, "expected '<k>\\t<history>\\t<word>\\t<count>'");
      const auto k = parse_uint(f[0]);
      if (k >= tables.size()) throw ParseError(origin, line_no, "history length exceeds model order");
      if (split_ws(f[1]).size() != k) throw ParseError(origin, line_no, "history length does not match k");
      const auto count = parse_uint(f[3]);
      if (count == 0 || f[2].empty()) throw ParseError(origin, line_no, "counts must be positive");
      auto& h = tables[k][std::string(f[1])];
      auto [it, inserted] = h.next.emplace(std::string(f[2]), count);
      if (!inserted) throw ParseError(origin, line_no, "duplicate n-gram entry");
      h.total += count;
    }
    return NgramLm(order, discount, std::move(tables));
  } catch (const InvalidArgument& e) {
    throw ParseError(origin, line_no, e.what());
  }
}

void save_lm(const NgramLm& lm, const std::string& path) { write_file(path, serialize_lm(lm)); }

NgramLm load_lm(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_lm(buffer.str(), path);
}

std::vector<TokenList> read_corpus(const std::string& path, bool lowercase) {
  auto in = open_input(path);
  std::vector<TokenList> corpus;
  std::string line;
  while (std::getline(in, line)) corpus.push_back(tokenize(trim_eol(line), lowercase));
  return corpus;
}

std::unordered_map<std::string, double> load_external_lm_scores(const std::string& path) {
  auto in = open_input(path);
  std::unordered_map<std::string, double> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto row = trim_eol(line);
    if (row.empty() || row.front() == '#') continue;
    auto f = split(row, '\t');
    if (f.size() != 2 || f[0].empty()) throw ParseError(path, line_no, "expected '<segment_id>\\t<float>'");
    double value = 0.0;
    try {
      value = parse_double(f[1]);
    } catch (const InvalidArgument& e) {
      throw ParseError(path, line_no, e.what());
    }
    if (!scores.emplace(std::string(f[0]), value).second) {
      throw ParseError(path, line_no, "duplicate segment id '" + std::string(f[0]) + "'");
    }
  }
  return scores;
}

}  // namespace xmover
