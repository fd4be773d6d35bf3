#include "xmover/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "xmover/error.hpp"
#include "xmover/format.hpp"

namespace xmover {

namespace {

constexpr const char* kDatasetTag = "# xmover-dataset v1";
constexpr const char* kLanguagePairPrefix = "# language_pair ";
constexpr const char* kScoresTag = "# xmover-scores v1";

const std::vector<std::string> kRequiredColumns = {"system_id", "segment_id", "source", "hypothesis"};
const std::vector<std::string> kOptionalColumns = {"reference", "w2w", "human_score"};

void check_cell(const std::string& cell, const char* what) {
  if (cell.find_first_of("\t\n\r") != std::string::npos) {
    throw InvalidArgument(std::string(what) + " contains a tab or newline: '" + cell + "'");
  }
}

// Numbers in reports: six significant digits, rounded values in JSON.
double rounded6(double value) { return std::stod(format_sig6(value)); }

}  // namespace

DatasetTable read_dataset(const std::string& path) {
  auto in = open_input(path);
  DatasetTable table;
  table.path = path;

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> columns;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim_eol(line);
    if (!text.empty() && text.front() == '#') {
      if (text.starts_with(kLanguagePairPrefix)) table.language_pair = std::string(text.substr(16));
      continue;
    }
    for (auto c : split(text, '\t')) columns.emplace_back(c);
    break;
  }
  if (columns.empty()) throw ParseError(path, line_no, "missing header line");

  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const bool known = std::find(kRequiredColumns.begin(), kRequiredColumns.end(), columns[i]) != kRequiredColumns.end() ||
                       std::find(kOptionalColumns.begin(), kOptionalColumns.end(), columns[i]) != kOptionalColumns.end();
    if (!known) throw ParseError(path, line_no, "unknown column '" + columns[i] + "'");
    if (!position.emplace(columns[i], i).second) throw ParseError(path, line_no, "duplicate column '" + columns[i] + "'");
  }
  for (const auto& required : kRequiredColumns) {
    if (!position.count(required)) throw ParseError(path, line_no, "missing mandatory column '" + required + "'");
  }
  auto column = [&](const char* name) -> std::optional<std::size_t> {
    auto it = position.find(name);
    return it == position.end() ? std::nullopt : std::optional<std::size_t>(it->second);
  };
  const auto c_ref = column("reference"), c_w2w = column("w2w"), c_human = column("human_score");

  std::set<std::pair<std::string, std::string>> keys;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim_eol(line);
    if (text.empty()) continue;
    auto cells = split(text, '\t');
    if (cells.size() != columns.size()) {
      throw ParseError(path, line_no, "expected " + std::to_string(columns.size()) + " cells, found " +
                                          std::to_string(cells.size()));
    }
    EvaluationRecord r;
    r.system_id = cells[position["system_id"]];
    r.segment_id = cells[position["segment_id"]];
    r.source = cells[position["source"]];
    r.hypothesis = cells[position["hypothesis"]];
    if (r.system_id.empty() || r.segment_id.empty()) throw ParseError(path, line_no, "empty system_id or segment_id");
    if (c_ref && !cells[*c_ref].empty()) r.reference = std::string(cells[*c_ref]);
    if (c_w2w && !cells[*c_w2w].empty()) r.w2w = std::string(cells[*c_w2w]);
    if (c_human && !cells[*c_human].empty()) {
      try {
        r.human_score = parse_double(cells[*c_human]);
      } catch (const InvalidArgument& e) {
        throw ParseError(path, line_no, std::string("human_score: ") + e.what());
      }
    }
    if (!keys.emplace(r.system_id, r.segment_id).second) {
      throw ParseError(path, line_no, "duplicate key (system_id=" + r.system_id + ", segment_id=" + r.segment_id + ")");
    }
    table.rows.push_back(std::move(r));
  }
  return table;
}

std::string serialize_dataset(const DatasetTable& table) {
  bool has_ref = false, has_w2w = false, has_human = false;
  for (const auto& r : table.rows) {
    has_ref |= r.reference.has_value();
    has_w2w |= r.w2w.has_value();
    has_human |= r.human_score.has_value();
  }
  check_cell(table.language_pair, "language pair");
  std::ostringstream os;
  os << kDatasetTag << '\n';
  if (!table.language_pair.empty()) os << kLanguagePairPrefix << table.language_pair << '\n';
  os << "system_id\tsegment_id\tsource\thypothesis";
  if (has_ref) os << "\treference";
  if (has_w2w) os << "\tw2w";
  if (has_human) os << "\thuman_score";
  os << '\n';
  for (const auto& r : table.rows) {
    for (const auto* cell : {&r.system_id, &r.segment_id, &r.source, &r.hypothesis}) check_cell(*cell, "dataset cell");
    os << r.system_id << '\t' << r.segment_id << '\t' << r.source << '\t' << r.hypothesis;
    if (has_ref) {
      check_cell(r.reference.value_or(""), "reference");
      os << '\t' << r.reference.value_or("");
    }
    if (has_w2w) {
      check_cell(r.w2w.value_or(""), "w2w");
      os << '\t' << r.w2w.value_or("");
    }
    if (has_human) os << '\t' << (r.human_score ? format_exact(*r.human_score) : std::string());
    os << '\n';
  }
  return os.str();
}

void write_dataset(const DatasetTable& table, const std::string& path) { write_file(path, serialize_dataset(table)); }

LexiconFile read_lexicon(const std::string& path, LexiconKind kind) {
  auto in = open_input(path);
  LexiconFile file;
  file.path = path;
  file.lexicon.kind = kind;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim_eol(line);
    if (text.empty() || text.front() == '#') {
      ++file.skipped_lines;
      continue;
    }
    auto f = split(text, '\t');
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      throw ParseError(path, line_no, "expected '<source>\\t<target>'");
    }
    file.lexicon.pairs.emplace_back(std::string(f[0]), std::string(f[1]));
  }
  return file;
}

void write_lexicon(const BilingualLexicon& lexicon, const std::string& path) {
  std::ostringstream os;
  for (const auto& [src, tgt] : lexicon.pairs) {
    check_cell(src, "lexicon entry");
    check_cell(tgt, "lexicon entry");
    os << src << '\t' << tgt << '\n';
  }
  write_file(path, os.str());
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "tsv") return ReportFormat::kTsv;
  if (name == "structured" || name == "json") return ReportFormat::kStructured;
  throw InvalidArgument("unknown report format '" + name + "' (expected tsv or structured)");
}

std::string serialize_scores(const std::vector<SegmentScore>& scores, ReportFormat format) {
  if (format == ReportFormat::kStructured) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& s : scores) {
      nlohmann::ordered_json row;
      row["system_id"] = s.system_id;
      row["segment_id"] = s.segment_id;
      if (s.scorable) {
        row["similarity"] = s.similarity;
        row["base"] = s.base_similarity;
        row["lm"] = s.lm_active ? nlohmann::ordered_json(s.lm_score) : nlohmann::ordered_json(nullptr);
      } else {
        row["similarity"] = nullptr;
        row["base"] = nullptr;
        row["lm"] = nullptr;
      }
      row["status"] = s.scorable ? "ok" : "unscorable:" + s.reason;
      rows.push_back(std::move(row));
    }
    nlohmann::ordered_json doc;
    doc["format"] = "xmover-scores";
    doc["version"] = 1;
    doc["scores"] = std::move(rows);
    return doc.dump(2) + "\n";
  }
  std::ostringstream os;
  os << kScoresTag << '\n';
  for (const auto& s : scores) {
    check_cell(s.system_id, "system_id");
    check_cell(s.segment_id, "segment_id");
    os << s.system_id << '\t' << s.segment_id << '\t';
    if (s.scorable) {
      os << format_exact(s.similarity) << '\t' << format_exact(s.base_similarity) << '\t'
         << (s.lm_active ? format_exact(s.lm_score) : "NA") << "\tok\n";
    } else {
      std::string reason = s.reason;
      for (char& c : reason) {
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
      }
      os << "nan\tnan\tNA\tunscorable:" << reason << '\n';
    }
  }
  return os.str();
}

void write_scores(const std::vector<SegmentScore>& scores, const std::string& path, ReportFormat format) {
  write_file(path, serialize_scores(scores, format));
}

namespace {

void parse_status(SegmentScore& s, std::string_view status, const std::string& path, std::size_t line_no) {
  if (status == "ok") {
    s.scorable = true;
  } else if (status.starts_with("unscorable")) {
    s.scorable = false;
    auto colon = status.find(':');
    s.reason = colon == std::string_view::npos ? "" : std::string(status.substr(colon + 1));
  } else {
    throw ParseError(path, line_no, "unknown status '" + std::string(status) + "'");
  }
}

std::vector<SegmentScore> read_structured_scores(const std::string& path, std::istream& in) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
  std::vector<SegmentScore> scores;
  try {
    if (doc.at("format") != "xmover-scores") throw ParseError(path, 0, "not a score file");
    std::size_t index = 0;
    for (const auto& row : doc.at("scores")) {
      ++index;
      SegmentScore s;
      s.system_id = row.at("system_id").get<std::string>();
      s.segment_id = row.at("segment_id").get<std::string>();
      parse_status(s, row.at("status").get<std::string>(), path, 0);
      if (s.scorable) {
        s.similarity = row.at("similarity").get<double>();
        s.base_similarity = row.at("base").get<double>();
        if (!row.at("lm").is_null()) {
          s.lm_active = true;
          s.lm_score = row.at("lm").get<double>();
        }
      }
      scores.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
  return scores;
}

}  // namespace

std::vector<SegmentScore> read_scores(const std::string& path) {
  auto in = open_input(path);
  in >> std::ws;
  if (in.peek() == '{') return read_structured_scores(path, in);
  std::vector<SegmentScore> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim_eol(line);
    if (text.empty() || text.front() == '#') continue;
    auto f = split(text, '\t');
    if (f.size() != 6) throw ParseError(path, line_no, "expected 6 tab-separated fields");
    SegmentScore s;
    s.system_id = f[0];
    s.segment_id = f[1];
    parse_status(s, f[5], path, line_no);
    try {
      if (s.scorable) {
        s.similarity = parse_double(f[2]);
        s.base_similarity = parse_double(f[3]);
        if (f[4] != "NA") {
          s.lm_active = true;
          s.lm_score = parse_double(f[4]);
        }
      }
    } catch (const InvalidArgument& e) {
      throw ParseError(path, line_no, e.what());
    }
    scores.push_back(std::move(s));
  }
  return scores;
}

std::string serialize_report(const CorrelationReport& report, ReportFormat format) {
  const std::string level = to_string(report.level);
  const std::string statistic = to_string(report.statistic);
  std::size_t total_n = 0;
  for (const auto& r : report.rows) total_n += r.n;

  if (format == ReportFormat::kStructured) {
    nlohmann::ordered_json doc;
    doc["format"] = "xmover-correlation";
    doc["version"] = 1;
    doc["level"] = level;
    doc["statistic"] = statistic;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
      rows.push_back({{"language_pair", r.language_pair},
                      {"n", r.n},
                      {"excluded", r.excluded},
                      {"value", rounded6(r.value)}});
    }
    doc["rows"] = std::move(rows);
    if (!report.rows.empty()) doc["average"] = {{"n", total_n}, {"value", rounded6(report.average())}};
    return doc.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "# xmover-correlation v1\n";
  os << "level\tstatistic\tlanguage_pair\tn\texcluded\tvalue\n";
  for (const auto& r : report.rows) {
    os << level << '\t' << statistic << '\t' << r.language_pair << '\t' << r.n << '\t' << r.excluded << '\t'
       << format_sig6(r.value) << '\n';
  }
  if (!report.rows.empty()) {
    os << level << '\t' << statistic << "\taverage\t" << total_n << "\t-\t" << format_sig6(report.average()) << '\n';
  }
  return os.str();
}

namespace {

std::string percent1(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * fraction);
  return buf;
}

}  // namespace

std::string serialize_report(const std::vector<W2wReportRow>& rows, ReportFormat format) {
  if (format == ReportFormat::kStructured) {
    nlohmann::ordered_json doc;
    doc["format"] = "xmover-w2w";
    doc["version"] = 1;
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      out.push_back({{"language_pair", r.language_pair},
                     {"n", r.result.n},
                     {"preferred", r.result.preferred},
                     {"excluded", r.result.excluded},
                     {"w2w_percent", std::stod(percent1(r.result.value))}});
    }
    doc["rows"] = std::move(out);
    return doc.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "# xmover-w2w v1\n";
  os << "language_pair\tn\tpreferred\texcluded\tw2w_percent\n";
  for (const auto& r : rows) {
    os << r.language_pair << '\t' << r.result.n << '\t' << r.result.preferred << '\t' << r.result.excluded << '\t'
       << percent1(r.result.value) << '\n';
  }
  return os.str();
}

std::string serialize_report(const std::vector<SweepRow>& rows, Statistic statistic, ReportFormat format) {
  if (format == ReportFormat::kStructured) {
    nlohmann::ordered_json doc;
    doc["format"] = "xmover-sweep";
    doc["version"] = 1;
    doc["statistic"] = to_string(statistic);
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      out.push_back({{"size", r.size}, {"pairs_used", r.pairs_used}, {"n", r.n}, {"value", rounded6(r.value)}});
    }
    doc["rows"] = std::move(out);
    return doc.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "# xmover-sweep v1\n";
  os << "size\tpairs_used\tn\t" << to_string(statistic) << '\n';
  for (const auto& r : rows) os << r.size << '\t' << r.pairs_used << '\t' << r.n << '\t' << format_sig6(r.value) << '\n';
  return os.str();
}

}  // namespace xmover
