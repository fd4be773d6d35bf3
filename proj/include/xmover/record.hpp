#pragma once

#include <optional>
#include <string>
#include <vector>

namespace xmover {

// One row of an evaluation table. Sentences are stored as raw text and
// tokenized at scoring time.
struct EvaluationRecord {
  std::string system_id;
  std::string segment_id;
  std::string source;
  std::string hypothesis;
  std::optional<std::string> reference;
  std::optional<std::string> w2w;  // word-by-word rendering of the source
  std::optional<double> human_score;

  bool operator==(const EvaluationRecord&) const = default;
};

struct DatasetTable {
  std::string language_pair;
  std::vector<EvaluationRecord> rows;
  std::string path;
};

}  // namespace xmover
