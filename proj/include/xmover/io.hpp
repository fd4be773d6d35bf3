#pragma once

#include <string>
#include <vector>

#include "xmover/eval.hpp"
#include "xmover/format.hpp"
#include "xmover/metrics.hpp"
#include "xmover/record.hpp"
#include "xmover/remap.hpp"

namespace xmover {

// Dataset TSV. Optional leading comment lines ("# xmover-dataset v1",
// "# language_pair <tag>") precede a header naming the columns:
// system_id, segment_id, source, hypothesis are required; reference, w2w and
// human_score are optional. Empty optional cells mean "absent".
DatasetTable read_dataset(const std::string& path);
std::string serialize_dataset(const DatasetTable& table);
void write_dataset(const DatasetTable& table, const std::string& path);

struct LexiconFile {
  std::string path;
  BilingualLexicon lexicon;
  std::size_t skipped_lines = 0;  // blank and '#' comment lines
};

// "<src>\t<tgt>" per line; '#' lines are comments. Any other line without
// exactly two non-empty fields is an error.
LexiconFile read_lexicon(const std::string& path, LexiconKind kind = LexiconKind::kWord);
void write_lexicon(const BilingualLexicon& lexicon, const std::string& path);

enum class ReportFormat { kTsv, kStructured };
ReportFormat parse_report_format(const std::string& name);

// Per-segment scores: "<system_id>\t<segment_id>\t<similarity>\t<base>\t<lm>\t<status>".
// Status is "ok" or "unscorable:<reason>"; lm is "NA" when no LM is attached.
// Numbers are written in shortest round-trip form. read_scores also accepts the
// structured (JSON) form.
std::string serialize_scores(const std::vector<SegmentScore>& scores, ReportFormat format);
void write_scores(const std::vector<SegmentScore>& scores, const std::string& path, ReportFormat format);
std::vector<SegmentScore> read_scores(const std::string& path);

std::string serialize_report(const CorrelationReport& report, ReportFormat format);

struct W2wReportRow {
  std::string language_pair;
  W2wResult result;
};
// Percentages with one decimal, like "35.0".
std::string serialize_report(const std::vector<W2wReportRow>& rows, ReportFormat format);

std::string serialize_report(const std::vector<SweepRow>& rows, Statistic statistic, ReportFormat format);

template <typename... Args>
void write_report(const std::string& path, Args&&... args) {
  write_file(path, serialize_report(std::forward<Args>(args)...));
}

}  // namespace xmover
