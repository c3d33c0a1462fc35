#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "widecnn/analysis.hpp"
#include "widecnn/rank.hpp"

namespace widecnn {

/// RFC-4180 field quoting: fields holding a comma, quote, CR or LF are
/// wrapped in quotes with inner quotes doubled.
std::string csv_field(const std::string& text);
std::string csv_line(const std::vector<std::string>& fields);
/// Parses RFC-4180 text into rows; lines starting with '#' outside quotes
/// are skipped.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Shortest representation that round-trips.
std::string format_number(double value);

/// Writes "# schema: <tag>" followed by the header row. When appending to a
/// non-empty file the existing schema line and header must match exactly,
/// otherwise a Format error is raised.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::string schema, std::vector<std::string> header,
            bool append = false);

  void write(const std::vector<std::string>& fields);
  /// A "# " line, skipped by parse_csv.
  void comment(const std::string& text);
  const std::vector<std::string>& header() const { return header_; }

 private:
  std::vector<std::string> header_;
  std::ofstream out_;
};

std::vector<std::string> rank_report_header(const std::string& prefix = "");
std::vector<std::string> rank_report_fields(const RankReport& report);

std::vector<std::string> bound_report_header();
std::vector<std::string> bound_report_fields(const BoundReport& report);

}  // namespace widecnn
