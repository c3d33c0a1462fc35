#include "widecnn/harness/csv.hpp"

#include <charconv>
#include <sstream>

#include "widecnn/error.hpp"

namespace widecnn {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += csv_field(fields[i]);
  }
  return line;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool line_start = true;
  bool comment = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (comment) {
      if (c == '\n') {
        comment = false;
        line_start = true;
      }
      continue;
    }
    if (line_start && c == '#') {
      comment = true;
      continue;
    }
    line_start = false;
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      continue;
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      line_start = true;
    } else {
      field += c;
    }
  }
  if (quoted) throw Error(ErrorKind::Format, "unterminated quoted CSV field");
  if (!field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::string schema, std::vector<std::string> header,
                     bool append)
    : header_(std::move(header)) {
  const std::string schema_line = "# schema: " + schema;
  const std::string header_line = csv_line(header_);
  const bool existing = append && std::filesystem::exists(path) && std::filesystem::file_size(path) > 0;
  if (existing) {
    std::ifstream in(path);
    std::string first, second;
    std::getline(in, first);
    std::getline(in, second);
    if (first != schema_line || second != header_line) {
      throw Error(ErrorKind::Format, path.string() + " has a different schema or header; refusing to append");
    }
  }
  out_.open(path, existing ? std::ios::app : std::ios::trunc);
  if (!out_) throw Error(ErrorKind::Format, "cannot write " + path.string());
  if (!existing) out_ << schema_line << '\n' << header_line << '\n';
}

void CsvWriter::write(const std::vector<std::string>& fields) {
  if (fields.size() != header_.size()) {
    throw Error(ErrorKind::Format, "CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                                       std::to_string(header_.size()));
  }
  out_ << csv_line(fields) << '\n';
  out_.flush();
}

void CsvWriter::comment(const std::string& text) {
  out_ << "# " << text << '\n';
  out_.flush();
}

std::vector<std::string> rank_report_header(const std::string& prefix) {
  return {prefix + "rows",      prefix + "cols",      prefix + "rank",       prefix + "sigma_min",
          prefix + "sigma_max", prefix + "threshold", prefix + "machine_eps"};
}

std::vector<std::string> rank_report_fields(const RankReport& r) {
  return {std::to_string(r.rows),     std::to_string(r.cols),     std::to_string(r.estimated_rank),
          format_number(r.sigma_min), format_number(r.sigma_max), format_number(r.threshold),
          format_number(r.machine_eps)};
}

std::vector<std::string> bound_report_header() {
  return {"wide_layer", "lower", "grad_norm", "upper", "residual", "sigma_min_F", "sigma_max_F", "sandwich"};
}

std::vector<std::string> bound_report_fields(const BoundReport& r) {
  return {std::to_string(r.wide_layer), format_number(r.lower),       format_number(r.grad_norm),
          format_number(r.upper),       format_number(r.residual),    format_number(r.sigma_min_F),
          format_number(r.sigma_max_F), r.sandwich_holds() ? "1" : "0"};
}

}  // namespace widecnn
