#include "varq/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace varq {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string comment_block(const nlohmann::json& manifest) {
  std::istringstream lines(manifest.dump(2));
  std::string out;
  for (std::string line; std::getline(lines, line);) out += "# " + line + "\n";
  return out;
}

CsvDocument parse_csv(std::istream& in, [[maybe_unused]] const std::string& source) {
  CsvDocument doc;
  std::string comments;
  std::size_t line_no = 0;
  bool in_preamble = true;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto body = trim(line);
    if (in_preamble) {
      if (body.starts_with('#')) {
        auto text = std::string_view(line).substr(line.find('#') + 1);
        if (text.starts_with(' ')) text.remove_prefix(1);
        comments.append(text);
        comments += '\n';
        continue;
      }
      if (body.empty()) continue;
      doc.header = split_fields(body);
      in_preamble = false;
      continue;
    }
    if (body.empty()) continue;
    doc.rows.push_back(split_fields(body));
    doc.row_lines.push_back(line_no);
  }
  if (!trim(comments).empty()) {
    try {
      doc.manifest = nlohmann::json::parse(comments);
    } catch (const nlohmann::json::parse_error&) {
      // Free-form comments are allowed; only a JSON block is a manifest.
    }
  }
  return doc;
}

CsvDocument read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("cannot open " + path.string());
  return parse_csv(in, path.string());
}

void require_header(const CsvDocument& doc, const std::vector<std::string>& expected,
                    const std::string& source) {
  if (doc.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw DependencyError(source + ": expected header '" + want + "'");
  }
}

TStatFile parse_tstat(std::istream& in, const std::string& source) {
  const auto doc = parse_csv(in, source);
  if (doc.header.empty()) throw ValidationError(source + ": empty input");
  if (doc.header != kTStatHeader) {
    throw ParseError(source, 1, "expected header 'experiment_id,t'");
  }
  TStatFile file;
  file.manifest = doc.manifest;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& row = doc.rows[r];
    const auto line = doc.row_lines[r];
    if (row.size() != 2) throw ParseError(source, line, "expected 2 fields, got " + std::to_string(row.size()));
    if (row[0].empty()) throw ValidationError(source + ":" + std::to_string(line) + ": empty experiment_id");
    double t = 0;
    const auto& text = row[1];
    const auto res = std::from_chars(text.data(), text.data() + text.size(), t);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      throw ParseError(source, line, "cannot parse t value '" + text + "'");
    }
    if (!std::isfinite(t)) {
      throw ValidationError(source + ":" + std::to_string(line) + ": non-finite t value '" + text + "' for " + row[0]);
    }
    file.ids.push_back(row[0]);
    file.values.push_back(t);
  }
  if (file.values.empty()) throw ValidationError(source + ": no t-statistics");
  return file;
}

TStatFile read_tstat_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("cannot open " + path.string());
  return parse_tstat(in, path.string());
}

std::string render_tstat(const TStatFile& file) {
  std::string out;
  if (file.manifest) out += comment_block(*file.manifest);
  out += "experiment_id,t\n";
  for (std::size_t i = 0; i < file.values.size(); ++i) {
    out += file.ids[i];
    out += ',';
    out += format_real(file.values[i]);
    out += '\n';
  }
  return out;
}

}  // namespace varq
