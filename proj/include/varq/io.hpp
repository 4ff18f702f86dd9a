#pragma once

// File formats shared by the CLI commands.
//
// Every CSV starts with an optional block of "# "-prefixed lines holding a
// pretty-printed JSON manifest, followed by a fixed header line and data rows.
// Reals use the shortest decimal form that round-trips.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace varq {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A command's input files are missing or incomplete.
class DependencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_real(double value);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// "# "-prefixed pretty JSON, one line per JSON line.
std::string comment_block(const nlohmann::json& manifest);

struct CsvDocument {
  std::optional<nlohmann::json> manifest;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;  // 1-based source line of each row
};

/// Splits manifest block, header and rows. Fields are comma separated and
/// trimmed of surrounding whitespace; no quoting.
CsvDocument parse_csv(std::istream& in, const std::string& source);
CsvDocument read_csv(const std::filesystem::path& path);

/// Throws DependencyError unless doc.header equals `expected`.
void require_header(const CsvDocument& doc, const std::vector<std::string>& expected,
                    const std::string& source);

inline const std::vector<std::string> kTStatHeader{"experiment_id", "t"};

struct TStatFile {
  std::vector<std::string> ids;
  std::vector<double> values;
  std::optional<nlohmann::json> manifest;
};

/// Parses the `experiment_id,t` format. Malformed rows raise ParseError with
/// the line number; non-finite t or an empty id raise ValidationError; a
/// file without rows raises ValidationError.
TStatFile parse_tstat(std::istream& in, const std::string& source);
TStatFile read_tstat_file(const std::filesystem::path& path);
std::string render_tstat(const TStatFile& file);

}  // namespace varq
