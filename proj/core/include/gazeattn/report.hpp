#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gazeattn {

/// A rectangular baseline-by-metric table. Missing cells print as "n/a".
struct ReportTable {
  std::string title;
  std::string corner = "baseline";  // label of the row-label column
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  std::vector<std::vector<std::optional<double>>> cells;  // rows x columns
  std::map<std::string, std::string> metadata;            // seed, config_hash, interpretation, ...
  std::vector<std::string> warnings;

  void add_row(std::string label, std::vector<std::optional<double>> values);

  /// Throws ValueError unless rectangular with finite cells.
  void validate() const;

  std::optional<double> cell(std::string_view row, std::string_view column) const;

  /// Header row then one line per row; no trailing newline.
  std::string to_csv() const;

  /// Pretty JSON with the full metadata block. `timestamp` is recorded in the
  /// metadata only; `content_hash` is the FNV-1a hash of to_csv().
  std::string to_json(const std::string& timestamp) const;

  /// Lowercase, hyphen-separated file stem derived from the title.
  std::string file_stem() const;
};

/// Hex FNV-1a digest used for config and content hashes.
std::string hash_hex(std::string_view bytes);

struct ReportFormats {
  bool csv = true;
  bool json = true;
};

/// Writes one file per table per format into `dir` (created if missing) and
/// returns the paths written, in order. Throws Error when `dir` is unwritable
/// and ValueError on duplicate file stems.
std::vector<std::filesystem::path> emit_report(std::span<const ReportTable> tables, const std::filesystem::path& dir,
                                               ReportFormats formats, const std::string& timestamp);

/// UTC time formatted as ISO-8601, or SOURCE_DATE_EPOCH when set.
std::string current_timestamp();

}  // namespace gazeattn
