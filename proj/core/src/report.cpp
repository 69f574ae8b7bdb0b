#include "gazeattn/report.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>

#include <json.hpp>

#include "gazeattn/error.hpp"
#include "gazeattn/format.hpp"
#include "gazeattn/random.hpp"

namespace gazeattn {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string cell_text(const std::optional<double>& v) { return v ? format_double(*v) : "n/a"; }

}  // namespace

void ReportTable::add_row(std::string label, std::vector<std::optional<double>> values) {
  if (values.size() != columns.size()) {
    throw ValueError("row '" + label + "' has " + std::to_string(values.size()) + " cells, table '" + title +
                     "' has " + std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(label));
  cells.push_back(std::move(values));
}

void ReportTable::validate() const {
  if (cells.size() != rows.size()) throw ValueError("table '" + title + "': row labels and cells disagree");
  for (std::size_t r = 0; r < cells.size(); ++r) {
    if (cells[r].size() != columns.size()) throw ValueError("table '" + title + "' is not rectangular");
    for (const auto& c : cells[r]) {
      if (c && !std::isfinite(*c)) throw ValueError("table '" + title + "' row '" + rows[r] + "' has a non-finite cell");
    }
  }
}

std::optional<double> ReportTable::cell(std::string_view row, std::string_view column) const {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] != row) continue;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c] == column) return cells[r][c];
    }
  }
  return std::nullopt;
}

std::string ReportTable::to_csv() const {
  validate();
  std::string out = csv_field(corner);
  for (const auto& c : columns) out += ',' + csv_field(c);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += '\n' + csv_field(rows[r]);
    for (const auto& v : cells[r]) out += ',' + cell_text(v);
  }
  return out;
}

std::string ReportTable::to_json(const std::string& timestamp) const {
  const std::string csv = to_csv();
  nlohmann::ordered_json j;
  j["title"] = title;
  j["corner"] = corner;
  j["columns"] = columns;
  auto& jrows = j["rows"] = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    nlohmann::ordered_json row;
    row["label"] = rows[r];
    auto& vals = row["cells"] = nlohmann::ordered_json::array();
    for (const auto& v : cells[r]) {
      if (v) {
        vals.push_back(*v);
      } else {
        vals.push_back("n/a");
      }
    }
    jrows.push_back(std::move(row));
  }
  nlohmann::ordered_json meta(nlohmann::ordered_json::value_t::object);
  for (const auto& [k, v] : metadata) meta[k] = v;
  meta["content_hash"] = hash_hex(csv);
  meta["timestamp"] = timestamp;
  j["metadata"] = std::move(meta);
  j["warnings"] = warnings;
  return j.dump(2) + '\n';
}

std::string ReportTable::file_stem() const {
  std::string out;
  bool pending_dash = false;
  for (unsigned char c : title) {
    if (std::isalnum(c)) {
      if (pending_dash && !out.empty()) out += '-';
      pending_dash = false;
      out += static_cast<char>(std::tolower(c));
    } else {
      pending_dash = true;
    }
  }
  return out.empty() ? "table" : out;
}

std::string hash_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::vector<std::filesystem::path> emit_report(std::span<const ReportTable> tables, const std::filesystem::path& dir,
                                               ReportFormats formats, const std::string& timestamp) {
  std::set<std::string> stems;
  for (const auto& t : tables) {
    t.validate();
    if (!stems.insert(t.file_stem()).second) throw ValueError("two tables map to file name '" + t.file_stem() + "'");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create report directory '" + dir.string() + "': " + ec.message());

  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
    out.close();
    if (!out) throw Error("cannot write '" + path.string() + "'");
    written.push_back(path);
  };
  for (const auto& t : tables) {
    if (formats.csv) write(dir / (t.file_stem() + ".csv"), t.to_csv());
    if (formats.json) write(dir / (t.file_stem() + ".json"), t.to_json(timestamp));
  }
  return written;
}

std::string current_timestamp() {
  std::time_t now = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace gazeattn
