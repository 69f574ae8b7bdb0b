#include "gazeattn/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gazeattn/error.hpp"
#include "gazeattn/format.hpp"

namespace gazeattn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
std::optional<T> parse_uint(std::string_view s) {
  s = trim(s);
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Splits text into lines, numbering from 1. A final newline does not add an
// empty line.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return lines;
}

struct PgmCursor {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t line = 1;

  void skip_space_and_comments() {
    while (pos < text.size()) {
      const char c = text[pos];
      if (c == '#') {
        while (pos < text.size() && text[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        line += c == '\n';
        ++pos;
      } else {
        break;
      }
    }
  }

  std::string_view token() {
    skip_space_and_comments();
    const std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) && text[pos] != '#') ++pos;
    return text.substr(start, pos - start);
  }
};

Matrix parse_pgm(std::string_view text, const std::string& source) {
  PgmCursor cur{text};
  const std::string magic(cur.token());
  const bool binary = magic == "P5";
  auto header_value = [&](const char* what) {
    const std::size_t line = cur.line;
    const auto tok = cur.token();
    const auto v = parse_uint<std::size_t>(tok);
    if (!v) throw ParseError(source, line, std::string("bad PGM ") + what + " '" + std::string(tok) + "'");
    return *v;
  };
  Matrix m;
  m.format = MatrixFormat::pgm;
  m.cols = header_value("width");
  m.rows = header_value("height");
  const std::size_t maxval = header_value("maxval");
  if (m.rows == 0 || m.cols == 0) throw ParseError(source, cur.line, "PGM has an empty grid");
  if (maxval == 0 || maxval > 65535) throw ParseError(source, cur.line, "PGM maxval must be in 1..65535");
  m.maxval = static_cast<unsigned>(maxval);
  const std::size_t n = m.rows * m.cols;
  m.values.reserve(n);
  const double scale = static_cast<double>(maxval);

  if (binary) {
    // Exactly one whitespace byte separates the header from the raster.
    if (cur.pos >= text.size() || !std::isspace(static_cast<unsigned char>(text[cur.pos]))) {
      throw ParseError(source, cur.line, "P5 header must end in a single whitespace byte");
    }
    const std::size_t raster_line = cur.line + (text[cur.pos] == '\n');
    ++cur.pos;
    const std::size_t bytes = maxval < 256 ? 1 : 2;
    const std::size_t need = n * bytes;
    const std::size_t have = text.size() - cur.pos;
    if (have < need) {
      throw ParseError(source, raster_line, "P5 raster has " + std::to_string(have) + " bytes, needs " +
                                                std::to_string(need));
    }
    if (have > need) throw ParseError(source, raster_line, "trailing data after P5 raster");
    for (std::size_t i = 0; i < n; ++i) {
      const auto* p = reinterpret_cast<const unsigned char*>(text.data() + cur.pos + i * bytes);
      const std::size_t v = bytes == 1 ? p[0] : (static_cast<std::size_t>(p[0]) << 8) | p[1];
      if (v > maxval) throw ParseError(source, raster_line, "pixel " + std::to_string(i) + " exceeds maxval");
      m.values.push_back(static_cast<double>(v) / scale);
    }
    return m;
  }

  for (std::size_t i = 0; i < n; ++i) {
    cur.skip_space_and_comments();
    const std::size_t line = cur.line;
    const auto tok = cur.token();
    if (tok.empty()) {
      throw ParseError(source, line, "P2 raster ends after " + std::to_string(i) + " of " + std::to_string(n) +
                                         " values");
    }
    const auto v = parse_uint<std::size_t>(tok);
    if (!v) throw ParseError(source, line, "bad P2 value '" + std::string(tok) + "'");
    if (*v > maxval) throw ParseError(source, line, "value " + std::to_string(*v) + " exceeds maxval");
    m.values.push_back(static_cast<double>(*v) / scale);
  }
  cur.skip_space_and_comments();
  if (cur.pos != text.size()) throw ParseError(source, cur.line, "trailing data after P2 raster");
  return m;
}

// Rows of comma-separated reals; '#' comment lines and blank lines skipped.
std::vector<std::vector<double>> parse_csv_rows(std::string_view text, const std::string& source,
                                                std::vector<std::size_t>* line_numbers = nullptr) {
  std::vector<std::vector<double>> rows;
  const auto lines = split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const auto line = trim(lines[li]);
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    for (const auto field : split_commas(line)) {
      const auto v = parse_double(field);
      if (!v) throw ParseError(source, li + 1, "bad number '" + std::string(field) + "'");
      if (!std::isfinite(*v)) throw ParseError(source, li + 1, "non-finite value");
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(source, li + 1, "ragged row: " + std::to_string(row.size()) + " fields, expected " +
                                           std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
    if (line_numbers) line_numbers->push_back(li + 1);
  }
  if (rows.empty()) throw ParseError(source, 0, "no data rows");
  return rows;
}

template <class MapT>
MapT typed(const Matrix& m, const std::string& source) {
  try {
    return MapT(m.rows, m.cols, m.values);
  } catch (const ValidationError& e) {
    throw ParseError(source, 0, e.what());
  }
}

}  // namespace

Matrix parse_matrix(const std::string& text, const std::string& source) {
  std::string_view view = text;
  if (view.size() >= 2 && view[0] == 'P' && (view[1] == '2' || view[1] == '5')) return parse_pgm(view, source);
  if (!view.empty() && view[0] == 'P' && view.size() >= 2 && std::isdigit(static_cast<unsigned char>(view[1]))) {
    throw ParseError(source, 1, "unsupported netpbm variant '" + std::string(view.substr(0, 2)) + "'");
  }
  const auto rows = parse_csv_rows(view, source);
  Matrix m;
  m.format = MatrixFormat::csv;
  m.rows = rows.size();
  m.cols = rows.front().size();
  m.values.reserve(m.rows * m.cols);
  for (const auto& r : rows) m.values.insert(m.values.end(), r.begin(), r.end());
  return m;
}

Matrix load_matrix(const std::filesystem::path& path) { return parse_matrix(read_text_file(path), path.string()); }

AttentionMap load_attention_map(const std::filesystem::path& path) {
  return typed<AttentionMap>(load_matrix(path), path.string());
}

DensityMap load_density_map(const std::filesystem::path& path) {
  return typed<DensityMap>(load_matrix(path), path.string());
}

MaskMap load_mask(const std::filesystem::path& path) {
  const Matrix m = load_matrix(path);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    const double v = m.values[i];
    if (v != 0.0 && v != 1.0) {
      throw ParseError(path.string(), 0,
                       "mask cell (" + std::to_string(i / m.cols) + ", " + std::to_string(i % m.cols) +
                           ") is neither 0 nor " + (m.format == MatrixFormat::pgm ? "maxval" : "1"));
    }
  }
  return typed<MaskMap>(m, path.string());
}

std::string format_matrix(GridView grid, MatrixFormat format) {
  if (grid.values.size() != grid.rows * grid.cols || grid.values.empty()) throw ShapeError("malformed grid");
  std::string out;
  if (format == MatrixFormat::csv) {
    out = "# rows " + std::to_string(grid.rows) + " cols " + std::to_string(grid.cols) + ", row-major\n";
    for (std::size_t r = 0; r < grid.rows; ++r) {
      for (std::size_t c = 0; c < grid.cols; ++c) {
        if (c) out += ',';
        out += format_double(grid(r, c));
      }
      out += '\n';
    }
    return out;
  }
  constexpr double kMax = 65535.0;
  out = "P2\n# row-major, (row, col) 0-indexed\n" + std::to_string(grid.cols) + ' ' + std::to_string(grid.rows) +
        "\n65535\n";
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const double v = grid(r, c);
      if (!(v >= 0.0 && v <= 1.0)) throw ValueError("PGM output needs values in [0, 1]");
      if (c) out += ' ';
      out += std::to_string(static_cast<unsigned>(std::lround(v * kMax)));
    }
    out += '\n';
  }
  return out;
}

void write_matrix(const std::filesystem::path& path, GridView grid, MatrixFormat format) {
  write_text_file(path, format_matrix(grid, format));
}

FeatureMap load_image(const std::filesystem::path& path, std::size_t channels) {
  if (channels == 0) throw ValueError("image needs at least one channel");
  const std::string source = path.string();
  std::vector<std::size_t> lines;
  const auto rows = parse_csv_rows(read_text_file(path), source, &lines);
  const std::size_t width = rows.front().size();
  if (width % channels != 0) {
    throw ParseError(source, lines.front(),
                     std::to_string(width) + " values per row is not a multiple of " + std::to_string(channels) +
                         " channels");
  }
  std::vector<double> values;
  values.reserve(rows.size() * width);
  for (const auto& r : rows) values.insert(values.end(), r.begin(), r.end());
  return FeatureMap(rows.size(), width / channels, channels, std::move(values));
}

void write_image(const std::filesystem::path& path, const FeatureMap& image) {
  std::string out = "# rows " + std::to_string(image.rows()) + " cols " + std::to_string(image.cols()) +
                    " channels " + std::to_string(image.channels()) + ", channel fastest\n";
  const auto v = image.values();
  const std::size_t width = image.cols() * image.channels();
  for (std::size_t r = 0; r < image.rows(); ++r) {
    for (std::size_t i = 0; i < width; ++i) {
      if (i) out += ',';
      out += format_double(v[r * width + i]);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

FixationSet parse_fixations(const std::string& text, const std::string& source,
                            std::optional<std::pair<std::size_t, std::size_t>> dims,
                            std::optional<std::string> expected_id) {
  const auto lines = split_lines(text);
  bool header_seen = false;
  std::optional<std::pair<std::size_t, std::size_t>> file_dims;
  std::string id = expected_id.value_or("");
  std::vector<Fixation> points;
  std::vector<std::size_t> point_lines;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const auto line = trim(lines[li]);
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::istringstream ls{std::string(line.substr(1))};
      std::string k1, k2;
      std::size_t r = 0, c = 0;
      if (ls >> k1 >> r >> k2 >> c && k1 == "rows" && k2 == "cols") {
        if (r == 0 || c == 0) throw ParseError(source, li + 1, "grid dims must be positive");
        file_dims = {r, c};
      }
      continue;
    }
    if (!header_seen) {
      if (line != "image_id,row,col") throw ParseError(source, li + 1, "expected header 'image_id,row,col'");
      header_seen = true;
      continue;
    }
    const auto fields = split_commas(line);
    if (fields.size() != 3) throw ParseError(source, li + 1, "expected 3 fields, got " + std::to_string(fields.size()));
    const auto row = parse_uint<std::size_t>(fields[1]);
    const auto col = parse_uint<std::size_t>(fields[2]);
    if (!row || !col) throw ParseError(source, li + 1, "row and col must be nonnegative integers");
    const std::string row_id(fields[0]);
    if (expected_id && row_id != *expected_id) {
      throw ParseError(source, li + 1, "image id '" + row_id + "' does not match '" + *expected_id + "'");
    }
    if (points.empty() && !expected_id) {
      id = row_id;
    } else if (row_id != id) {
      throw ParseError(source, li + 1, "mixed image ids '" + id + "' and '" + row_id + "'");
    }
    points.push_back({*row, *col});
    point_lines.push_back(li + 1);
  }
  if (!header_seen) throw ParseError(source, 0, "missing header 'image_id,row,col'");
  if (file_dims && dims && *file_dims != *dims) {
    throw ParseError(source, 0, "file grid " + shape_string(file_dims->first, file_dims->second) +
                                    " disagrees with expected " + shape_string(dims->first, dims->second));
  }
  const auto grid = file_dims ? file_dims : dims;
  if (!grid) throw ParseError(source, 0, "grid dims missing: add '# rows R cols C' or supply them");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].row >= grid->first || points[i].col >= grid->second) {
      throw ParseError(source, point_lines[i],
                       "fixation (" + std::to_string(points[i].row) + ", " + std::to_string(points[i].col) +
                           ") outside " + shape_string(grid->first, grid->second) + " grid");
    }
  }
  return FixationSet(id, grid->first, grid->second, std::move(points));
}

FixationSet load_fixations(const std::filesystem::path& path, std::optional<std::pair<std::size_t, std::size_t>> dims,
                           std::optional<std::string> expected_id) {
  return parse_fixations(read_text_file(path), path.string(), dims, std::move(expected_id));
}

std::string format_fixations(const FixationSet& fix) {
  std::string out = "# rows " + std::to_string(fix.rows()) + " cols " + std::to_string(fix.cols()) +
                    ", (row, col) 0-indexed\nimage_id,row,col\n";
  for (const auto& p : fix.points()) {
    out += fix.image_id() + ',' + std::to_string(p.row) + ',' + std::to_string(p.col) + '\n';
  }
  return out;
}

void write_fixations(const std::filesystem::path& path, const FixationSet& fix) {
  write_text_file(path, format_fixations(fix));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw Error("cannot write '" + path.string() + "'");
}

}  // namespace gazeattn
