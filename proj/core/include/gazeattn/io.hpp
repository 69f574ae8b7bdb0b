#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gazeattn/gaze_metrics.hpp"
#include "gazeattn/tensor.hpp"

namespace gazeattn {

enum class MatrixFormat { csv, pgm };

/// A parsed grid before it is given a map kind.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  MatrixFormat format = MatrixFormat::csv;
  std::optional<unsigned> maxval;  // PGM only

  GridView view() const noexcept { return {rows, cols, values}; }
};

/// Parses PGM (P2 or P5, maxval <= 65535, scaled to [0, 1]) or CSV of reals,
/// detected from the first bytes. Lines starting with '#' are comments in
/// both formats. Errors carry the offending line number.
Matrix parse_matrix(const std::string& text, const std::string& source = "matrix");
Matrix load_matrix(const std::filesystem::path& path);

AttentionMap load_attention_map(const std::filesystem::path& path);
DensityMap load_density_map(const std::filesystem::path& path);
/// PGM masks must hold only 0 and maxval; CSV masks only 0 and 1.
MaskMap load_mask(const std::filesystem::path& path);

/// CSV rows are written with shortest round-trip formatting. PGM is written
/// as plain P2 with maxval 65535 and requires values in [0, 1].
std::string format_matrix(GridView grid, MatrixFormat format);
void write_matrix(const std::filesystem::path& path, GridView grid, MatrixFormat format);

/// Multi-channel image as CSV: one line per grid row holding cols x channels
/// values, channel index fastest.
FeatureMap load_image(const std::filesystem::path& path, std::size_t channels);
void write_image(const std::filesystem::path& path, const FeatureMap& image);

/// Fixation CSV: optional "# rows R cols C" line, header "image_id,row,col",
/// then one point per line. Grid dims come from the file or `dims`;
/// `expected_id` (when set) must match every row and names an empty set.
FixationSet parse_fixations(const std::string& text, const std::string& source,
                            std::optional<std::pair<std::size_t, std::size_t>> dims = std::nullopt,
                            std::optional<std::string> expected_id = std::nullopt);
FixationSet load_fixations(const std::filesystem::path& path,
                           std::optional<std::pair<std::size_t, std::size_t>> dims = std::nullopt,
                           std::optional<std::string> expected_id = std::nullopt);
std::string format_fixations(const FixationSet& fix);
void write_fixations(const std::filesystem::path& path, const FixationSet& fix);

/// Whole-file read; throws ValidationError when missing or unreadable.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace gazeattn
