#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gazeattn/error.hpp"

namespace gazeattn {

/// Read-only view over any row-major 2-D grid of doubles.
struct GridView {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<const double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

enum class MapKind {
  attention,     // values in [0, 1]
  significance,  // unconstrained finite reals
  density,       // nonnegative finite reals
  mask,          // values in {0, 1}
};

const char* to_string(MapKind kind) noexcept;

namespace detail {
void validate_map(MapKind kind, std::size_t rows, std::size_t cols, std::span<const double> values);
}

/// Immutable dense 2-D map whose value domain is enforced by `Kind`.
template <MapKind Kind>
class Map {
 public:
  static constexpr MapKind kind = Kind;

  Map(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    detail::validate_map(Kind, rows_, cols_, values_);
  }

  static Map filled(std::size_t rows, std::size_t cols, double value) {
    return Map(rows, cols, std::vector<double>(rows * cols, value));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  GridView view() const noexcept { return {rows_, cols_, values_}; }

  bool operator==(const Map&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

using AttentionMap = Map<MapKind::attention>;
using SignificanceMap = Map<MapKind::significance>;
using DensityMap = Map<MapKind::density>;
using MaskMap = Map<MapKind::mask>;

/// Re-validates the values of `from` under the domain of `To`.
template <class To, MapKind From>
To map_cast(const Map<From>& from) {
  return To(from.rows(), from.cols(), std::vector<double>(from.values().begin(), from.values().end()));
}

/// Dense H x W x C tensor, row-major by (row, col, channel).
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::size_t rows, std::size_t cols, std::size_t channels, std::vector<double> values);
  static FeatureMap zeros(std::size_t rows, std::size_t cols, std::size_t channels);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::size_t index(std::size_t r, std::size_t c, std::size_t d) const noexcept {
    return (r * cols_ + c) * channels_ + d;
  }
  double operator()(std::size_t r, std::size_t c, std::size_t d) const { return values_[index(r, c, d)]; }
  double& operator()(std::size_t r, std::size_t c, std::size_t d) { return values_[index(r, c, d)]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  bool operator==(const FeatureMap&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> values_;
};

/// Attention glimpse: G[i,j,d] = A[i,j] * Z[i,j,d].
FeatureMap apply_attention(const FeatureMap& z, const AttentionMap& a);

/// Bilinear resampling with half-pixel centres and edge clamping. Output is
/// clamped to the source value range, so the result stays in the same domain.
template <MapKind Kind>
Map<Kind> resample_map(const Map<Kind>& m, std::size_t rows, std::size_t cols);

/// Same resampling over a raw grid; exposed for callers that hold plain values.
std::vector<double> resample_bilinear(GridView src, std::size_t rows, std::size_t cols);

std::string shape_string(std::size_t rows, std::size_t cols);

}  // namespace gazeattn
