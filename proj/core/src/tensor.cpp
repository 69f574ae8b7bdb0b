#include "gazeattn/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace gazeattn {

const char* to_string(MapKind kind) noexcept {
  switch (kind) {
    case MapKind::attention: return "attention map";
    case MapKind::significance: return "significance map";
    case MapKind::density: return "density map";
    case MapKind::mask: return "mask";
  }
  return "map";
}

std::string shape_string(std::size_t rows, std::size_t cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

namespace detail {

void validate_map(MapKind kind, std::size_t rows, std::size_t cols, std::span<const double> values) {
  if (rows == 0 || cols == 0) {
    throw ShapeError(std::string(to_string(kind)) + " must have positive dimensions, got " +
                     shape_string(rows, cols));
  }
  if (values.size() != rows * cols) {
    throw ShapeError(std::string(to_string(kind)) + " of shape " + shape_string(rows, cols) + " needs " +
                     std::to_string(rows * cols) + " values, got " + std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    bool ok = std::isfinite(v);
    switch (kind) {
      case MapKind::attention: ok = ok && v >= 0.0 && v <= 1.0; break;
      case MapKind::density: ok = ok && v >= 0.0; break;
      case MapKind::mask: ok = ok && (v == 0.0 || v == 1.0); break;
      case MapKind::significance: break;
    }
    if (!ok) {
      throw ValueError(std::string(to_string(kind)) + ": value " + std::to_string(v) + " at cell (" +
                       std::to_string(i / cols) + "," + std::to_string(i % cols) + ") is out of domain");
    }
  }
}

}  // namespace detail

FeatureMap::FeatureMap(std::size_t rows, std::size_t cols, std::size_t channels, std::vector<double> values)
    : rows_(rows), cols_(cols), channels_(channels), values_(std::move(values)) {
  if (rows == 0 || cols == 0 || channels == 0) {
    throw ShapeError("feature map must have positive dimensions");
  }
  if (values_.size() != rows * cols * channels) {
    throw ShapeError("feature map of shape " + shape_string(rows, cols) + "x" + std::to_string(channels) +
                     " needs " + std::to_string(rows * cols * channels) + " values, got " +
                     std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValueError("feature map contains a non-finite value");
  }
}

FeatureMap FeatureMap::zeros(std::size_t rows, std::size_t cols, std::size_t channels) {
  return FeatureMap(rows, cols, channels, std::vector<double>(rows * cols * channels, 0.0));
}

FeatureMap apply_attention(const FeatureMap& z, const AttentionMap& a) {
  if (z.rows() != a.rows() || z.cols() != a.cols()) {
    throw ShapeError("apply_attention: attention " + shape_string(a.rows(), a.cols()) +
                     " does not match features " + shape_string(z.rows(), z.cols()));
  }
  std::vector<double> out(z.values().begin(), z.values().end());
  const std::size_t channels = z.channels();
  for (std::size_t cell = 0; cell < a.size(); ++cell) {
    const double w = a[cell];
    for (std::size_t d = 0; d < channels; ++d) out[cell * channels + d] *= w;
  }
  return FeatureMap(z.rows(), z.cols(), channels, std::move(out));
}

std::vector<double> resample_bilinear(GridView src, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw ShapeError("resample: target dimensions must be positive");
  if (rows == src.rows && cols == src.cols) return {src.values.begin(), src.values.end()};

  const auto [lo_it, hi_it] = std::minmax_element(src.values.begin(), src.values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;

  // Source coordinate of a target cell centre, clamped to the valid range.
  auto axis = [](std::size_t i, std::size_t n_dst, std::size_t n_src) {
    double x = (static_cast<double>(i) + 0.5) * static_cast<double>(n_src) / static_cast<double>(n_dst) - 0.5;
    x = std::clamp(x, 0.0, static_cast<double>(n_src - 1));
    const auto i0 = static_cast<std::size_t>(std::floor(x));
    const std::size_t i1 = std::min(i0 + 1, n_src - 1);
    return std::tuple{i0, i1, x - static_cast<double>(i0)};
  };

  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto [r0, r1, fr] = axis(r, rows, src.rows);
    for (std::size_t c = 0; c < cols; ++c) {
      const auto [c0, c1, fc] = axis(c, cols, src.cols);
      const double top = src(r0, c0) + fc * (src(r0, c1) - src(r0, c0));
      const double bottom = src(r1, c0) + fc * (src(r1, c1) - src(r1, c0));
      out[r * cols + c] = std::clamp(top + fr * (bottom - top), lo, hi);
    }
  }
  return out;
}

template <MapKind Kind>
Map<Kind> resample_map(const Map<Kind>& m, std::size_t rows, std::size_t cols) {
  if (rows == m.rows() && cols == m.cols()) return m;
  return Map<Kind>(rows, cols, resample_bilinear(m.view(), rows, cols));
}

template AttentionMap resample_map(const AttentionMap&, std::size_t, std::size_t);
template SignificanceMap resample_map(const SignificanceMap&, std::size_t, std::size_t);
template DensityMap resample_map(const DensityMap&, std::size_t, std::size_t);

}  // namespace gazeattn
