#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gazeattn/tensor.hpp"

namespace gazeattn {

struct Fixation {
  std::size_t row = 0;
  std::size_t col = 0;

  auto operator<=>(const Fixation&) const = default;
};

/// Human fixations for one image, on a grid of `rows` x `cols` cells.
/// Coordinates are (row, col), 0-indexed. Duplicates are meaningful (several
/// observers may fixate the same cell) and are kept.
class FixationSet {
 public:
  FixationSet(std::string image_id, std::size_t rows, std::size_t cols, std::vector<Fixation> points = {});

  const std::string& image_id() const noexcept { return image_id_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const Fixation> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool scorable() const noexcept { return !points_.empty(); }

  bool operator==(const FixationSet&) const = default;

 private:
  std::string image_id_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Fixation> points_;
};

/// Maps every point proportionally onto a grid of a different size.
FixationSet rescale_fixations(const FixationSet& fix, std::size_t rows, std::size_t cols);

enum class ShuffleMode { deterministic_union, monte_carlo };

struct ShuffleSpec {
  ShuffleMode mode = ShuffleMode::deterministic_union;
  std::size_t num_shuffles = 100;
  std::uint64_t seed = 0;
};

/// Mann-Whitney probability that a positive outscores a negative, ties
/// counted one half. Computed in O((n + m) log m).
double mann_whitney_auc(std::span<const double> positives, std::span<const double> negatives);

/// Shuffled AUC. Positives are the map values at `fix`; negatives are the map
/// values at fixations of the `others` images, minus any location that is
/// also a positive. Every FixationSet must share the map's grid.
double s_auc(GridView pred, const FixationSet& fix, std::span<const FixationSet> others,
             const ShuffleSpec& spec = {});

/// Mean log2-likelihood gain (bits per fixation) of `pred` over `baseline`,
/// both shifted by `epsilon` and normalised to sum 1. `epsilon` may be 0 for
/// strictly positive maps; a zero-probability fixated cell then raises.
double info_gain(GridView pred, const FixationSet& fix, const DensityMap& baseline, double epsilon = 1e-9);

/// Default blur for shuffled baselines: 1/16 of the shorter grid side.
double default_blur_sigma(std::size_t rows, std::size_t cols);

/// Accumulates the fixations of `others` on a rows x cols grid, blurs with an
/// isotropic Gaussian of `blur_sigma` cells and normalises to sum 1.
/// Fixations recorded on another grid size are rescaled first.
DensityMap build_shuffled_baseline(std::span<const FixationSet> others, std::size_t rows, std::size_t cols,
                                   double blur_sigma);

/// Separable Gaussian blur; the kernel is renormalised at the borders, so a
/// constant input stays constant. sigma <= 0 is the identity.
std::vector<double> gaussian_blur(GridView src, double sigma);

/// The ceil(top_fraction * cells) highest cells, ties broken by (row, col).
FixationSet pseudo_fixations(const AttentionMap& map, double top_fraction, std::string image_id = "");

}  // namespace gazeattn
