#include "gazeattn/gaze_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gazeattn/attention.hpp"
#include "gazeattn/random.hpp"

namespace gazeattn {

FixationSet::FixationSet(std::string image_id, std::size_t rows, std::size_t cols, std::vector<Fixation> points)
    : image_id_(std::move(image_id)), rows_(rows), cols_(cols), points_(std::move(points)) {
  if (rows_ == 0 || cols_ == 0) throw ShapeError("fixation grid must have positive dimensions");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].row >= rows_ || points_[i].col >= cols_) {
      throw ValueError("fixation " + std::to_string(i) + " (" + std::to_string(points_[i].row) + "," +
                       std::to_string(points_[i].col) + ") of image '" + image_id_ + "' lies outside the " +
                       shape_string(rows_, cols_) + " grid");
    }
  }
}

FixationSet rescale_fixations(const FixationSet& fix, std::size_t rows, std::size_t cols) {
  if (fix.rows() == rows && fix.cols() == cols) return fix;
  std::vector<Fixation> out;
  out.reserve(fix.size());
  for (const Fixation& f : fix.points()) {
    // Cell centre to cell centre.
    const double r = (static_cast<double>(f.row) + 0.5) * static_cast<double>(rows) / static_cast<double>(fix.rows());
    const double c = (static_cast<double>(f.col) + 0.5) * static_cast<double>(cols) / static_cast<double>(fix.cols());
    out.push_back({std::min(static_cast<std::size_t>(r), rows - 1), std::min(static_cast<std::size_t>(c), cols - 1)});
  }
  return FixationSet(fix.image_id(), rows, cols, std::move(out));
}

double mann_whitney_auc(std::span<const double> positives, std::span<const double> negatives) {
  if (positives.empty() || negatives.empty()) throw ValueError("AUC needs at least one positive and one negative");
  std::vector<double> sorted(negatives.begin(), negatives.end());
  std::sort(sorted.begin(), sorted.end());
  // Twice the tie-aware win count, kept integral so the ratio is exact.
  std::uint64_t doubled_wins = 0;
  for (double p : positives) {
    const auto lower = std::lower_bound(sorted.begin(), sorted.end(), p);
    const auto upper = std::upper_bound(lower, sorted.end(), p);
    doubled_wins += 2 * static_cast<std::uint64_t>(lower - sorted.begin()) + static_cast<std::uint64_t>(upper - lower);
  }
  const double pairs = static_cast<double>(positives.size()) * static_cast<double>(negatives.size());
  return static_cast<double>(doubled_wins) / (2.0 * pairs);
}

namespace {

void require_grid(GridView pred, const FixationSet& fix, const char* what) {
  if (pred.rows != fix.rows() || pred.cols != fix.cols()) {
    throw ShapeError(std::string(what) + ": map " + shape_string(pred.rows, pred.cols) + " does not match the " +
                     shape_string(fix.rows(), fix.cols()) + " fixation grid of image '" + fix.image_id() + "'");
  }
}

}  // namespace

double s_auc(GridView pred, const FixationSet& fix, std::span<const FixationSet> others, const ShuffleSpec& spec) {
  require_grid(pred, fix, "s_auc");
  if (!fix.scorable()) throw ScoringError(fix.image_id(), "no fixations (no positives for s-AUC)");

  std::vector<char> is_positive(pred.size(), 0);
  std::vector<double> positives;
  positives.reserve(fix.size());
  for (const Fixation& f : fix.points()) {
    positives.push_back(pred(f.row, f.col));
    is_positive[f.row * pred.cols + f.col] = 1;
  }

  std::vector<double> pool;
  for (const FixationSet& other : others) {
    if (other.image_id() == fix.image_id()) continue;
    require_grid(pred, other, "s_auc negatives");
    for (const Fixation& f : other.points()) {
      const std::size_t cell = f.row * pred.cols + f.col;
      if (!is_positive[cell]) pool.push_back(pred.values[cell]);
    }
  }
  if (pool.empty()) throw ScoringError(fix.image_id(), "no shuffled negatives left for s-AUC");

  if (spec.mode == ShuffleMode::deterministic_union) return mann_whitney_auc(positives, pool);

  if (spec.num_shuffles == 0) throw ValueError("monte_carlo s-AUC needs at least one shuffle");
  Rng rng = Rng::derive(spec.seed, fix.image_id());
  const std::size_t draw = std::min(positives.size(), pool.size());
  std::vector<double> subset(draw);
  std::vector<std::size_t> order(pool.size());
  double total = 0.0;
  for (std::size_t m = 0; m < spec.num_shuffles; ++m) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `draw` slots become a uniform subset.
    for (std::size_t i = 0; i < draw; ++i) {
      const std::size_t j = i + rng.index(order.size() - i);
      std::swap(order[i], order[j]);
      subset[i] = pool[order[i]];
    }
    total += mann_whitney_auc(positives, subset);
  }
  return total / static_cast<double>(spec.num_shuffles);
}

double info_gain(GridView pred, const FixationSet& fix, const DensityMap& baseline, double epsilon) {
  require_grid(pred, fix, "info_gain");
  if (baseline.rows() != pred.rows || baseline.cols() != pred.cols) {
    throw ShapeError("info_gain: baseline " + shape_string(baseline.rows(), baseline.cols()) +
                     " does not match map " + shape_string(pred.rows, pred.cols));
  }
  if (!fix.scorable()) throw ScoringError(fix.image_id(), "no fixations for information gain");
  if (!(epsilon >= 0.0)) throw ValueError("info_gain: epsilon must be nonnegative");

  const auto p_pred = to_distribution(pred.values, epsilon);
  const auto p_base = to_distribution(baseline.values(), epsilon);
  double bits = 0.0;
  for (const Fixation& f : fix.points()) {
    const std::size_t cell = f.row * pred.cols + f.col;
    if (p_pred[cell] <= 0.0 || p_base[cell] <= 0.0) {
      throw ScoringError(fix.image_id(), "zero probability at a fixated cell; use a positive epsilon");
    }
    bits += std::log2(p_pred[cell]) - std::log2(p_base[cell]);
  }
  return bits / static_cast<double>(fix.size());
}

double default_blur_sigma(std::size_t rows, std::size_t cols) {
  return static_cast<double>(std::min(rows, cols)) / 16.0;
}

std::vector<double> gaussian_blur(GridView src, double sigma) {
  std::vector<double> out(src.values.begin(), src.values.end());
  if (!(sigma > 0.0)) return out;
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
  }

  const auto rows = static_cast<std::ptrdiff_t>(src.rows);
  const auto cols = static_cast<std::ptrdiff_t>(src.cols);
  auto pass = [&](const std::vector<double>& in, bool along_rows) {
    std::vector<double> res(in.size());
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
      for (std::ptrdiff_t c = 0; c < cols; ++c) {
        double acc = 0.0;
        double weight = 0.0;
        for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
          const std::ptrdiff_t rr = along_rows ? r : r + k;
          const std::ptrdiff_t cc = along_rows ? c + k : c;
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
          const double w = kernel[static_cast<std::size_t>(k + radius)];
          acc += w * in[static_cast<std::size_t>(rr * cols + cc)];
          weight += w;
        }
        res[static_cast<std::size_t>(r * cols + c)] = acc / weight;
      }
    }
    return res;
  };
  return pass(pass(out, true), false);
}

DensityMap build_shuffled_baseline(std::span<const FixationSet> others, std::size_t rows, std::size_t cols,
                                   double blur_sigma) {
  if (others.empty()) throw ValueError("shuffled baseline needs at least one other image");
  std::vector<double> counts(rows * cols, 0.0);
  std::size_t total_points = 0;
  for (const FixationSet& other : others) {
    const FixationSet aligned = rescale_fixations(other, rows, cols);
    for (const Fixation& f : aligned.points()) counts[f.row * cols + f.col] += 1.0;
    total_points += aligned.size();
  }
  if (total_points == 0) throw ValueError("shuffled baseline: the other images carry no fixations");
  auto blurred = gaussian_blur(GridView{rows, cols, counts}, blur_sigma);
  const double sum = std::accumulate(blurred.begin(), blurred.end(), 0.0);
  for (double& v : blurred) v /= sum;
  return DensityMap(rows, cols, std::move(blurred));
}

FixationSet pseudo_fixations(const AttentionMap& map, double top_fraction, std::string image_id) {
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) throw ValueError("top_fraction must lie in (0, 1]");
  const std::size_t n = map.size();
  // The small slack keeps e.g. 0.05 * 400 from rounding up to 21.
  auto count = static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(n) - 1e-9));
  count = std::clamp<std::size_t>(count, 1, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return map[a] > map[b]; });
  std::vector<Fixation> points;
  points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) points.push_back({order[i] / map.cols(), order[i] % map.cols()});
  std::sort(points.begin(), points.end());
  return FixationSet(std::move(image_id), map.rows(), map.cols(), std::move(points));
}

}  // namespace gazeattn
