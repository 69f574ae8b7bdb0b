#include "gazeattn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "gazeattn/random.hpp"

namespace gazeattn {

std::size_t SyntheticConfig::patch_size() const noexcept {
  if (patch > 0) return patch;
  return std::max<std::size_t>(2, grid / 4);
}

void SyntheticConfig::validate() const {
  if (num_classes < 2) throw ValueError("synthetic task needs at least two classes");
  if (grid < 4) throw ValueError("synthetic grid must be at least 4x4");
  if (samples == 0) throw ValueError("synthetic task needs at least one sample");
  if (patch_size() > grid) throw ValueError("patch larger than the grid");
  if (!(target_low <= target_high && distractor_low <= distractor_high)) throw ValueError("empty intensity range");
  if (fixations == 0) throw ValueError("synthetic gaze needs at least one fixation");
}

namespace {

bool overlaps(const PatchLocation& a, const PatchLocation& b) {
  return a.row < b.row + b.size && b.row < a.row + a.size && a.col < b.col + b.size && b.col < a.col + a.size;
}

void paint(std::vector<double>& img, std::size_t grid, std::size_t channels, const PatchLocation& at,
           std::size_t channel, double value) {
  for (std::size_t r = at.row; r < at.row + at.size; ++r)
    for (std::size_t c = at.col; c < at.col + at.size; ++c) img[(r * grid + c) * channels + channel] += value;
}

}  // namespace

SyntheticTask generate_synthetic_task(const SyntheticConfig& config) {
  config.validate();
  const std::size_t grid = config.grid;
  const std::size_t channels = config.channels();
  const std::size_t patch = config.patch_size();
  const std::size_t slots = grid - patch + 1;
  const double center_offset = (static_cast<double>(patch) - 1.0) / 2.0;
  const double sigma = static_cast<double>(patch) / 2.0;

  Rng rng(config.seed);
  std::vector<int> labels(config.samples);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % config.num_classes);
  rng.shuffle(labels.begin(), labels.end());

  SyntheticTask task{.config = config, .samples = {}, .informative = {}};
  task.samples.reserve(config.samples);
  for (std::size_t i = 0; i < config.samples; ++i) {
    const int label = labels[i];
    std::vector<double> img(grid * grid * channels, 0.0);

    const PatchLocation target{rng.index(slots), rng.index(slots), patch};
    paint(img, grid, channels, target, static_cast<std::size_t>(label), rng.uniform(config.target_low, config.target_high));
    paint(img, grid, channels, target, channels - 1, config.marker);

    // Distractor classes are distinct, so no wrong class can pile up evidence.
    std::vector<std::size_t> others;
    for (std::size_t k = 1; k < config.num_classes; ++k) others.push_back((static_cast<std::size_t>(label) + k) % config.num_classes);
    rng.shuffle(others.begin(), others.end());
    for (std::size_t k = 0; k < config.distractors; ++k) {
      PatchLocation at{};
      // Bounded retries; a crowded grid simply gets fewer distractors.
      bool placed = false;
      for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
        at = {rng.index(slots), rng.index(slots), patch};
        placed = !overlaps(at, target);
      }
      if (!placed) continue;
      paint(img, grid, channels, at, others[k % others.size()], rng.uniform(config.distractor_low, config.distractor_high));
    }
    for (double& v : img) v = std::clamp(v + rng.normal(0.0, config.noise), 0.0, 1.0);

    const double cr = static_cast<double>(target.row) + center_offset;
    const double cc = static_cast<double>(target.col) + center_offset;
    std::vector<double> density(grid * grid);
    for (std::size_t r = 0; r < grid; ++r)
      for (std::size_t c = 0; c < grid; ++c) {
        const double dr = static_cast<double>(r) - cr, dc = static_cast<double>(c) - cc;
        density[r * grid + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
      }

    std::vector<Fixation> points;
    points.reserve(config.fixations);
    const double hi = static_cast<double>(grid - 1);
    for (std::size_t f = 0; f < config.fixations; ++f) {
      const double r = std::clamp(std::round(rng.normal(cr, sigma)), 0.0, hi);
      const double c = std::clamp(std::round(rng.normal(cc, sigma)), 0.0, hi);
      points.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c)});
    }

    char id[32];
    std::snprintf(id, sizeof id, "s%05zu", i);
    task.samples.push_back(Sample{.id = id,
                                  .image = FeatureMap(grid, grid, channels, std::move(img)),
                                  .label = label,
                                  .gaze_density = DensityMap(grid, grid, std::move(density)),
                                  .gaze_fixations = FixationSet(id, grid, grid, std::move(points))});
    task.informative.push_back(target);
  }
  return task;
}

MaskMap patch_mask(const PatchLocation& patch, std::size_t rows, std::size_t cols) {
  if (patch.row + patch.size > rows || patch.col + patch.size > cols) throw ShapeError("patch outside grid");
  std::vector<double> v(rows * cols, 0.0);
  for (std::size_t r = patch.row; r < patch.row + patch.size; ++r) {
    for (std::size_t c = patch.col; c < patch.col + patch.size; ++c) v[r * cols + c] = 1.0;
  }
  return MaskMap(rows, cols, std::move(v));
}

ModelShape model_shape_for(const SyntheticConfig& config, std::size_t feature_channels, Fusion fusion) {
  return ModelShape{.rows = config.grid,
                    .cols = config.grid,
                    .input_channels = config.channels(),
                    .feature_channels = feature_channels,
                    .num_classes = config.num_classes,
                    .fusion = fusion};
}

}  // namespace gazeattn
