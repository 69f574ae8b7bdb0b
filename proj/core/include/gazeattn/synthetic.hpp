#pragma once

#include <cstdint>
#include <vector>

#include "gazeattn/toy_model.hpp"

namespace gazeattn {

/// Desk-scale stand-in for a gaze-annotated classification dataset.
///
/// Every image has `num_classes + 1` channels. The class-determining patch
/// lights channel `label`; distractor patches light the channels of other
/// classes, usually dimmer, so intensity alone is an unreliable cue.
/// The last channel can carry a marker over the informative patch (off by
/// default). Human
/// gaze is an isotropic Gaussian centred on the informative patch.
struct SyntheticConfig {
  std::size_t num_classes = 4;
  std::size_t grid = 16;
  std::size_t samples = 640;
  std::uint64_t seed = 0;

  std::size_t patch = 0;  // 0 selects grid / 4 (at least 2)
  std::size_t distractors = 2;
  double target_low = 0.7, target_high = 1.0;
  double distractor_low = 0.2, distractor_high = 0.8;
  double marker = 0.0;
  double noise = 0.05;
  std::size_t fixations = 10;

  std::size_t patch_size() const noexcept;
  std::size_t channels() const noexcept { return num_classes + 1; }
  void validate() const;
};

struct PatchLocation {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t size = 0;
};

struct SyntheticTask {
  SyntheticConfig config;
  std::vector<Sample> samples;
  std::vector<PatchLocation> informative;  // parallel to samples
};

/// Deterministic in `config` (including the seed). Labels are balanced
/// round-robin, then shuffled.
SyntheticTask generate_synthetic_task(const SyntheticConfig& config);

/// Binary mask of one informative patch on a rows x cols grid.
MaskMap patch_mask(const PatchLocation& patch, std::size_t rows, std::size_t cols);

/// Model shape matching the generated images.
ModelShape model_shape_for(const SyntheticConfig& config, std::size_t feature_channels = 32,
                           Fusion fusion = Fusion::late);

}  // namespace gazeattn
