#pragma once

#include <span>
#include <vector>

#include "gazeattn/task_metrics.hpp"
#include "gazeattn/toy_model.hpp"

namespace gazeattn {

struct AttackConfig {
  double epsilon = 0.0;  // max-norm budget in input-intensity units
  double clamp_min = 0.0;
  double clamp_max = 1.0;

  /// Throws ValueError for a negative or non-finite epsilon or an empty clamp range.
  void validate() const;
};

/// x' = clamp(x + eps * sign(grad)); sign(0) = 0.
FeatureMap fgsm_step(const FeatureMap& x, std::span<const double> grad, const AttackConfig& cfg);

/// Untargeted FGSM at the true label. The gradient is that of the
/// cross-entropy alone; the gaze KL term is not part of the attacked loss.
FeatureMap fgsm_perturb(const ModelParams& params, const Sample& sample, const AttentionConfig& attention,
                        const AttackConfig& cfg);

/// A model ready for evaluation.
struct TrainedBaseline {
  AttentionConfig attention;
  ModelParams params;
  std::size_t steps = 0;  // optimiser steps taken; 0 means untrained
};

struct RobustnessRow {
  AttentionKind kind = AttentionKind::sigmoid;
  double clean_accuracy = 0.0;
  double fooling_rate = 0.0;
  std::vector<LabelPair> pairs;  // clean vs perturbed predicted label per test item
};

/// Attacks every test item for every baseline. Throws ValueError for an
/// untrained baseline or an empty test set.
std::vector<RobustnessRow> evaluate_robustness(std::span<const TrainedBaseline> baselines,
                                               std::span<const Sample> test, const AttackConfig& cfg,
                                               std::size_t jobs = 1);

}  // namespace gazeattn
