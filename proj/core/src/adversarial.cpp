#include "gazeattn/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gazeattn/parallel.hpp"

namespace gazeattn {

void AttackConfig::validate() const {
  if (!std::isfinite(epsilon) || epsilon < 0.0) throw ValueError("FGSM epsilon must be finite and >= 0");
  if (!std::isfinite(clamp_min) || !std::isfinite(clamp_max) || !(clamp_min < clamp_max)) {
    throw ValueError("FGSM clamp range must satisfy min < max");
  }
}

FeatureMap fgsm_step(const FeatureMap& x, std::span<const double> grad, const AttackConfig& cfg) {
  cfg.validate();
  if (grad.size() != x.size()) {
    throw ShapeError("gradient has " + std::to_string(grad.size()) + " entries, input has " +
                     std::to_string(x.size()));
  }
  FeatureMap out = x;
  if (cfg.epsilon == 0.0) return out;
  auto v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double s = grad[i] > 0.0 ? 1.0 : (grad[i] < 0.0 ? -1.0 : 0.0);
    const double x0 = v[i];
    double y = std::clamp(x0 + cfg.epsilon * s, cfg.clamp_min, cfg.clamp_max);
    // x + eps can round one ulp past the budget; step back toward x.
    while (std::abs(y - x0) > cfg.epsilon) y = std::nextafter(y, x0);
    v[i] = y;
  }
  return out;
}

FeatureMap fgsm_perturb(const ModelParams& params, const Sample& sample, const AttentionConfig& attention,
                        const AttackConfig& cfg) {
  cfg.validate();
  if (cfg.epsilon == 0.0) return sample.image;
  const Gradients g = backward(params, sample, attention, /*include_supervision=*/false);
  return fgsm_step(sample.image, g.input.values(), cfg);
}

std::vector<RobustnessRow> evaluate_robustness(std::span<const TrainedBaseline> baselines,
                                               std::span<const Sample> test, const AttackConfig& cfg,
                                               std::size_t jobs) {
  cfg.validate();
  if (test.empty()) throw ValueError("robustness evaluation needs a non-empty test set");
  for (const auto& b : baselines) {
    if (b.steps == 0) {
      throw ValueError("baseline '" + std::string(to_string(b.attention.kind)) + "' is untrained; refusing to attack");
    }
  }
  std::vector<RobustnessRow> rows;
  rows.reserve(baselines.size());
  for (const auto& b : baselines) {
    RobustnessRow row;
    row.kind = b.attention.kind;
    row.pairs.resize(test.size());
    std::vector<char> correct(test.size(), 0);
    parallel_for(test.size(), jobs, [&](std::size_t i) {
      const Sample& s = test[i];
      const int clean = predict(b.params, s.image, b.attention, &s.gaze_density);
      const FeatureMap adv = fgsm_perturb(b.params, s, b.attention, cfg);
      const int perturbed = predict(b.params, adv, b.attention, &s.gaze_density);
      row.pairs[i] = LabelPair{s.id, clean, perturbed};
      correct[i] = clean == s.label;
    });
    row.clean_accuracy =
        static_cast<double>(std::count(correct.begin(), correct.end(), 1)) / static_cast<double>(test.size());
    row.fooling_rate = fooling_rate(row.pairs);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace gazeattn
