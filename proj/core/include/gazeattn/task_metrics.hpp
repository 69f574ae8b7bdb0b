#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazeattn/tensor.hpp"

namespace gazeattn {

/// A predicted saliency map S with values in [0, 1].
struct SaliencyPrediction {
  std::string image_id;
  AttentionMap map;
};

/// Binary ground-truth segmentation.
struct GroundTruthMask {
  std::string image_id;
  MaskMap mask;
};

struct AdaptiveThreshold {
  double value = 0.0;
  bool clamped = false;  // 2 * mean exceeded the ceiling
};

/// Largest threshold the adaptive rule may return.
inline constexpr double kMaxAdaptiveThreshold = 1.0 - 1e-12;

/// Twice the mean saliency, capped just below 1.
AdaptiveThreshold adaptive_threshold(const AttentionMap& s);

/// Weighted harmonic mean of precision and recall; 0 when both are 0.
double f_measure(double precision, double recall, double beta_sq = 0.3);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

/// Foreground is every cell with S >= threshold. Precision is 0 for an empty
/// foreground, recall is 0 for an empty mask.
PrecisionRecall precision_recall(const AttentionMap& s, const MaskMap& g, double threshold);

struct FMeasureSummary {
  double adaptive_mean = 0.0;  // mean over images of F at each image's adaptive threshold
  double sweep_max = 0.0;      // max over 256 thresholds of F(mean P, mean R)
  std::size_t sweep_argmax = 0;
  std::size_t clamped_thresholds = 0;
  std::vector<double> per_image_adaptive;
};

/// Dataset F-measure, both variants. Predictions and masks are matched by id.
FMeasureSummary f_max(std::span<const SaliencyPrediction> preds, std::span<const GroundTruthMask> gts,
                      double beta_sq = 0.3);

/// Mean absolute error between S and G.
double mae(const AttentionMap& s, const MaskMap& g);
double mae(const SaliencyPrediction& s, const GroundTruthMask& g);

struct RankedItem {
  std::string item_id;
  double score = 0.0;
  bool is_positive = false;
};

/// One class's retrieval ranking, kept sorted by descending score with ties
/// broken by ascending item id.
class RankedPredictions {
 public:
  RankedPredictions(std::string class_id, std::vector<RankedItem> entries);

  const std::string& class_id() const noexcept { return class_id_; }
  std::span<const RankedItem> entries() const noexcept { return entries_; }
  std::size_t positives() const noexcept;

 private:
  std::string class_id_;
  std::vector<RankedItem> entries_;
};

/// Interpolated AP: mean over positives of the maximum precision at any
/// recall level >= that positive's recall. nullopt when the class has no
/// positives.
std::optional<double> average_precision(const RankedPredictions& ranking);

struct MeanAveragePrecision {
  double value = 0.0;
  std::vector<std::string> skipped_classes;
};

/// Unweighted mean of per-class AP over the classes that have positives.
MeanAveragePrecision mean_average_precision(std::span<const RankedPredictions> classes);

struct LabeledPrediction {
  int predicted = 0;
  int truth = 0;
};

double accuracy(std::span<const LabeledPrediction> predictions);

/// Averages per-frame class probabilities and returns the argmax (lowest
/// index on ties).
int video_prediction(std::span<const std::vector<double>> frame_probs);

struct LabelPair {
  std::string item_id;
  int clean_label = 0;
  std::optional<int> perturbed_label;
};

/// Fraction of pairs whose label changed under perturbation.
double fooling_rate(std::span<const LabelPair> pairs);

}  // namespace gazeattn
