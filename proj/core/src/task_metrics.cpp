#include "gazeattn/task_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace gazeattn {

AdaptiveThreshold adaptive_threshold(const AttentionMap& s) {
  const auto v = s.values();
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  const double t = 2.0 * mean;
  if (t > kMaxAdaptiveThreshold) return {kMaxAdaptiveThreshold, true};
  return {t, false};
}

double f_measure(double precision, double recall, double beta_sq) {
  if (precision < 0.0 || precision > 1.0 || recall < 0.0 || recall > 1.0) {
    throw ValueError("precision and recall must lie in [0, 1]");
  }
  if (!(beta_sq > 0.0)) throw ValueError("beta^2 must be positive");
  const double denom = beta_sq * precision + recall;
  if (denom == 0.0) return 0.0;
  return (1.0 + beta_sq) * precision * recall / denom;
}

PrecisionRecall precision_recall(const AttentionMap& s, const MaskMap& g, double threshold) {
  if (s.rows() != g.rows() || s.cols() != g.cols()) {
    throw ShapeError("prediction " + shape_string(s.rows(), s.cols()) + " does not match mask " +
                     shape_string(g.rows(), g.cols()));
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool predicted = s[i] >= threshold;
    const bool actual = g[i] != 0.0;
    tp += predicted && actual;
    fp += predicted && !actual;
    fn += !predicted && actual;
  }
  PrecisionRecall pr;
  if (tp + fp > 0) pr.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) pr.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return pr;
}

namespace {

std::vector<std::pair<const SaliencyPrediction*, const GroundTruthMask*>> match_by_id(
    std::span<const SaliencyPrediction> preds, std::span<const GroundTruthMask> gts) {
  std::map<std::string, const GroundTruthMask*> by_id;
  for (const auto& g : gts) {
    if (!by_id.emplace(g.image_id, &g).second) throw ValueError("duplicate mask id '" + g.image_id + "'");
  }
  std::vector<std::pair<const SaliencyPrediction*, const GroundTruthMask*>> pairs;
  for (const auto& p : preds) {
    const auto it = by_id.find(p.image_id);
    if (it == by_id.end()) throw ValueError("no ground-truth mask for prediction '" + p.image_id + "'");
    pairs.emplace_back(&p, it->second);
  }
  return pairs;
}

}  // namespace

FMeasureSummary f_max(std::span<const SaliencyPrediction> preds, std::span<const GroundTruthMask> gts,
                      double beta_sq) {
  if (preds.empty()) throw ValueError("F-measure needs at least one prediction");
  const auto pairs = match_by_id(preds, gts);

  constexpr std::size_t kLevels = 256;
  std::vector<double> sum_p(kLevels, 0.0), sum_r(kLevels, 0.0);
  FMeasureSummary out;
  double adaptive_sum = 0.0;
  for (const auto& [pred, gt] : pairs) {
    const AdaptiveThreshold t = adaptive_threshold(pred->map);
    out.clamped_thresholds += t.clamped;
    const PrecisionRecall pr = precision_recall(pred->map, gt->mask, t.value);
    const double f = f_measure(pr.precision, pr.recall, beta_sq);
    out.per_image_adaptive.push_back(f);
    adaptive_sum += f;
    for (std::size_t k = 0; k < kLevels; ++k) {
      const PrecisionRecall s = precision_recall(pred->map, gt->mask, static_cast<double>(k) / 255.0);
      sum_p[k] += s.precision;
      sum_r[k] += s.recall;
    }
  }
  const auto n = static_cast<double>(pairs.size());
  out.adaptive_mean = adaptive_sum / n;
  for (std::size_t k = 0; k < kLevels; ++k) {
    const double f = f_measure(sum_p[k] / n, sum_r[k] / n, beta_sq);
    if (f > out.sweep_max) {
      out.sweep_max = f;
      out.sweep_argmax = k;
    }
  }
  return out;
}

double mae(const AttentionMap& s, const MaskMap& g) {
  if (s.rows() != g.rows() || s.cols() != g.cols()) {
    throw ShapeError("MAE: prediction " + shape_string(s.rows(), s.cols()) + " does not match mask " +
                     shape_string(g.rows(), g.cols()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) total += std::abs(g[i] - s[i]);
  return total / static_cast<double>(s.size());
}

double mae(const SaliencyPrediction& s, const GroundTruthMask& g) { return mae(s.map, g.mask); }

RankedPredictions::RankedPredictions(std::string class_id, std::vector<RankedItem> entries)
    : class_id_(std::move(class_id)), entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (!std::isfinite(e.score)) throw ValueError("ranking for class '" + class_id_ + "' has a non-finite score");
  }
  std::sort(entries_.begin(), entries_.end(), [](const RankedItem& a, const RankedItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item_id < b.item_id;
  });
}

std::size_t RankedPredictions::positives() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const RankedItem& e) { return e.is_positive; }));
}

std::optional<double> average_precision(const RankedPredictions& ranking) {
  std::vector<double> precision_at_hit;
  std::size_t hits = 0;
  const auto entries = ranking.entries();
  for (std::size_t rank = 0; rank < entries.size(); ++rank) {
    if (!entries[rank].is_positive) continue;
    ++hits;
    precision_at_hit.push_back(static_cast<double>(hits) / static_cast<double>(rank + 1));
  }
  if (precision_at_hit.empty()) return std::nullopt;
  // Interpolate: running maximum from the deepest recall level backwards.
  double best = 0.0;
  double total = 0.0;
  for (auto it = precision_at_hit.rbegin(); it != precision_at_hit.rend(); ++it) {
    best = std::max(best, *it);
    total += best;
  }
  return total / static_cast<double>(precision_at_hit.size());
}

MeanAveragePrecision mean_average_precision(std::span<const RankedPredictions> classes) {
  MeanAveragePrecision out;
  double total = 0.0;
  std::size_t scored = 0;
  for (const auto& c : classes) {
    if (const auto ap = average_precision(c)) {
      total += *ap;
      ++scored;
    } else {
      out.skipped_classes.push_back(c.class_id());
    }
  }
  if (scored == 0) throw ValueError("mAP needs at least one class with positives");
  out.value = total / static_cast<double>(scored);
  return out;
}

double accuracy(std::span<const LabeledPrediction> predictions) {
  if (predictions.empty()) throw ValueError("accuracy of an empty prediction set");
  const auto correct = std::count_if(predictions.begin(), predictions.end(),
                                     [](const LabeledPrediction& p) { return p.predicted == p.truth; });
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

int video_prediction(std::span<const std::vector<double>> frame_probs) {
  if (frame_probs.empty()) throw ValueError("video with no frames");
  const std::size_t classes = frame_probs.front().size();
  if (classes == 0) throw ValueError("frame probability vector is empty");
  std::vector<double> mean(classes, 0.0);
  for (const auto& frame : frame_probs) {
    if (frame.size() != classes) throw ShapeError("frames disagree on the number of classes");
    for (std::size_t k = 0; k < classes; ++k) mean[k] += frame[k];
  }
  // max_element returns the first maximum, i.e. the lowest class index.
  return static_cast<int>(std::max_element(mean.begin(), mean.end()) - mean.begin());
}

double fooling_rate(std::span<const LabelPair> pairs) {
  if (pairs.empty()) throw ValueError("fooling rate of an empty set");
  std::size_t changed = 0;
  for (const auto& p : pairs) {
    if (!p.perturbed_label) throw ValueError("item '" + p.item_id + "' has no perturbed label");
    changed += *p.perturbed_label != p.clean_label;
  }
  return static_cast<double>(changed) / static_cast<double>(pairs.size());
}

}  // namespace gazeattn
