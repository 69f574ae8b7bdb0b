#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazeattn/adversarial.hpp"
#include "gazeattn/gaze_metrics.hpp"
#include "gazeattn/manifest.hpp"
#include "gazeattn/report.hpp"
#include "gazeattn/task_metrics.hpp"
#include "gazeattn/toy_model.hpp"

namespace gazeattn {

struct FoldSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
};

/// Seeded shuffle, then k contiguous folds; the first |ids| mod k folds get
/// one extra id. Each fold is the validation set once.
std::vector<FoldSplit> kfold_split(std::span<const std::string> ids, std::size_t k = 5, std::uint64_t seed = 0);

/// One (image, baseline) evaluation.
struct EvalRecord {
  std::string image_id;
  AttentionKind kind = AttentionKind::sigmoid;
  AttentionMap attention = AttentionMap::filled(1, 1, 0.0);  // on the fixation grid
  std::optional<double> task_score;      // ranking key for top/bottom-k
  std::optional<bool> correct;           // grouping key for positive/negative
  std::map<std::string, double> scores;  // metric -> value; absent means unscorable
};

enum class GroupMode { top_bottom_k, positive_negative };
enum class WithinGroup { vs_human, pairwise_pseudo };

struct GroupingSpec {
  GroupMode mode = GroupMode::top_bottom_k;
  WithinGroup protocol = WithinGroup::vs_human;
  std::size_t k = 10;
  double top_fraction = 0.05;
  ShuffleSpec shuffle;
  double ig_epsilon = 1e-9;
  double blur_sigma = -1.0;  // < 0 selects default_blur_sigma

  void validate() const;
  /// Human-readable label recorded in every table's metadata.
  std::string interpretation() const;
};

struct RecordGroup {
  std::string name;
  std::vector<const EvalRecord*> members;
};

/// Groups one baseline's records. Top/bottom-k ranks by task score
/// descending, ties by image id ascending; when 2k exceeds the record count
/// both groups shrink to floor(n / 2) and a warning is appended.
std::vector<RecordGroup> assign_groups(std::span<const EvalRecord> records, const GroupingSpec& spec,
                                       std::vector<std::string>* warnings = nullptr);

struct GroupScores {
  std::optional<double> s_auc;
  std::optional<double> info_gain;
  std::optional<double> s_auc_symmetric;  // pairwise mode only
  std::optional<double> info_gain_symmetric;
  std::size_t scored = 0;                 // items or ordered pairs that produced a score
  std::vector<double> pair_s_auc;         // pairwise mode, ordered pairs (i, j), i != j, row-major
};

/// Fixations and shuffled-baseline context for scoring.
class GazeContext {
 public:
  GazeContext(std::span<const FixationSet> fixations, std::span<const FixationSet> others, double blur_sigma);

  const FixationSet* fixations_for(const std::string& image_id) const;
  std::span<const FixationSet> others() const noexcept { return others_; }
  /// Shuffled baseline built from `others` minus the given image, cached.
  const DensityMap& baseline_excluding(const std::string& image_id, std::size_t rows, std::size_t cols);

 private:
  std::map<std::string, const FixationSet*> by_id_;
  std::span<const FixationSet> others_;
  double blur_sigma_;
  std::map<std::string, DensityMap> cache_;
};

GroupScores score_group(const RecordGroup& group, GazeContext& context, const GroupingSpec& spec);

/// One row per baseline present in `records`, columns group x metric.
/// `fixations` are the human fixations of the recorded images; `others` is
/// the pool for shuffled negatives and IG baselines.
ReportTable correlation_table(std::span<const EvalRecord> records, std::span<const FixationSet> fixations,
                              std::span<const FixationSet> others, const GroupingSpec& spec);

/// In-memory benchmark input.
struct BenchmarkData {
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::map<std::string, MaskMap> masks;  // optional ground truth by image id
  std::size_t num_classes = 0;
};

/// Loads images, labels, gaze and masks. Entries without an image or label
/// are skipped with a warning. Without split tags the first of five seeded
/// folds is the test set.
BenchmarkData load_benchmark_data(const Manifest& manifest, std::vector<std::string>* warnings = nullptr);

struct BenchmarkConfig {
  std::vector<AttentionKind> baselines{std::begin(kAllAttentionKinds), std::end(kAllAttentionKinds)};
  TrainConfig train;  // attention.kind is set per baseline
  std::size_t feature_channels = 32;
  Fusion fusion = Fusion::late;
  std::optional<double> fgsm_epsilon;
  std::size_t k = 10;
  double top_fraction = 0.05;
  ShuffleSpec shuffle;
  double ig_epsilon = 1e-9;
  double beta_sq = 0.3;
  std::size_t jobs = 1;
  std::map<AttentionKind, Checkpoint> pretrained;  // skip training for these

  /// Stable text form hashed into report metadata.
  std::string canonical() const;
};

struct BaselineRun {
  AttentionKind kind = AttentionKind::sigmoid;
  TrainedBaseline model;
  std::vector<LossRecord> trace;
  double initial_loss = 0.0;  // mean over the training split
  double final_loss = 0.0;
  double test_accuracy = 0.0;
  std::vector<EvalRecord> records;
  std::vector<std::vector<double>> test_probs;
};

struct BenchmarkResult {
  std::vector<BaselineRun> runs;
  std::vector<ReportTable> tables;
  std::vector<RobustnessRow> robustness;
  std::vector<std::string> warnings;

  const BaselineRun* run(AttentionKind kind) const;
};

/// Trains (or loads) every baseline, evaluates task, gaze and grouped
/// metrics and optional FGSM robustness, and assembles the report tables.
BenchmarkResult run_benchmark(const BenchmarkData& data, const BenchmarkConfig& config);

}  // namespace gazeattn
