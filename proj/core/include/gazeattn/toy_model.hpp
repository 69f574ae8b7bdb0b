#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazeattn/attention.hpp"
#include "gazeattn/gaze_metrics.hpp"
#include "gazeattn/tensor.hpp"

namespace gazeattn {

/// Where the attention module sits: directly on the conv features ("early")
/// or after an extra 2x2 average-pooling stage ("late").
enum class Fusion { early, late };

std::string_view to_string(Fusion fusion) noexcept;
std::optional<Fusion> parse_fusion(std::string_view name);

struct ModelShape {
  std::size_t rows = 16;
  std::size_t cols = 16;
  std::size_t input_channels = 5;
  std::size_t feature_channels = 32;
  std::size_t num_classes = 4;
  Fusion fusion = Fusion::late;

  std::size_t attention_channels() const noexcept { return feature_channels / 2 > 0 ? feature_channels / 2 : 1; }
  std::size_t attention_rows() const noexcept { return fusion == Fusion::late ? rows / 2 : rows; }
  std::size_t attention_cols() const noexcept { return fusion == Fusion::late ? cols / 2 : cols; }

  void validate() const;
  bool operator==(const ModelShape&) const = default;
};

/// Parameters of the attentive classifier:
///
///   image -> conv3x3(D) -> ReLU -> Z [-> avgpool2x2 when late]
///   attention branch: conv3x3(D/2) -> ReLU -> conv1x1(1) -> sigmoid | softmax
///   glimpse G = A * Z -> spatial mean -> linear -> softmax
///
/// Conv weights are laid out [ky][kx][in][out]; classifier weights [in][out].
/// The feature conv is frozen: gradients are computed for it but never applied.
struct ModelParams {
  ModelShape shape;
  std::vector<double> feature_w, feature_b;
  std::vector<double> attn1_w, attn1_b;
  std::vector<double> attn2_w, attn2_b;
  std::vector<double> classifier_w, classifier_b;

  /// Zero tensors of the right sizes.
  static ModelParams zeros(const ModelShape& shape);
  bool operator==(const ModelParams&) const = default;
};

struct ParamGroup {
  const char* name;
  std::vector<double> ModelParams::*member;
  bool frozen;
};

inline constexpr std::array<ParamGroup, 8> kParamGroups{{
    {"feature_conv.weight", &ModelParams::feature_w, true},
    {"feature_conv.bias", &ModelParams::feature_b, true},
    {"attn_conv1.weight", &ModelParams::attn1_w, false},
    {"attn_conv1.bias", &ModelParams::attn1_b, false},
    {"attn_conv2.weight", &ModelParams::attn2_w, false},
    {"attn_conv2.bias", &ModelParams::attn2_b, false},
    {"classifier.weight", &ModelParams::classifier_w, false},
    {"classifier.bias", &ModelParams::classifier_b, false},
}};

/// True when `group` influences the output of baseline `kind`.
bool group_is_used(const ParamGroup& group, AttentionKind kind) noexcept;

/// Initial bias of the final attention conv (sigmoid(4) ~ 0.982).
inline constexpr double kInitialGateBias = 4.0;

/// Seeded He-style initialisation; attention output bias starts at kInitialGateBias.
ModelParams init_params(const ModelShape& shape, std::uint64_t seed);

/// One labelled image with its human gaze.
struct Sample {
  std::string id;
  FeatureMap image;
  int label = 0;
  DensityMap gaze_density;
  FixationSet gaze_fixations;
};

struct ForwardResult {
  std::vector<double> logits;
  std::vector<double> probs;
  AttentionMap attention = AttentionMap::filled(1, 1, 1.0);  // applied map (activation: post hoc)
  FeatureMap features;     // Z at attention resolution, before attention

  // Intermediates kept for backward.
  std::vector<double> feature_pre;  // conv output before ReLU, full resolution
  std::vector<double> attn_pre;     // attention conv1 output before ReLU
  std::vector<double> significance; // Y
  std::vector<double> pooled;       // mean of the glimpse per channel
  bool attention_applied = false;
};

/// Forward pass. `gaze` is required by the human baseline.
ForwardResult forward(const ModelParams& params, const FeatureMap& image, const AttentionConfig& config,
                      const DensityMap* gaze = nullptr);

int predict(const ModelParams& params, const FeatureMap& image, const AttentionConfig& config,
            const DensityMap* gaze = nullptr);

struct LossParts {
  double total = 0.0;
  double ce = 0.0;
  double kl = 0.0;
};

inline constexpr double kProbabilityFloor = 1e-12;

/// Cross-entropy plus lambda * KL(gaze || attention); pass lambda = 0 for
/// unsupervised baselines.
LossParts loss(std::span<const double> probs, int label, const AttentionMap& attention, const DensityMap* gaze,
               double lambda, double epsilon = 1e-9);

/// Loss of one sample under `config` (the KL term only for the supervised baseline).
LossParts sample_loss(const ModelParams& params, const Sample& sample, const AttentionConfig& config,
                      bool include_supervision = true);

struct Gradients {
  ModelParams params;  // same layout as the model, frozen groups included
  FeatureMap input;
  LossParts loss;
  std::vector<double> probs;
};

/// Exact analytic gradients of `sample_loss` by reverse-mode chain rule.
Gradients backward(const ModelParams& params, const Sample& sample, const AttentionConfig& config,
                   bool include_supervision = true);

enum class OptimizerKind { plain_gd, adam };

struct TrainConfig {
  AttentionConfig attention;
  double learning_rate = 0.1;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t steps = 200;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LossRecord {
  std::size_t step = 0;
  double total = 0.0;
  double ce = 0.0;
  double kl = 0.0;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  std::size_t last_step = 0;
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<LossRecord> trace;  // batch-mean loss before each update
  std::vector<EpochMetrics> epochs;
  std::size_t steps = 0;
};

/// Seeded minibatch training. Throws DivergenceError on a non-finite loss.
TrainResult train(ModelParams initial, std::span<const Sample> dataset, const TrainConfig& config);

/// Writes "step,total_loss,ce_loss,kl_loss" CSV.
void write_loss_trace(std::ostream& out, std::span<const LossRecord> trace);

/// Versioned text checkpoint; values round-trip exactly.
void save_checkpoint(std::ostream& out, const ModelParams& params, AttentionKind kind, std::size_t steps);

struct Checkpoint {
  ModelParams params;
  AttentionKind kind = AttentionKind::sigmoid;
  std::size_t steps = 0;
};

Checkpoint load_checkpoint(std::istream& in, const std::string& source = "checkpoint");

struct GroupCheck {
  std::string name;
  std::size_t entries = 0;
  double max_relative_error = 0.0;
};

struct GradCheckReport {
  std::vector<GroupCheck> groups;  // one per (baseline, group) plus the input
  double max_relative_error = 0.0;
};

/// Compares analytic gradients with central finite differences of step `h`.
/// Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckReport gradient_check(const ModelParams& params, std::span<const Sample> samples,
                               const AttentionConfig& config, double h = 1e-5, double floor = 1e-6);

}  // namespace gazeattn
