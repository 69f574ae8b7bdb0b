#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gazeattn/tensor.hpp"

namespace gazeattn {

/// The five attention baselines.
enum class AttentionKind {
  activation_posthoc,  // implicit: channel statistics of |Z|^p, no trainable parameters
  softmax,             // implicit: softmax over all spatial cells
  sigmoid,             // implicit: per-cell sigmoid
  supervised,          // explicit: sigmoid attention trained with a KL term against gaze
  human,               // explicit: gaze density replaces the learned map
};

inline constexpr AttentionKind kAllAttentionKinds[] = {
    AttentionKind::activation_posthoc, AttentionKind::softmax, AttentionKind::sigmoid,
    AttentionKind::supervised, AttentionKind::human};

std::string_view to_string(AttentionKind kind) noexcept;
std::optional<AttentionKind> parse_attention_kind(std::string_view name);

/// True for the three baselines that learn attention from the task signal alone.
constexpr bool is_implicit(AttentionKind kind) noexcept {
  return kind == AttentionKind::activation_posthoc || kind == AttentionKind::softmax ||
         kind == AttentionKind::sigmoid;
}

struct AttentionConfig {
  AttentionKind kind = AttentionKind::sigmoid;
  double activation_exponent = 2.0;
  double supervision_weight = 0.01;
  double epsilon = 1e-9;

  /// Throws ValueError when p <= 0, lambda < 0 or epsilon <= 0.
  void validate() const;
};

/// A_i = exp(Y_i) / sum_j exp(Y_j), stabilised by subtracting max(Y).
AttentionMap softmax_attention(const SignificanceMap& y);

/// A_i = 1 / (1 + exp(-Y_i)), evaluated without overflow for either sign.
AttentionMap sigmoid_attention(const SignificanceMap& y);

/// A_raw[i,j] = sum_d |Z[i,j,d]|^p. Unnormalised.
SignificanceMap activation_attention(const FeatureMap& z, double p = 2.0);

/// Divides by the maximum; the zero map stays zero. Negative input is rejected.
AttentionMap normalize_to_unit(const SignificanceMap& a_raw);

struct HumanAttention {
  AttentionMap map;
  bool degenerate = false;  // density was all zero
};

/// Resamples a gaze density to the target grid and max-normalises it to [0, 1].
HumanAttention human_attention(const DensityMap& d, std::size_t rows, std::size_t cols);

/// KL(p || q) where p is the human density and q the attention map, both
/// shifted by `epsilon` and normalised to sum 1. The density is resampled to
/// the attention grid first when the shapes differ.
double attention_kl_loss(const AttentionMap& a, const DensityMap& h, double epsilon = 1e-9);

/// d KL(p || q) / d a_i for the loss above, on the attention grid.
std::vector<double> attention_kl_gradient(const AttentionMap& a, const DensityMap& h, double epsilon = 1e-9);

/// Shifts by `epsilon` and normalises to a probability distribution. Values
/// must be nonnegative.
std::vector<double> to_distribution(std::span<const double> values, double epsilon);

}  // namespace gazeattn
