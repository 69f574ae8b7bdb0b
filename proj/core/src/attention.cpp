#include "gazeattn/attention.hpp"

#include <algorithm>
#include <cmath>

namespace gazeattn {

std::string_view to_string(AttentionKind kind) noexcept {
  switch (kind) {
    case AttentionKind::activation_posthoc: return "activation";
    case AttentionKind::softmax: return "softmax";
    case AttentionKind::sigmoid: return "sigmoid";
    case AttentionKind::supervised: return "supervised";
    case AttentionKind::human: return "human";
  }
  return "unknown";
}

std::optional<AttentionKind> parse_attention_kind(std::string_view name) {
  for (AttentionKind k : kAllAttentionKinds) {
    if (to_string(k) == name) return k;
  }
  if (name == "activation_posthoc") return AttentionKind::activation_posthoc;
  return std::nullopt;
}

void AttentionConfig::validate() const {
  if (!(activation_exponent > 0.0)) throw ValueError("activation exponent must be positive");
  if (!(supervision_weight >= 0.0)) throw ValueError("supervision weight must be nonnegative");
  if (!(epsilon > 0.0)) throw ValueError("normalisation epsilon must be positive");
}

AttentionMap softmax_attention(const SignificanceMap& y) {
  const auto v = y.values();
  const double peak = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - peak);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return AttentionMap(y.rows(), y.cols(), std::move(out));
}

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

AttentionMap sigmoid_attention(const SignificanceMap& y) {
  std::vector<double> out(y.size());
  std::transform(y.values().begin(), y.values().end(), out.begin(), sigmoid);
  return AttentionMap(y.rows(), y.cols(), std::move(out));
}

SignificanceMap activation_attention(const FeatureMap& z, double p) {
  if (!(p > 0.0)) throw ValueError("activation exponent must be positive");
  const std::size_t channels = z.channels();
  const auto v = z.values();
  std::vector<double> out(z.rows() * z.cols(), 0.0);
  for (std::size_t cell = 0; cell < out.size(); ++cell) {
    double sum = 0.0;
    for (std::size_t d = 0; d < channels; ++d) {
      const double a = std::abs(v[cell * channels + d]);
      sum += p == 2.0 ? a * a : std::pow(a, p);
    }
    out[cell] = sum;
  }
  return SignificanceMap(z.rows(), z.cols(), std::move(out));
}

AttentionMap normalize_to_unit(const SignificanceMap& a_raw) {
  const auto v = a_raw.values();
  double peak = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) {
      throw ValueError("normalize_to_unit: negative value at cell " + std::to_string(i));
    }
    peak = std::max(peak, v[i]);
  }
  std::vector<double> out(v.size(), 0.0);
  if (peak > 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::min(v[i] / peak, 1.0);
  }
  return AttentionMap(a_raw.rows(), a_raw.cols(), std::move(out));
}

HumanAttention human_attention(const DensityMap& d, std::size_t rows, std::size_t cols) {
  const DensityMap resized = resample_map(d, rows, cols);
  const auto v = resized.values();
  const double peak = *std::max_element(v.begin(), v.end());
  if (peak <= 0.0) return {AttentionMap::filled(rows, cols, 0.0), true};
  if (peak == 1.0) return {map_cast<AttentionMap>(resized), false};
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / peak;
  return {AttentionMap(rows, cols, std::move(out)), false};
}

std::vector<double> to_distribution(std::span<const double> values, double epsilon) {
  std::vector<double> out(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) throw ValueError("cannot form a distribution from a negative value");
    out[i] = values[i] + epsilon;
    total += out[i];
  }
  if (!(total > 0.0)) throw ValueError("cannot form a distribution from an all-zero map");
  for (double& x : out) x /= total;
  return out;
}

namespace {

DensityMap align(const DensityMap& h, const AttentionMap& a) { return resample_map(h, a.rows(), a.cols()); }

}  // namespace

double attention_kl_loss(const AttentionMap& a, const DensityMap& h, double epsilon) {
  const DensityMap hd = align(h, a);
  const auto p = to_distribution(hd.values(), epsilon);
  const auto q = to_distribution(a.values(), epsilon);
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) kl += p[i] * std::log(p[i] / q[i]);
  return std::max(kl, 0.0);
}

std::vector<double> attention_kl_gradient(const AttentionMap& a, const DensityMap& h, double epsilon) {
  // q_i = (a_i + eps) / S with S = sum_j (a_j + eps), so
  // dKL/da_k = -p_k / (a_k + eps) + 1 / S.
  const DensityMap hd = align(h, a);
  const auto p = to_distribution(hd.values(), epsilon);
  const auto av = a.values();
  double shifted_total = 0.0;
  for (double x : av) shifted_total += x + epsilon;
  std::vector<double> grad(av.size());
  for (std::size_t k = 0; k < av.size(); ++k) grad[k] = 1.0 / shifted_total - p[k] / (av[k] + epsilon);
  return grad;
}

}  // namespace gazeattn
