#include "gazeattn/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gazeattn/random.hpp"

namespace gazeattn {

std::string_view to_string(Fusion fusion) noexcept { return fusion == Fusion::late ? "late" : "early"; }

std::optional<Fusion> parse_fusion(std::string_view name) {
  if (name == "early") return Fusion::early;
  if (name == "late") return Fusion::late;
  return std::nullopt;
}

void ModelShape::validate() const {
  if (rows == 0 || cols == 0 || input_channels == 0 || feature_channels == 0) {
    throw ShapeError("model dimensions must be positive");
  }
  if (num_classes < 2) throw ShapeError("model needs at least two classes");
  if (fusion == Fusion::late && (rows % 2 != 0 || cols % 2 != 0 || rows < 2 || cols < 2)) {
    throw ShapeError("late fusion pools 2x2 and needs even grid dimensions");
  }
}

ModelParams ModelParams::zeros(const ModelShape& s) {
  s.validate();
  const std::size_t d = s.feature_channels;
  const std::size_t h = s.attention_channels();
  ModelParams p;
  p.shape = s;
  p.feature_w.assign(9 * s.input_channels * d, 0.0);
  p.feature_b.assign(d, 0.0);
  p.attn1_w.assign(9 * d * h, 0.0);
  p.attn1_b.assign(h, 0.0);
  p.attn2_w.assign(h, 0.0);
  p.attn2_b.assign(1, 0.0);
  p.classifier_w.assign(d * s.num_classes, 0.0);
  p.classifier_b.assign(s.num_classes, 0.0);
  return p;
}

bool group_is_used(const ParamGroup& group, AttentionKind kind) noexcept {
  const bool attention_group = group.member == &ModelParams::attn1_w || group.member == &ModelParams::attn1_b ||
                               group.member == &ModelParams::attn2_w || group.member == &ModelParams::attn2_b;
  if (!attention_group) return true;
  return kind == AttentionKind::softmax || kind == AttentionKind::sigmoid || kind == AttentionKind::supervised;
}

ModelParams init_params(const ModelShape& shape, std::uint64_t seed) {
  ModelParams p = ModelParams::zeros(shape);
  Rng rng(seed);
  auto fill = [&rng](std::vector<double>& w, std::size_t fan_in) {
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& x : w) x = rng.normal(0.0, scale);
  };
  fill(p.feature_w, 9 * shape.input_channels);
  for (double& b : p.feature_b) b = rng.normal(0.0, 0.05);
  fill(p.attn1_w, 9 * shape.feature_channels);
  fill(p.attn2_w, shape.attention_channels());
  fill(p.classifier_w, shape.feature_channels);
  // Start the gate open; a closed sigmoid gate starves the classifier.
  p.attn2_b[0] = kInitialGateBias;
  return p;
}

namespace {

struct Dims {
  std::size_t rows, cols, channels;
};

// Zero-padded "same" convolution with a square kernel of odd size k.
void conv_forward(std::span<const double> in, Dims d, std::span<const double> w, std::span<const double> b,
                  std::size_t k, std::size_t out_ch, std::span<double> out) {
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  for (std::size_t r = 0; r < d.rows; ++r) {
    for (std::size_t c = 0; c < d.cols; ++c) {
      double* o = &out[(r * d.cols + c) * out_ch];
      std::copy(b.begin(), b.end(), o);
      for (std::size_t ky = 0; ky < k; ++ky) {
        const auto rr = static_cast<std::ptrdiff_t>(r + ky) - pad;
        if (rr < 0 || rr >= static_cast<std::ptrdiff_t>(d.rows)) continue;
        for (std::size_t kx = 0; kx < k; ++kx) {
          const auto cc = static_cast<std::ptrdiff_t>(c + kx) - pad;
          if (cc < 0 || cc >= static_cast<std::ptrdiff_t>(d.cols)) continue;
          const double* x = &in[(static_cast<std::size_t>(rr) * d.cols + static_cast<std::size_t>(cc)) * d.channels];
          const double* wk = &w[(ky * k + kx) * d.channels * out_ch];
          for (std::size_t i = 0; i < d.channels; ++i) {
            const double xi = x[i];
            const double* wi = wk + i * out_ch;
            for (std::size_t o_ch = 0; o_ch < out_ch; ++o_ch) o[o_ch] += xi * wi[o_ch];
          }
        }
      }
    }
  }
}

// Accumulates dW, dB and (when din is non-empty) dIn for conv_forward.
void conv_backward(std::span<const double> in, Dims d, std::span<const double> w, std::size_t k, std::size_t out_ch,
                   std::span<const double> dout, std::span<double> dw, std::span<double> db, std::span<double> din) {
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  for (std::size_t r = 0; r < d.rows; ++r) {
    for (std::size_t c = 0; c < d.cols; ++c) {
      const double* g = &dout[(r * d.cols + c) * out_ch];
      for (std::size_t o_ch = 0; o_ch < out_ch; ++o_ch) db[o_ch] += g[o_ch];
      for (std::size_t ky = 0; ky < k; ++ky) {
        const auto rr = static_cast<std::ptrdiff_t>(r + ky) - pad;
        if (rr < 0 || rr >= static_cast<std::ptrdiff_t>(d.rows)) continue;
        for (std::size_t kx = 0; kx < k; ++kx) {
          const auto cc = static_cast<std::ptrdiff_t>(c + kx) - pad;
          if (cc < 0 || cc >= static_cast<std::ptrdiff_t>(d.cols)) continue;
          const std::size_t x_off = (static_cast<std::size_t>(rr) * d.cols + static_cast<std::size_t>(cc)) * d.channels;
          const std::size_t w_off = (ky * k + kx) * d.channels * out_ch;
          for (std::size_t i = 0; i < d.channels; ++i) {
            const double xi = in[x_off + i];
            double acc = 0.0;
            for (std::size_t o_ch = 0; o_ch < out_ch; ++o_ch) {
              dw[w_off + i * out_ch + o_ch] += xi * g[o_ch];
              acc += w[w_off + i * out_ch + o_ch] * g[o_ch];
            }
            if (!din.empty()) din[x_off + i] += acc;
          }
        }
      }
    }
  }
}

std::vector<double> avg_pool2(std::span<const double> in, Dims d) {
  const std::size_t rows = d.rows / 2, cols = d.cols / 2;
  std::vector<double> out(rows * cols * d.channels, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      for (std::size_t ch = 0; ch < d.channels; ++ch) {
        double s = 0.0;
        for (std::size_t dy = 0; dy < 2; ++dy)
          for (std::size_t dx = 0; dx < 2; ++dx) s += in[((2 * r + dy) * d.cols + 2 * c + dx) * d.channels + ch];
        out[(r * cols + c) * d.channels + ch] = 0.25 * s;
      }
  return out;
}

std::vector<double> avg_pool2_backward(std::span<const double> dout, Dims full) {
  const std::size_t cols = full.cols / 2;
  std::vector<double> din(full.rows * full.cols * full.channels);
  for (std::size_t r = 0; r < full.rows; ++r)
    for (std::size_t c = 0; c < full.cols; ++c)
      for (std::size_t ch = 0; ch < full.channels; ++ch)
        din[(r * full.cols + c) * full.channels + ch] = 0.25 * dout[((r / 2) * cols + c / 2) * full.channels + ch];
  return din;
}

std::vector<double> softmax(std::span<const double> x) {
  const double peak = *std::max_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += out[i] = std::exp(x[i] - peak);
  for (double& v : out) v /= total;
  return out;
}

bool learns_attention(AttentionKind kind) {
  return kind == AttentionKind::softmax || kind == AttentionKind::sigmoid || kind == AttentionKind::supervised;
}

}  // namespace

ForwardResult forward(const ModelParams& params, const FeatureMap& image, const AttentionConfig& config,
                      const DensityMap* gaze) {
  const ModelShape& s = params.shape;
  if (image.rows() != s.rows || image.cols() != s.cols || image.channels() != s.input_channels) {
    throw ShapeError("image " + shape_string(image.rows(), image.cols()) + "x" + std::to_string(image.channels()) +
                     " does not match model input " + shape_string(s.rows, s.cols) + "x" +
                     std::to_string(s.input_channels));
  }
  const std::size_t d = s.feature_channels;
  const Dims in_dims{s.rows, s.cols, s.input_channels};
  const Dims full{s.rows, s.cols, d};
  const Dims att{s.attention_rows(), s.attention_cols(), d};
  const std::size_t cells = att.rows * att.cols;

  ForwardResult fr;
  fr.attention = AttentionMap::filled(att.rows, att.cols, 1.0);
  fr.feature_pre.assign(s.rows * s.cols * d, 0.0);
  conv_forward(image.values(), in_dims, params.feature_w, params.feature_b, 3, d, fr.feature_pre);
  std::vector<double> z(fr.feature_pre.size());
  std::transform(fr.feature_pre.begin(), fr.feature_pre.end(), z.begin(), [](double v) { return v > 0.0 ? v : 0.0; });
  if (s.fusion == Fusion::late) z = avg_pool2(z, full);
  fr.features = FeatureMap(att.rows, att.cols, d, std::move(z));

  switch (config.kind) {
    case AttentionKind::softmax:
    case AttentionKind::sigmoid:
    case AttentionKind::supervised: {
      const std::size_t h = s.attention_channels();
      fr.attn_pre.assign(cells * h, 0.0);
      conv_forward(fr.features.values(), att, params.attn1_w, params.attn1_b, 3, h, fr.attn_pre);
      fr.significance.assign(cells, params.attn2_b[0]);
      for (std::size_t cell = 0; cell < cells; ++cell)
        for (std::size_t j = 0; j < h; ++j) {
          const double v = fr.attn_pre[cell * h + j];
          if (v > 0.0) fr.significance[cell] += params.attn2_w[j] * v;
        }
      const SignificanceMap y(att.rows, att.cols, fr.significance);
      fr.attention = config.kind == AttentionKind::softmax ? softmax_attention(y) : sigmoid_attention(y);
      fr.attention_applied = true;
      break;
    }
    case AttentionKind::human: {
      if (gaze == nullptr) throw ValueError("the human baseline needs a gaze density for every image");
      fr.attention = human_attention(*gaze, att.rows, att.cols).map;
      fr.attention_applied = true;
      break;
    }
    case AttentionKind::activation_posthoc:
      fr.attention = normalize_to_unit(activation_attention(fr.features, config.activation_exponent));
      break;
  }

  fr.pooled.assign(d, 0.0);
  const auto zv = fr.features.values();
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const double a = fr.attention_applied ? fr.attention[cell] : 1.0;
    for (std::size_t ch = 0; ch < d; ++ch) fr.pooled[ch] += a * zv[cell * d + ch];
  }
  for (double& v : fr.pooled) v /= static_cast<double>(cells);

  const std::size_t classes = s.num_classes;
  fr.logits.assign(params.classifier_b.begin(), params.classifier_b.end());
  for (std::size_t ch = 0; ch < d; ++ch)
    for (std::size_t k = 0; k < classes; ++k) fr.logits[k] += fr.pooled[ch] * params.classifier_w[ch * classes + k];
  fr.probs = softmax(fr.logits);
  return fr;
}

int predict(const ModelParams& params, const FeatureMap& image, const AttentionConfig& config,
            const DensityMap* gaze) {
  const auto fr = forward(params, image, config, gaze);
  return static_cast<int>(std::max_element(fr.probs.begin(), fr.probs.end()) - fr.probs.begin());
}

LossParts loss(std::span<const double> probs, int label, const AttentionMap& attention, const DensityMap* gaze,
               double lambda, double epsilon) {
  if (label < 0 || static_cast<std::size_t>(label) >= probs.size()) {
    throw ValueError("label " + std::to_string(label) + " outside [0, " + std::to_string(probs.size()) + ")");
  }
  LossParts parts;
  parts.ce = -std::log(std::max(probs[static_cast<std::size_t>(label)], kProbabilityFloor));
  if (lambda > 0.0) {
    if (gaze == nullptr) throw ValueError("attention supervision needs a gaze density");
    parts.kl = attention_kl_loss(attention, *gaze, epsilon);
  }
  parts.total = parts.ce + lambda * parts.kl;
  return parts;
}

namespace {

double effective_lambda(const AttentionConfig& config, bool include_supervision) {
  return include_supervision && config.kind == AttentionKind::supervised ? config.supervision_weight : 0.0;
}

}  // namespace

LossParts sample_loss(const ModelParams& params, const Sample& sample, const AttentionConfig& config,
                      bool include_supervision) {
  const auto fr = forward(params, sample.image, config, &sample.gaze_density);
  return loss(fr.probs, sample.label, fr.attention, &sample.gaze_density,
              effective_lambda(config, include_supervision), config.epsilon);
}

Gradients backward(const ModelParams& params, const Sample& sample, const AttentionConfig& config,
                   bool include_supervision) {
  const ModelShape& s = params.shape;
  const auto fr = forward(params, sample.image, config, &sample.gaze_density);
  const double lambda = effective_lambda(config, include_supervision);

  Gradients g{.params = ModelParams::zeros(s),
              .input = FeatureMap::zeros(s.rows, s.cols, s.input_channels),
              .loss = loss(fr.probs, sample.label, fr.attention, &sample.gaze_density, lambda, config.epsilon),
              .probs = fr.probs};

  const std::size_t d = s.feature_channels;
  const std::size_t classes = s.num_classes;
  const Dims in_dims{s.rows, s.cols, s.input_channels};
  const Dims full{s.rows, s.cols, d};
  const Dims att{s.attention_rows(), s.attention_cols(), d};
  const std::size_t cells = att.rows * att.cols;
  const auto label = static_cast<std::size_t>(sample.label);

  // Cross-entropy through softmax; the floored region is flat.
  std::vector<double> dlogits(classes, 0.0);
  if (fr.probs[label] > kProbabilityFloor) {
    dlogits = fr.probs;
    dlogits[label] -= 1.0;
  }

  std::vector<double> dpooled(d, 0.0);
  for (std::size_t ch = 0; ch < d; ++ch)
    for (std::size_t k = 0; k < classes; ++k) {
      g.params.classifier_w[ch * classes + k] = fr.pooled[ch] * dlogits[k];
      dpooled[ch] += params.classifier_w[ch * classes + k] * dlogits[k];
    }
  g.params.classifier_b = dlogits;

  const auto zv = fr.features.values();
  std::vector<double> dz(cells * d);
  std::vector<double> da(cells, 0.0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const double a = fr.attention_applied ? fr.attention[cell] : 1.0;
    for (std::size_t ch = 0; ch < d; ++ch) {
      const double dg = dpooled[ch] / static_cast<double>(cells);
      dz[cell * d + ch] = dg * a;
      da[cell] += dg * zv[cell * d + ch];
    }
  }

  if (learns_attention(config.kind)) {
    if (lambda > 0.0) {
      const auto kl_grad = attention_kl_gradient(fr.attention, sample.gaze_density, config.epsilon);
      for (std::size_t cell = 0; cell < cells; ++cell) da[cell] += lambda * kl_grad[cell];
    }
    std::vector<double> dy(cells);
    if (config.kind == AttentionKind::softmax) {
      double inner = 0.0;
      for (std::size_t cell = 0; cell < cells; ++cell) inner += fr.attention[cell] * da[cell];
      for (std::size_t cell = 0; cell < cells; ++cell) dy[cell] = fr.attention[cell] * (da[cell] - inner);
    } else {
      for (std::size_t cell = 0; cell < cells; ++cell) {
        const double a = fr.attention[cell];
        dy[cell] = da[cell] * a * (1.0 - a);
      }
    }

    const std::size_t h = s.attention_channels();
    std::vector<double> du(cells * h, 0.0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
      g.params.attn2_b[0] += dy[cell];
      for (std::size_t j = 0; j < h; ++j) {
        const double pre = fr.attn_pre[cell * h + j];
        if (pre > 0.0) {
          g.params.attn2_w[j] += dy[cell] * pre;
          du[cell * h + j] = dy[cell] * params.attn2_w[j];
        }
      }
    }
    conv_backward(fr.features.values(), att, params.attn1_w, 3, h, du, g.params.attn1_w, g.params.attn1_b, dz);
  }

  std::vector<double> dfull = s.fusion == Fusion::late ? avg_pool2_backward(dz, full) : std::move(dz);
  for (std::size_t i = 0; i < dfull.size(); ++i) {
    if (!(fr.feature_pre[i] > 0.0)) dfull[i] = 0.0;
  }
  conv_backward(sample.image.values(), in_dims, params.feature_w, 3, d, dfull, g.params.feature_w,
                g.params.feature_b, g.input.values());
  return g;
}

void TrainConfig::validate() const {
  attention.validate();
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ValueError("learning rate must be >= 0");
  if (steps == 0) throw ValueError("training needs at least one step");
  if (batch_size == 0) throw ValueError("batch size must be positive");
  if (optimizer == OptimizerKind::adam && !(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && adam_epsilon > 0.0)) {
    throw ValueError("invalid Adam hyperparameters");
  }
}

namespace {

bool all_finite(const ModelParams& p) {
  for (const auto& group : kParamGroups) {
    for (double v : p.*group.member)
      if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

TrainResult train(ModelParams initial, std::span<const Sample> dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw ValueError("training set is empty");

  TrainResult result{.params = std::move(initial), .trace = {}, .epochs = {}};
  ModelParams& params = result.params;
  ModelParams first_moment = ModelParams::zeros(params.shape);
  ModelParams second_moment = ModelParams::zeros(params.shape);

  Rng rng(config.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());
  std::size_t cursor = 0;
  const std::size_t batch = std::min(config.batch_size, dataset.size());

  EpochMetrics epoch{};
  std::size_t epoch_samples = 0, epoch_correct = 0;
  double epoch_loss = 0.0;
  auto close_epoch = [&](std::size_t step) {
    if (epoch_samples == 0) return;
    epoch.last_step = step;
    epoch.mean_loss = epoch_loss / static_cast<double>(epoch_samples);
    epoch.accuracy = static_cast<double>(epoch_correct) / static_cast<double>(epoch_samples);
    result.epochs.push_back(epoch);
    ++epoch.epoch;
    epoch_samples = epoch_correct = 0;
    epoch_loss = 0.0;
  };

  for (std::size_t step = 1; step <= config.steps; ++step) {
    ModelParams grad = ModelParams::zeros(params.shape);
    LossRecord record{.step = step};
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        close_epoch(step - 1);
        rng.shuffle(order.begin(), order.end());
        cursor = 0;
      }
      const Sample& sample = dataset[order[cursor++]];
      const Gradients g = backward(params, sample, config.attention);
      for (const auto& group : kParamGroups) {
        auto& acc = grad.*group.member;
        const auto& src = g.params.*group.member;
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += src[i];
      }
      record.total += g.loss.total;
      record.ce += g.loss.ce;
      record.kl += g.loss.kl;
      epoch_loss += g.loss.total;
      ++epoch_samples;
      const auto top = std::max_element(g.probs.begin(), g.probs.end()) - g.probs.begin();
      epoch_correct += top == sample.label;
    }
    const auto n = static_cast<double>(batch);
    record.total /= n;
    record.ce /= n;
    record.kl /= n;
    if (!std::isfinite(record.total)) throw DivergenceError(step, "non-finite loss " + std::to_string(record.total));
    result.trace.push_back(record);

    for (const auto& group : kParamGroups) {
      if (group.frozen) continue;
      auto& p = params.*group.member;
      const auto& gsum = grad.*group.member;
      auto& m = first_moment.*group.member;
      auto& v = second_moment.*group.member;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = gsum[i] / n;
        if (config.optimizer == OptimizerKind::plain_gd) {
          p[i] -= config.learning_rate * gi;
          continue;
        }
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * gi;
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * gi * gi;
        const double m_hat = m[i] / (1.0 - std::pow(config.beta1, static_cast<double>(step)));
        const double v_hat = v[i] / (1.0 - std::pow(config.beta2, static_cast<double>(step)));
        p[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
      }
    }
    if (!all_finite(params)) throw DivergenceError(step, "non-finite parameter after update");
    result.steps = step;
  }
  close_epoch(config.steps);
  return result;
}

GradCheckReport gradient_check(const ModelParams& params, std::span<const Sample> samples,
                               const AttentionConfig& config, double h, double floor) {
  GradCheckReport report;
  auto rel = [floor](double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor}); };
  const std::string prefix = std::string(to_string(config.kind)) + "/";

  std::vector<GroupCheck> groups;
  for (const auto& group : kParamGroups) {
    if (group_is_used(group, config.kind)) groups.push_back({prefix + group.name, 0, 0.0});
  }
  groups.push_back({prefix + "input", 0, 0.0});

  for (const Sample& sample : samples) {
    const Gradients analytic = backward(params, sample, config);
    std::size_t slot = 0;
    ModelParams probe = params;
    for (const auto& group : kParamGroups) {
      if (!group_is_used(group, config.kind)) continue;
      auto& values = probe.*group.member;
      const auto& grads = analytic.params.*group.member;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double saved = values[i];
        values[i] = saved + h;
        const double up = sample_loss(probe, sample, config).total;
        values[i] = saved - h;
        const double down = sample_loss(probe, sample, config).total;
        values[i] = saved;
        groups[slot].max_relative_error = std::max(groups[slot].max_relative_error, rel(grads[i], (up - down) / (2 * h)));
        ++groups[slot].entries;
      }
      ++slot;
    }
    Sample shifted = sample;
    auto pixels = shifted.image.values();
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      const double saved = pixels[i];
      pixels[i] = saved + h;
      const double up = sample_loss(params, shifted, config).total;
      pixels[i] = saved - h;
      const double down = sample_loss(params, shifted, config).total;
      pixels[i] = saved;
      groups[slot].max_relative_error =
          std::max(groups[slot].max_relative_error, rel(analytic.input.values()[i], (up - down) / (2 * h)));
      ++groups[slot].entries;
    }
  }
  for (const auto& g : groups) report.max_relative_error = std::max(report.max_relative_error, g.max_relative_error);
  report.groups = std::move(groups);
  return report;
}

}  // namespace gazeattn
