#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gazeattn/synthetic.hpp"
#include "gazeattn/toy_model.hpp"
#include "oracles.hpp"

using namespace gazeattn;

namespace {

SyntheticTask small_task(std::size_t samples = 24, std::uint64_t seed = 0) {
  SyntheticConfig cfg;
  cfg.num_classes = 3;
  cfg.grid = 8;
  cfg.samples = samples;
  cfg.seed = seed;
  return generate_synthetic_task(cfg);
}

AttentionConfig cfg_for(AttentionKind kind) {
  AttentionConfig c;
  c.kind = kind;
  c.supervision_weight = 0.5;
  return c;
}

}  // namespace

TEST_SUITE("toy_model") {
  TEST_CASE("forward matches a straight-loop reference") {
    const SyntheticTask task = small_task(4);
    for (Fusion fusion : {Fusion::early, Fusion::late}) {
      const ModelParams p = init_params(model_shape_for(task.config, 6, fusion), 7);
      for (AttentionKind kind : kAllAttentionKinds) {
        for (const Sample& s : task.samples) {
          const ForwardResult fr = forward(p, s.image, cfg_for(kind), &s.gaze_density);
          const auto expect = oracle::forward_logits(p, s.image, kind, &s.gaze_density);
          REQUIRE(fr.logits.size() == expect.size());
          for (std::size_t k = 0; k < expect.size(); ++k) CHECK(std::abs(fr.logits[k] - expect[k]) < 1e-10);
          double sum = 0.0;
          for (double v : fr.probs) sum += v;
          CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("human baseline with uniform gaze equals no attention") {
    const SyntheticTask task = small_task(3);
    const ModelParams p = init_params(model_shape_for(task.config, 6), 1);
    const DensityMap uniform = DensityMap::filled(8, 8, 0.25);
    for (const Sample& s : task.samples) {
      const ForwardResult human = forward(p, s.image, cfg_for(AttentionKind::human), &uniform);
      const ForwardResult plain = forward(p, s.image, cfg_for(AttentionKind::activation_posthoc));
      for (std::size_t k = 0; k < human.logits.size(); ++k) CHECK(human.logits[k] == plain.logits[k]);
    }
  }

  TEST_CASE("human baseline needs gaze") {
    const SyntheticTask task = small_task(1);
    const ModelParams p = init_params(model_shape_for(task.config, 6), 1);
    CHECK_THROWS_AS(forward(p, task.samples[0].image, cfg_for(AttentionKind::human)), ValueError);
  }

  TEST_CASE("activation baseline reports a post-hoc map without applying it") {
    const SyntheticTask task = small_task(1);
    const ModelParams p = init_params(model_shape_for(task.config, 6), 1);
    const ForwardResult fr = forward(p, task.samples[0].image, cfg_for(AttentionKind::activation_posthoc));
    CHECK_FALSE(fr.attention_applied);
    double mx = 0.0;
    for (double v : fr.attention.values()) mx = std::max(mx, v);
    CHECK(mx == 1.0);
  }

  TEST_CASE("analytic gradients pass a finite-difference check") {
    const SyntheticTask task = small_task(3, 5);
    for (Fusion fusion : {Fusion::early, Fusion::late}) {
      const ModelParams p = init_params(model_shape_for(task.config, 6, fusion), 2);
      for (AttentionKind kind : kAllAttentionKinds) {
        const GradCheckReport rep = gradient_check(p, task.samples, cfg_for(kind));
        CHECK_MESSAGE(rep.max_relative_error < 1e-4, to_string(kind), " ", to_string(fusion));
      }
    }
  }

  TEST_CASE("zero learning rate leaves parameters unchanged; frozen conv never moves") {
    const SyntheticTask task = small_task(16);
    const ModelParams p = init_params(model_shape_for(task.config, 6), 3);
    TrainConfig cfg;
    cfg.attention = cfg_for(AttentionKind::sigmoid);
    cfg.steps = 5;
    cfg.batch_size = 4;
    cfg.learning_rate = 0.0;
    CHECK(train(p, task.samples, cfg).params == p);

    cfg.learning_rate = 0.05;
    const TrainResult r = train(p, task.samples, cfg);
    CHECK(r.params.feature_w == p.feature_w);
    CHECK(r.params.feature_b == p.feature_b);
    CHECK(r.params.classifier_w != p.classifier_w);
    CHECK(r.trace.size() == 5);
    CHECK(r.steps == 5);
  }

  TEST_CASE("training is deterministic in the seed") {
    const SyntheticTask task = small_task(16);
    const ModelParams p = init_params(model_shape_for(task.config, 6), 3);
    TrainConfig cfg;
    cfg.attention = cfg_for(AttentionKind::supervised);
    cfg.steps = 6;
    cfg.batch_size = 5;
    const TrainResult a = train(p, task.samples, cfg);
    const TrainResult b = train(p, task.samples, cfg);
    CHECK(a.params == b.params);
    std::ostringstream ta, tb;
    write_loss_trace(ta, a.trace);
    write_loss_trace(tb, b.trace);
    CHECK(ta.str() == tb.str());
    CHECK(ta.str().rfind("step,total_loss,ce_loss,kl_loss\n", 0) == 0);
  }

  TEST_CASE("init and synthetic generation are seeded") {
    const ModelShape shape = model_shape_for(small_task(1).config, 6);
    CHECK(init_params(shape, 4) == init_params(shape, 4));
    CHECK_FALSE(init_params(shape, 4) == init_params(shape, 5));
    CHECK(init_params(shape, 4).attn2_b[0] == kInitialGateBias);
    const SyntheticTask a = small_task(12, 9), b = small_task(12, 9);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      CHECK(a.samples[i].image == b.samples[i].image);
      CHECK(a.samples[i].label == b.samples[i].label);
    }
  }

  TEST_CASE("checkpoint round-trips exactly") {
    const ModelParams p = init_params(model_shape_for(small_task(1).config, 6, Fusion::early), 8);
    std::stringstream ss;
    save_checkpoint(ss, p, AttentionKind::supervised, 42);
    const Checkpoint c = load_checkpoint(ss);
    CHECK(c.params == p);
    CHECK(c.kind == AttentionKind::supervised);
    CHECK(c.steps == 42);

    std::istringstream bad("not a checkpoint\n");
    CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
  }

  TEST_CASE("config validation") {
    TrainConfig cfg;
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ValueError);
    ModelShape shape;
    shape.rows = 7;
    CHECK_THROWS_AS(shape.validate(), ValidationError);
  }
}
