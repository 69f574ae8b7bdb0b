#include <benchmark/benchmark.h>

#include "gazeattn/gaze_metrics.hpp"
#include "gazeattn/random.hpp"
#include "gazeattn/synthetic.hpp"
#include "gazeattn/toy_model.hpp"

namespace {

using namespace gazeattn;

void BM_SAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  std::vector<double> map(n * n);
  for (double& v : map) v = rng.uniform();
  auto fixations = [&](const std::string& id) {
    std::vector<Fixation> pts;
    for (std::size_t i = 0; i < 4 * n; ++i) pts.push_back({rng.index(n), rng.index(n)});
    return FixationSet(id, n, n, pts);
  };
  const FixationSet fix = fixations("x");
  std::vector<FixationSet> others;
  for (int i = 0; i < 20; ++i) others.push_back(fixations("o" + std::to_string(i)));
  for (auto _ : state) benchmark::DoNotOptimize(s_auc(GridView{n, n, map}, fix, others));
}
BENCHMARK(BM_SAuc)->Arg(16)->Arg(64);

void BM_Resample(benchmark::State& state) {
  Rng rng(2);
  std::vector<double> v(32 * 32);
  for (double& x : v) x = rng.uniform();
  const DensityMap m(32, 32, v);
  for (auto _ : state) benchmark::DoNotOptimize(resample_map(m, 97, 61));
}
BENCHMARK(BM_Resample);

struct ModelFixture {
  SyntheticTask task;
  ModelParams params;
  ModelFixture() : task(generate_synthetic_task({.samples = 4})), params(init_params(model_shape_for(task.config), 0)) {}
};

void BM_Forward(benchmark::State& state) {
  static const ModelFixture f;
  AttentionConfig cfg;
  cfg.kind = static_cast<AttentionKind>(state.range(0));
  const Sample& s = f.task.samples[0];
  for (auto _ : state) benchmark::DoNotOptimize(forward(f.params, s.image, cfg, &s.gaze_density));
  state.SetLabel(std::string(to_string(cfg.kind)));
}
BENCHMARK(BM_Forward)->DenseRange(0, 4);

void BM_Backward(benchmark::State& state) {
  static const ModelFixture f;
  AttentionConfig cfg;
  cfg.kind = static_cast<AttentionKind>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(backward(f.params, f.task.samples[0], cfg));
  state.SetLabel(std::string(to_string(cfg.kind)));
}
BENCHMARK(BM_Backward)->DenseRange(0, 4);

}  // namespace

BENCHMARK_MAIN();
