// Acceptance checks. Usage: gazeattn_acceptance [criterion...]
// With no arguments every criterion runs. Exit status is 0 only if all pass.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "cli.hpp"
#include "gazeattn/adversarial.hpp"
#include "gazeattn/attention.hpp"
#include "gazeattn/io.hpp"
#include "gazeattn/protocols.hpp"
#include "gazeattn/synthetic.hpp"
#include "oracles.hpp"

using namespace gazeattn;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

/// Collects failed sub-checks for one criterion.
struct Verdict {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gazeattn-accept-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void metric_oracles(Verdict& v) {
  Rng rng(2024);
  int mismatches = 0, scored = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t rows = 2 + rng.index(7), cols = 2 + rng.index(7);
    const auto map = oracle::random_map(rng, rows * cols, 6);
    const FixationSet fix = oracle::random_fixations(rng, "x", rows, cols, 1 + rng.index(6));
    std::vector<FixationSet> others;
    for (int o = 0; o < 3; ++o) others.push_back(oracle::random_fixations(rng, "o" + std::to_string(o), rows, cols, 5));
    const double expect = oracle::s_auc(map, cols, fix, others);
    if (std::isnan(expect)) continue;
    ++scored;
    if (std::abs(s_auc(GridView{rows, cols, map}, fix, others) - expect) > 1e-14) ++mismatches;

    const std::vector<double> flat(rows * cols, 0.3);
    if (s_auc(GridView{rows, cols, flat}, fix, others) != 0.5) v.expect(false, "constant map s-AUC != 0.5");
    std::vector<double> warped(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) warped[i] = std::log1p(9.0 * map[i]) * 4.0 - 2.0;
    if (s_auc(GridView{rows, cols, warped}, fix, others) != s_auc(GridView{rows, cols, map}, fix, others)) {
      v.expect(false, "s-AUC changed under a monotone transform");
    }
  }
  v.expect(mismatches == 0, std::to_string(mismatches) + " s-AUC oracle mismatches");
  v.note(std::to_string(scored) + " s-AUC instances vs pairwise oracle");

  std::vector<double> base(25);
  for (double& x : base) x = 0.1 + rng.uniform();
  const FixationSet fix = oracle::random_fixations(rng, "x", 5, 5, 7);
  const double ig0 = info_gain(GridView{5, 5, base}, fix, DensityMap(5, 5, base));
  v.expect(std::abs(ig0) < 1e-12, "IG(pred = baseline) = " + fmt(ig0));
  const double ig1 = info_gain(GridView{1, 2, std::vector<double>{0.5, 0.5}}, FixationSet("h", 1, 2, {{0, 0}}),
                               DensityMap(1, 2, {0.25, 0.75}), 0.0);
  v.expect(ig1 == 1.0, "2-cell IG = " + fmt(ig1));
}

void task_metrics(Verdict& v) {
  const double f = f_measure(0.8, 0.5, 0.3);
  v.expect(std::abs(f - 0.70270) <= 1e-5, "F(0.8, 0.5) = " + fmt(f));
  const double m = mae(AttentionMap(2, 2, {0.0, 0.25, 0.5, 1.0}), MaskMap(2, 2, {0.0, 0.0, 1.0, 1.0}));
  v.expect(m == 0.1875, "MAE hand case = " + fmt(m));

  int ap_bad = 0;
  for (unsigned bits = 1; bits < 32; ++bits) {
    std::vector<bool> labels(5);
    std::vector<RankedItem> items;
    for (std::size_t i = 0; i < 5; ++i) {
      labels[i] = (bits >> i) & 1U;
      items.push_back({"i" + std::to_string(i), 1.0 - 0.1 * static_cast<double>(i), labels[i]});
    }
    if (std::abs(*average_precision(RankedPredictions("c", items)) - oracle::average_precision(labels)) > 1e-15) ++ap_bad;
  }
  v.expect(ap_bad == 0, std::to_string(ap_bad) + " AP labelings disagree with the oracle");
  v.expect(!average_precision(RankedPredictions("c", {{"a", 1.0, false}})).has_value(), "AP without positives not skipped");

  Rng rng(5);
  std::vector<LabelPair> pairs;
  std::size_t changed = 0;
  for (int i = 0; i < 500; ++i) {
    const int a = static_cast<int>(rng.index(5)), b = static_cast<int>(rng.index(5));
    changed += a != b;
    pairs.push_back({"p" + std::to_string(i), a, b});
  }
  v.expect(fooling_rate(pairs) == static_cast<double>(changed) / 500.0, "fooling rate recount differs");
}

void attention_kernels(Verdict& v) {
  Rng rng(7);
  double worst_sum = 0.0, worst_shift = 0.0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> y(49), ys(49);
    const double c = rng.uniform(-100.0, 100.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = rng.uniform(-20.0, 20.0);
      ys[i] = y[i] + c;
    }
    const AttentionMap a = softmax_attention(SignificanceMap(7, 7, y));
    const AttentionMap b = softmax_attention(SignificanceMap(7, 7, ys));
    worst_sum = std::max(worst_sum, std::abs(std::accumulate(a.values().begin(), a.values().end(), 0.0) - 1.0));
    for (std::size_t i = 0; i < y.size(); ++i) worst_shift = std::max(worst_shift, std::abs(a[i] - b[i]));
  }
  v.expect(worst_sum <= 1e-12, "softmax sum off by " + fmt(worst_sum));
  v.expect(worst_shift <= 1e-12, "softmax shift changes output by " + fmt(worst_shift));

  const AttentionMap s = sigmoid_attention(SignificanceMap(1, 2, {0.0, std::log(3.0)}));
  v.expect(std::abs(s[0] - 0.5) <= 1e-12, "sigmoid(0) = " + fmt(s[0]));
  v.expect(std::abs(s[1] - 0.75) <= 1e-12, "sigmoid(ln 3) = " + fmt(s[1]));

  FeatureMap z = FeatureMap::zeros(5, 6, 4);
  for (double& x : z.values()) x = rng.uniform(-3.0, 3.0);
  const SignificanceMap act = activation_attention(z, 2.0);
  bool exact = true;
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 6; ++c) {
      double sum = 0.0;
      for (std::size_t d = 0; d < 4; ++d) sum += z(r, c, d) * z(r, c, d);
      exact &= act(r, c) == sum;
    }
  v.expect(exact, "activation attention differs from the loop oracle");

  double worst_self = 0.0, most_negative = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> a(16), h(16);
    for (std::size_t i = 0; i < 16; ++i) {
      a[i] = rng.uniform();
      h[i] = rng.uniform();
    }
    const AttentionMap am(4, 4, a);
    worst_self = std::max(worst_self, std::abs(attention_kl_loss(am, DensityMap(4, 4, a))));
    most_negative = std::min(most_negative, attention_kl_loss(am, DensityMap(4, 4, h)));
  }
  v.expect(worst_self <= 1e-12, "KL(p||p) = " + fmt(worst_self));
  v.expect(most_negative >= 0.0, "KL went negative: " + fmt(most_negative));
}

void gradcheck(Verdict& v) {
  const auto t0 = Clock::now();
  std::ostringstream out, err;
  const int code = cli::cli_main({"gradcheck", "--seed", "0", "--samples", "5"}, out, err);
  const double secs = seconds_since(t0);
  const std::string text = out.str();
  const auto pos = text.rfind("max relative error ");
  double worst = NAN;
  if (pos != std::string::npos) worst = std::strtod(text.c_str() + pos + 19, nullptr);
  v.expect(code == 0, "gradcheck exited " + std::to_string(code) + ": " + err.str());
  v.expect(worst < 1e-4, "max relative error " + fmt(worst));
  v.expect(secs < 60.0, "took " + fmt(secs) + " s");
  v.note("max relative error " + fmt(worst) + " in " + fmt(secs) + " s");
}

void fgsm(Verdict& v) {
  SyntheticConfig sc;
  sc.samples = 40;
  sc.seed = 1;
  const SyntheticTask task = generate_synthetic_task(sc);
  const ModelShape shape = model_shape_for(sc, 8);
  const ModelParams params = init_params(shape, 0);
  double worst_norm_excess = 0.0, worst_drop = 0.0;
  for (AttentionKind kind : kAllAttentionKinds) {
    AttentionConfig ac;
    ac.kind = kind;
    for (const Sample& s : task.samples) {
      for (double eps : {0.01, 0.05, 0.3}) {
        const FeatureMap adv = fgsm_perturb(params, s, ac, {.epsilon = eps});
        for (std::size_t i = 0; i < adv.size(); ++i) {
          worst_norm_excess = std::max(worst_norm_excess, std::abs(adv.values()[i] - s.image.values()[i]) - eps);
          if (adv.values()[i] < 0.0 || adv.values()[i] > 1.0) v.expect(false, "perturbed pixel outside [0, 1]");
        }
      }
      Sample moved = s;
      moved.image = fgsm_perturb(params, s, ac, {.epsilon = 1e-4, .clamp_min = -1e9, .clamp_max = 1e9});
      worst_drop = std::max(worst_drop, sample_loss(params, s, ac, false).ce - sample_loss(params, moved, ac, false).ce);
    }
  }
  v.expect(worst_norm_excess <= 0.0, "max-norm exceeded by " + fmt(worst_norm_excess));
  v.expect(worst_drop <= 1e-9, "loss fell by " + fmt(worst_drop) + " after an ascent step");

  std::vector<TrainedBaseline> models;
  for (AttentionKind kind : kAllAttentionKinds) {
    AttentionConfig ac;
    ac.kind = kind;
    models.push_back({ac, params, 1});
  }
  for (const auto& row : evaluate_robustness(models, task.samples, {.epsilon = 0.0})) {
    v.expect(row.fooling_rate == 0.0, std::string(to_string(row.kind)) + ": fooling rate at eps 0 = " + fmt(row.fooling_rate));
  }
}

void trend(Verdict& v) {
  const auto t0 = Clock::now();
  SyntheticConfig sc;
  sc.num_classes = 4;
  sc.samples = 640;
  sc.seed = 0;
  const SyntheticTask task = generate_synthetic_task(sc);
  BenchmarkData data;
  data.train.assign(task.samples.begin(), task.samples.begin() + 512);
  data.test.assign(task.samples.begin() + 512, task.samples.end());
  data.num_classes = 4;
  BenchmarkConfig cfg;
  cfg.train.steps = 200;
  cfg.train.seed = 0;
  cfg.jobs = std::max(1u, std::thread::hardware_concurrency());
  const BenchmarkResult r = run_benchmark(data, cfg);
  const double secs = seconds_since(t0);

  const BaselineRun* human = r.run(AttentionKind::human);
  const BaselineRun* sup = r.run(AttentionKind::supervised);
  const BaselineRun* sig = r.run(AttentionKind::sigmoid);
  auto sauc = [&](const BaselineRun* run) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& rec : run->records) {
      if (auto it = rec.scores.find("s-AUC"); it != rec.scores.end()) {
        s += it->second;
        ++n;
      }
    }
    return n ? s / static_cast<double>(n) : NAN;
  };

  for (const auto& run : r.runs) {
    const std::string name(to_string(run.kind));
    v.note(name + ": test acc " + fmt(run.test_accuracy) + ", loss " + fmt(run.initial_loss) + " -> " + fmt(run.final_loss) +
           ", s-AUC " + fmt(sauc(&run)));
    if (is_implicit(run.kind)) {
      v.expect(human->test_accuracy >= run.test_accuracy + 0.02,
               "(a) human " + fmt(human->test_accuracy) + " < " + name + " " + fmt(run.test_accuracy) + " + 0.02");
    }
    v.expect(run.final_loss < 0.5 * run.initial_loss,
             "(c) " + name + " final loss " + fmt(run.final_loss) + " >= half of " + fmt(run.initial_loss));
  }
  v.expect(sauc(sup) > sauc(sig), "(b) supervised s-AUC " + fmt(sauc(sup)) + " <= sigmoid " + fmt(sauc(sig)));
  v.expect(secs < 120.0, "took " + fmt(secs) + " s");
  v.note("wall time " + fmt(secs) + " s");
}

void determinism(Verdict& v) {
  const fs::path data = scratch("data");
  std::ostringstream sink, err;
  v.expect(cli::cli_main({"gen-synthetic", "--seed", "3", "--classes", "3", "--samples", "30", "--grid", "8", "--out",
                          data.string()},
                         sink, err) == 0,
           "gen-synthetic failed: " + err.str());
  std::vector<std::string> csv[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path out = scratch("run" + std::to_string(i));
    const int code = cli::cli_main({"bench", "--manifest", (data / "manifest.json").string(), "--seed", "3", "--steps", "4",
                                    "--features", "4", "--k", "2", "--fgsm-eps", "0.05", "--format", "csv", "--out",
                                    out.string()},
                                   sink, err);
    v.expect(code == 0, "bench failed: " + err.str());
    std::set<fs::path> files;
    for (const auto& e : fs::directory_iterator(out)) files.insert(e.path().filename());
    for (const auto& f : files) csv[i].push_back(f.string() + "\n" + read_text_file(out / f));
  }
  v.expect(!csv[0].empty() && csv[0] == csv[1], "bench CSV differs between identical runs");

  Rng rng(9);
  std::vector<double> m(16 * 16);
  for (double& x : m) x = rng.uniform();
  const fs::path dir = scratch("rt");
  write_matrix(dir / "m.pgm", GridView{16, 16, m}, MatrixFormat::pgm);
  write_matrix(dir / "m.csv", GridView{16, 16, m}, MatrixFormat::csv);
  const Matrix pgm = load_matrix(dir / "m.pgm"), csvm = load_matrix(dir / "m.csv");
  double pgm_err = 0.0, csv_err = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    pgm_err = std::max(pgm_err, std::abs(pgm.values[i] - m[i]));
    csv_err = std::max(csv_err, std::abs(csvm.values[i] - m[i]));
  }
  v.expect(pgm_err <= 1.0 / 65535.0, "PGM round-trip error " + fmt(pgm_err));
  v.expect(csv_err <= 1e-12, "CSV round-trip error " + fmt(csv_err));

  for (std::size_t n = 5; n <= 50; ++n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("id" + std::to_string(i));
    std::multiset<std::string> seen;
    for (const auto& fold : kfold_split(ids, 5, n)) {
      seen.insert(fold.validation.begin(), fold.validation.end());
      std::set<std::string> train(fold.train.begin(), fold.train.end());
      if (train.size() + fold.validation.size() != n) v.expect(false, "fold sizes wrong for n = " + std::to_string(n));
    }
    if (seen != std::multiset<std::string>(ids.begin(), ids.end())) v.expect(false, "folds do not partition n = " + std::to_string(n));
  }
}

struct Criterion {
  int id;
  const char* title;
  std::function<void(Verdict&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "metric oracles (s-AUC, IG)", metric_oracles},
      {2, "task metrics (F, MAE, AP, fooling rate)", task_metrics},
      {3, "attention kernels (softmax, sigmoid, activation, KL)", attention_kernels},
      {4, "gradient check", gradcheck},
      {5, "FGSM bound, identity and ascent", fgsm},
      {6, "trend on the seed-0 synthetic task", trend},
      {7, "determinism and round-trips", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  bool ok = true;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Verdict v;
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool pass = v.failures.empty();
    ok &= pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << '\n';
    for (const auto& n : v.notes) std::cout << "    " << n << '\n';
    for (const auto& f : v.failures) std::cout << "    failed: " << f << '\n';
  }
  return ok ? 0 : 1;
}
