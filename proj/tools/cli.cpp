#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "gazeattn/adversarial.hpp"
#include "gazeattn/format.hpp"
#include "gazeattn/io.hpp"
#include "gazeattn/manifest.hpp"
#include "gazeattn/parallel.hpp"
#include "gazeattn/protocols.hpp"
#include "gazeattn/report.hpp"
#include "gazeattn/synthetic.hpp"

namespace gazeattn::cli {

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string manifest;
  std::string out;
  std::size_t jobs = 1;
  std::string format = "csv,json";
};

ReportFormats parse_formats(const std::string& spec) {
  ReportFormats f{false, false};
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "csv") {
      f.csv = true;
    } else if (item == "json") {
      f.json = true;
    } else if (item == "both") {
      f.csv = f.json = true;
    } else {
      throw ValidationError("unknown --format '" + item + "' (expected csv, json or both)");
    }
  }
  if (!f.csv && !f.json) throw ValidationError("--format selects no output format");
  return f;
}

std::vector<AttentionKind> parse_baselines(const std::string& list) {
  std::vector<AttentionKind> out;
  if (list == "all") return {std::begin(kAllAttentionKinds), std::end(kAllAttentionKinds)};
  if (list.empty() || list == "none") return out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto k = parse_attention_kind(item);
    if (!k) throw ValidationError("unknown baseline '" + item + "'");
    out.push_back(*k);
  }
  return out;
}

Manifest require_manifest(const Globals& g) {
  if (g.manifest.empty()) throw ValidationError("--manifest is required");
  return load_manifest(g.manifest);
}

void emit(std::span<const ReportTable> tables, const Globals& g, std::ostream& out) {
  for (const auto& t : tables) {
    out << "# " << t.title << '\n' << t.to_csv() << '\n';
    for (const auto& w : t.warnings) out << "# warning: " << w << '\n';
  }
  if (!g.out.empty()) {
    const auto files = emit_report(tables, g.out, parse_formats(g.format), current_timestamp());
    for (const auto& f : files) out << "wrote " << f.string() << '\n';
  }
}

// One map source per column of a manifest: the saliency map plus each named
// attention map.
std::vector<std::string> map_sources(const Manifest& m) {
  std::vector<std::string> names;
  bool saliency = false;
  std::set<std::string> attention;
  for (const auto& e : m.entries) {
    saliency |= e.saliency_map_path.has_value();
    for (const auto& [name, path] : e.attention_map_paths) attention.insert(name);
  }
  if (saliency) names.push_back("saliency");
  names.insert(names.end(), attention.begin(), attention.end());
  return names;
}

std::optional<std::string> source_path(const ManifestEntry& e, const std::string& source) {
  if (source == "saliency") return e.saliency_map_path;
  const auto it = e.attention_map_paths.find(source);
  if (it == e.attention_map_paths.end()) return std::nullopt;
  return it->second;
}

AttentionMap load_on_grid(const fs::path& path, std::size_t rows, std::size_t cols) {
  const AttentionMap m = load_attention_map(path);
  if (m.rows() == rows && m.cols() == cols) return m;
  return resample_map(m, rows, cols);
}

std::vector<FixationSet> load_all_fixations(const Manifest& m) {
  std::vector<FixationSet> out;
  for (const auto& e : m.entries) {
    if (e.fixation_path) {
      out.push_back(load_fixations(m.resolve(*e.fixation_path), std::pair{m.settings.rows, m.settings.cols}, e.id));
    }
  }
  return out;
}

int run_eval_saliency(const Globals& g, std::ostream& out) {
  const Manifest m = require_manifest(g);
  ReportTable t;
  t.title = "Saliency evaluation";
  t.corner = "map";
  t.columns = {"F adaptive", "F max", "MAE", "images"};
  t.metadata = {{"seed", std::to_string(g.seed)},
                {"beta_sq", format_double(m.settings.beta_sq)},
                {"interpretation", "maps resampled to the mask grid; foreground is S >= threshold"}};
  for (const auto& source : map_sources(m)) {
    std::vector<SaliencyPrediction> preds;
    std::vector<GroundTruthMask> gts;
    for (const auto& e : m.entries) {
      const auto path = source_path(e, source);
      if (!path || !e.gt_mask_path) continue;
      MaskMap mask = load_mask(m.resolve(*e.gt_mask_path));
      preds.push_back({e.id, load_on_grid(m.resolve(*path), mask.rows(), mask.cols())});
      gts.push_back({e.id, std::move(mask)});
    }
    if (preds.empty()) {
      t.add_row(source, {std::nullopt, std::nullopt, std::nullopt, 0.0});
      t.warnings.push_back(source + ": no entry has both this map and a mask");
      continue;
    }
    const FMeasureSummary f = f_max(preds, gts, m.settings.beta_sq);
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) total += mae(preds[i], gts[i]);
    if (f.clamped_thresholds) {
      t.warnings.push_back(source + ": " + std::to_string(f.clamped_thresholds) + " adaptive threshold(s) clamped");
    }
    t.add_row(source, {f.adaptive_mean, f.sweep_max, total / static_cast<double>(preds.size()),
                       static_cast<double>(preds.size())});
  }
  emit(std::span(&t, 1), g, out);
  return kExitOk;
}

ShuffleSpec make_shuffle(const std::string& mode, std::size_t shuffles, std::uint64_t seed) {
  ShuffleSpec s;
  s.seed = seed;
  s.num_shuffles = shuffles;
  if (mode == "union") {
    s.mode = ShuffleMode::deterministic_union;
  } else if (mode == "mc") {
    s.mode = ShuffleMode::monte_carlo;
  } else {
    throw ValidationError("unknown --shuffle '" + mode + "' (expected union or mc)");
  }
  return s;
}

int run_eval_gaze(const Globals& g, const std::string& shuffle_mode, std::size_t shuffles, std::ostream& out) {
  const Manifest m = require_manifest(g);
  const auto fixations = load_all_fixations(m);
  const ShuffleSpec shuffle = make_shuffle(shuffle_mode, shuffles, g.seed);
  GazeContext context(fixations, fixations, -1.0);
  ReportTable t;
  t.title = "Gaze evaluation";
  t.corner = "map";
  t.columns = {"s-AUC", "IG", "images"};
  t.metadata = {{"seed", std::to_string(g.seed)},
                {"ig_epsilon", format_double(m.settings.ig_epsilon)},
                {"shuffle", shuffle_mode},
                {"interpretation", "negatives are other images' fixations; IG baseline is their blurred density"}};
  for (const auto& source : map_sources(m)) {
    double s_sum = 0.0, g_sum = 0.0;
    std::size_t n = 0;
    for (const auto& e : m.entries) {
      const auto path = source_path(e, source);
      const FixationSet* fix = context.fixations_for(e.id);
      if (!path || !fix) continue;
      if (!fix->scorable()) {
        t.warnings.push_back(source + ": '" + e.id + "' has no fixations");
        continue;
      }
      const AttentionMap map = load_on_grid(m.resolve(*path), m.settings.rows, m.settings.cols);
      try {
        const double s = s_auc(map.view(), *fix, fixations, shuffle);
        const double ig =
            info_gain(map.view(), *fix, context.baseline_excluding(e.id, map.rows(), map.cols()), m.settings.ig_epsilon);
        s_sum += s;
        g_sum += ig;
        ++n;
      } catch (const ScoringError& err) {
        t.warnings.push_back(source + ": " + err.what());
      }
    }
    const auto mean = [n](double v) { return n ? std::optional(v / static_cast<double>(n)) : std::nullopt; };
    t.add_row(source, {mean(s_sum), mean(g_sum), static_cast<double>(n)});
  }
  emit(std::span(&t, 1), g, out);
  return kExitOk;
}

int run_compare(const Globals& g, const std::string& grouping, const std::string& within, std::size_t k,
                double top_fraction, std::ostream& out) {
  const Manifest m = require_manifest(g);
  const auto fixations = load_all_fixations(m);
  std::vector<EvalRecord> records;
  for (const auto& e : m.entries) {
    for (const auto& [name, path] : e.attention_map_paths) {
      const auto kind = parse_attention_kind(name);
      if (!kind) throw ValidationError("entry '" + e.id + "': unknown baseline '" + name + "'");
      EvalRecord r;
      r.image_id = e.id;
      r.kind = *kind;
      r.attention = load_on_grid(m.resolve(path), m.settings.rows, m.settings.cols);
      if (auto it = e.task_scores.find(name); it != e.task_scores.end()) r.task_score = it->second;
      if (auto it = e.correct.find(name); it != e.correct.end()) r.correct = it->second;
      records.push_back(std::move(r));
    }
  }
  if (records.empty()) throw ValidationError("manifest has no attention maps to compare");

  std::vector<GroupMode> modes;
  if (grouping == "top-bottom" || grouping == "both") modes.push_back(GroupMode::top_bottom_k);
  if (grouping == "positive-negative" || grouping == "both") modes.push_back(GroupMode::positive_negative);
  if (modes.empty()) throw ValidationError("unknown --grouping '" + grouping + "'");
  std::vector<WithinGroup> protocols;
  if (within == "vs-human" || within == "both") protocols.push_back(WithinGroup::vs_human);
  if (within == "pairwise" || within == "both") protocols.push_back(WithinGroup::pairwise_pseudo);
  if (protocols.empty()) throw ValidationError("unknown --within '" + within + "'");

  std::vector<ReportTable> tables;
  for (auto mode : modes) {
    for (auto protocol : protocols) {
      GroupingSpec spec;
      spec.mode = mode;
      spec.protocol = protocol;
      spec.k = k;
      spec.top_fraction = top_fraction;
      spec.shuffle.seed = g.seed;
      spec.ig_epsilon = m.settings.ig_epsilon;
      ReportTable t = correlation_table(records, fixations, fixations, spec);
      t.metadata["seed"] = std::to_string(g.seed);
      tables.push_back(std::move(t));
    }
  }
  emit(tables, g, out);
  return kExitOk;
}

struct TrainFlags {
  std::size_t steps = 200;
  double lr = 0.1;
  std::size_t batch = 32;
  double lambda = 0.01;
  std::size_t features = 32;
  std::string fusion = "late";
};

TrainConfig make_train_config(const TrainFlags& f, std::uint64_t seed) {
  TrainConfig tc;
  tc.steps = f.steps;
  tc.learning_rate = f.lr;
  tc.batch_size = f.batch;
  tc.seed = seed;
  tc.attention.supervision_weight = f.lambda;
  tc.validate();
  return tc;
}

Fusion require_fusion(const std::string& name) {
  const auto f = parse_fusion(name);
  if (!f) throw ValidationError("unknown --fusion '" + name + "' (expected early or late)");
  return *f;
}

int run_train_toy(const Globals& g, const TrainFlags& f, const std::string& baseline, std::ostream& out) {
  const auto kind = parse_attention_kind(baseline);
  if (!kind) throw ValidationError("unknown baseline '" + baseline + "'");
  if (g.out.empty()) throw ValidationError("--out is required");
  const Manifest m = require_manifest(g);
  const BenchmarkData data = load_benchmark_data(m);
  TrainConfig tc = make_train_config(f, g.seed);
  tc.attention.kind = *kind;
  const auto& first = data.train.front().image;
  const ModelShape shape{first.rows(), first.cols(), first.channels(), f.features, data.num_classes,
                         require_fusion(f.fusion)};
  const TrainResult result = train(init_params(shape, g.seed), data.train, tc);

  const fs::path dir(g.out);
  fs::create_directories(dir);
  std::ostringstream trace, checkpoint;
  write_loss_trace(trace, result.trace);
  save_checkpoint(checkpoint, result.params, *kind, result.steps);
  write_text_file(dir / ("loss-trace-" + baseline + ".csv"), trace.str());
  write_text_file(dir / ("checkpoint-" + baseline + ".txt"), checkpoint.str());

  std::size_t correct = 0;
  for (const auto& s : data.test) correct += predict(result.params, s.image, tc.attention, &s.gaze_density) == s.label;
  out << "baseline " << baseline << ": " << result.steps << " steps, loss " << format_double(result.trace.front().total)
      << " -> " << format_double(result.trace.back().total) << ", test accuracy "
      << format_double(static_cast<double>(correct) / static_cast<double>(data.test.size())) << '\n';
  return kExitOk;
}

int run_bench(const Globals& g, const TrainFlags& f, const std::string& baselines, std::optional<double> fgsm_eps,
              std::size_t k, double top_fraction, const std::string& checkpoints, std::ostream& out,
              std::ostream& err) {
  if (g.out.empty()) throw ValidationError("--out is required");
  const Manifest m = require_manifest(g);
  std::vector<std::string> warnings;
  const BenchmarkData data = load_benchmark_data(m, &warnings);
  BenchmarkConfig cfg;
  cfg.baselines = parse_baselines(baselines);
  cfg.train = make_train_config(f, g.seed);
  cfg.feature_channels = f.features;
  cfg.fusion = require_fusion(f.fusion);
  cfg.fgsm_epsilon = fgsm_eps;
  cfg.k = k;
  cfg.top_fraction = top_fraction;
  cfg.shuffle.seed = g.seed;
  cfg.ig_epsilon = m.settings.ig_epsilon;
  cfg.beta_sq = m.settings.beta_sq;
  cfg.jobs = g.jobs;
  if (!checkpoints.empty()) {
    for (auto kind : cfg.baselines) {
      const fs::path p = fs::path(checkpoints) / ("checkpoint-" + std::string(to_string(kind)) + ".txt");
      if (!fs::exists(p)) continue;
      std::istringstream in(read_text_file(p));
      Checkpoint cp = load_checkpoint(in, p.string());
      if (cp.kind != kind) throw ValidationError(p.string() + " holds baseline '" + std::string(to_string(cp.kind)) + "'");
      cfg.pretrained.emplace(kind, std::move(cp));
    }
  }
  BenchmarkResult result = run_benchmark(data, cfg);
  warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
  for (auto& t : result.tables) {
    t.metadata["manifest"] = fs::path(g.manifest).filename().string();
  }
  emit(result.tables, g, out);
  for (const auto& run : result.runs) {
    if (run.trace.empty()) continue;
    std::ostringstream trace;
    write_loss_trace(trace, run.trace);
    const fs::path p = fs::path(g.out) / ("loss-trace-" + std::string(to_string(run.kind)) + ".csv");
    write_text_file(p, trace.str());
    out << "wrote " << p.string() << '\n';
  }
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return kExitOk;
}

int run_gen_synthetic(const Globals& g, std::size_t classes, std::size_t samples, std::size_t grid,
                      double train_fraction, std::ostream& out) {
  if (g.out.empty()) throw ValidationError("--out is required");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ValidationError("--train-fraction must lie in (0, 1)");
  SyntheticConfig sc;
  sc.num_classes = classes;
  sc.samples = samples;
  sc.grid = grid;
  sc.seed = g.seed;
  const SyntheticTask task = generate_synthetic_task(sc);

  const fs::path dir(g.out);
  Manifest m;
  m.base_dir = dir;
  m.settings.rows = m.settings.cols = grid;
  m.settings.channels = sc.channels();
  m.settings.classes = classes;
  m.settings.seed = g.seed;
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(samples)));
  if (n_train == 0 || n_train >= samples) throw ValidationError("train/test split leaves an empty side");

  // Each sample's files are independent; write them in parallel.
  parallel_for(task.samples.size(), g.jobs, [&](std::size_t i) {
    const Sample& s = task.samples[i];
    write_image(dir / "images" / (s.id + ".csv"), s.image);
    write_fixations(dir / "fixations" / (s.id + ".csv"), s.gaze_fixations);
    write_matrix(dir / "density" / (s.id + ".csv"), s.gaze_density.view(), MatrixFormat::csv);
    write_matrix(dir / "masks" / (s.id + ".pgm"), patch_mask(task.informative[i], grid, grid).view(),
                 MatrixFormat::pgm);
  });
  for (std::size_t i = 0; i < task.samples.size(); ++i) {
    const Sample& s = task.samples[i];
    ManifestEntry e;
    e.id = s.id;
    e.image_path = "images/" + s.id + ".csv";
    e.fixation_path = "fixations/" + s.id + ".csv";
    e.density_path = "density/" + s.id + ".csv";
    e.gt_mask_path = "masks/" + s.id + ".pgm";
    e.label = s.label;
    e.split = i < n_train ? "train" : "test";
    m.entries.push_back(std::move(e));
  }
  m.validate(true);
  save_manifest(dir / "manifest.json", m);
  out << "wrote " << samples << " samples (" << n_train << " train, " << samples - n_train << " test) to "
      << (dir / "manifest.json").string() << '\n';
  return kExitOk;
}

int run_gradcheck(const Globals& g, std::size_t samples, double tolerance, std::ostream& out) {
  SyntheticConfig sc;
  sc.num_classes = 3;
  sc.grid = 8;
  sc.samples = samples;
  sc.seed = g.seed;
  const SyntheticTask task = generate_synthetic_task(sc);
  double worst = 0.0;
  for (const Fusion fusion : {Fusion::early, Fusion::late}) {
    const ModelParams params = init_params(model_shape_for(sc, 6, fusion), g.seed);
    for (const AttentionKind kind : kAllAttentionKinds) {
      AttentionConfig ac;
      ac.kind = kind;
      ac.supervision_weight = 0.5;  // large enough that the KL path shows up in the check
      const GradCheckReport rep = gradient_check(params, task.samples, ac);
      for (const auto& grp : rep.groups) {
        out << to_string(fusion) << ' ' << grp.name << " entries " << grp.entries << " max_rel_err "
            << format_double(grp.max_relative_error) << '\n';
      }
      worst = std::max(worst, rep.max_relative_error);
    }
  }
  out << "max relative error " << format_double(worst) << (worst < tolerance ? " (pass)" : " (FAIL)") << '\n';
  return worst < tolerance ? kExitOk : kExitValidation;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"gazeattn: gaze-vs-attention metrics and toy attention baselines"};
  app.name("gazeattn");
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every randomized step")->capture_default_str();
  app.add_option("--manifest", g.manifest, "Dataset manifest (JSON)");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--format", g.format, "Report formats: csv, json or both (comma list)")->capture_default_str();

  TrainFlags tf;
  auto add_train_flags = [&tf](CLI::App* sub) {
    sub->add_option("--steps", tf.steps, "Optimizer steps")->capture_default_str();
    sub->add_option("--lr", tf.lr, "Adam learning rate")->capture_default_str();
    sub->add_option("--batch", tf.batch, "Minibatch size")->capture_default_str();
    sub->add_option("--lambda", tf.lambda, "Gaze supervision weight")->capture_default_str();
    sub->add_option("--features", tf.features, "Feature channels D")->capture_default_str();
    sub->add_option("--fusion", tf.fusion, "early or late")->capture_default_str();
  };

  auto* eval_sal = app.add_subcommand("eval-saliency", "F-measure and MAE of manifest maps against masks");
  auto* eval_gaze = app.add_subcommand("eval-gaze", "s-AUC and IG of manifest maps against fixations");
  std::string shuffle_mode = "union";
  std::size_t shuffles = 100;
  eval_gaze->add_option("--shuffle", shuffle_mode, "union or mc")->capture_default_str();
  eval_gaze->add_option("--shuffles", shuffles, "Monte Carlo shuffle count")->capture_default_str();

  auto* compare = app.add_subcommand("compare-attention", "Grouped correlation tables");
  std::string grouping = "both", within = "both";
  std::size_t k = 10;
  double top_fraction = 0.05;
  compare->add_option("--grouping", grouping, "top-bottom, positive-negative or both")->capture_default_str();
  compare->add_option("--within", within, "vs-human, pairwise or both")->capture_default_str();
  compare->add_option("--k", k, "Top/bottom group size")->capture_default_str();
  compare->add_option("--top-fraction", top_fraction, "Pseudo-fixation fraction")->capture_default_str();

  auto* train_toy = app.add_subcommand("train-toy", "Train one baseline; writes checkpoint and loss trace");
  std::string baseline;
  train_toy->add_option("--baseline", baseline, "activation, softmax, sigmoid, supervised or human")->required();
  add_train_flags(train_toy);

  auto* bench = app.add_subcommand("bench", "Full five-baseline benchmark");
  std::string baselines = "all";
  std::optional<double> fgsm_eps;
  std::string checkpoints;
  bench->add_option("--baselines", baselines, "Comma list or 'all'")->capture_default_str();
  bench->add_option("--fgsm-eps", fgsm_eps, "FGSM budget; omit to skip the attack");
  bench->add_option("--k", k, "Top/bottom group size")->capture_default_str();
  bench->add_option("--top-fraction", top_fraction, "Pseudo-fixation fraction")->capture_default_str();
  bench->add_option("--checkpoints", checkpoints, "Directory with checkpoint-<baseline>.txt to reuse");
  add_train_flags(bench);

  auto* gen = app.add_subcommand("gen-synthetic", "Write the synthetic dataset and its manifest");
  std::size_t classes = 4, samples = 640, grid = 16;
  double train_fraction = 0.8;
  gen->add_option("--classes", classes, "Number of classes")->capture_default_str();
  gen->add_option("--samples", samples, "Number of images")->capture_default_str();
  gen->add_option("--grid", grid, "Grid side")->capture_default_str();
  gen->add_option("--train-fraction", train_fraction, "Fraction tagged train")->capture_default_str();

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference audit of the analytic gradients");
  std::size_t gc_samples = 5;
  double tolerance = 1e-4;
  gradcheck->add_option("--samples", gc_samples, "Samples checked")->capture_default_str();
  gradcheck->add_option("--tolerance", tolerance, "Maximum relative error")->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<const char*> argv{"gazeattn"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (*eval_sal) return run_eval_saliency(g, out);
    if (*eval_gaze) return run_eval_gaze(g, shuffle_mode, shuffles, out);
    if (*compare) return run_compare(g, grouping, within, k, top_fraction, out);
    if (*train_toy) return run_train_toy(g, tf, baseline, out);
    if (*bench) return run_bench(g, tf, baselines, fgsm_eps, k, top_fraction, checkpoints, out, err);
    if (*gen) return run_gen_synthetic(g, classes, samples, grid, train_fraction, out);
    if (*gradcheck) return run_gradcheck(g, gc_samples, tolerance, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  err << "error: no subcommand\n";
  return kExitValidation;
}

}  // namespace gazeattn::cli
