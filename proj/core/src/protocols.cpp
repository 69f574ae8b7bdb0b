#include "gazeattn/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "gazeattn/format.hpp"
#include "gazeattn/io.hpp"
#include "gazeattn/parallel.hpp"
#include "gazeattn/random.hpp"

namespace gazeattn {

std::vector<FoldSplit> kfold_split(std::span<const std::string> ids, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ValueError("k-fold needs k >= 2");
  if (ids.size() < k) {
    throw ValueError("k-fold with k = " + std::to_string(k) + " needs at least k ids, got " +
                     std::to_string(ids.size()));
  }
  std::set<std::string> unique(ids.begin(), ids.end());
  if (unique.size() != ids.size()) throw ValueError("k-fold ids must be unique");

  std::vector<std::string> order(ids.begin(), ids.end());
  Rng rng = Rng::derive(seed, "kfold");
  rng.shuffle(order.begin(), order.end());

  const std::size_t base = order.size() / k;
  const std::size_t extra = order.size() % k;
  std::vector<std::vector<std::string>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  std::vector<FoldSplit> out(k);
  for (std::size_t f = 0; f < k; ++f) {
    out[f].validation = folds[f];
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) out[f].train.insert(out[f].train.end(), folds[g].begin(), folds[g].end());
    }
  }
  return out;
}

void GroupingSpec::validate() const {
  if (k < 1) throw ValueError("group size k must be >= 1");
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) throw ValueError("top_fraction must lie in (0, 1]");
  if (!(ig_epsilon >= 0.0)) throw ValueError("IG epsilon must be >= 0");
}

std::string GroupingSpec::interpretation() const {
  std::string grouping = mode == GroupMode::top_bottom_k ? "top/bottom-" + std::to_string(k) + " by task score"
                                                         : "correct/incorrect predictions";
  std::string within = protocol == WithinGroup::vs_human
                           ? "each attention map scored against its own image's human fixations"
                           : "ordered pairs within a group: map i scored against the top " +
                                 format_double(top_fraction) + " cells of map j";
  return grouping + "; " + within;
}

std::vector<RecordGroup> assign_groups(std::span<const EvalRecord> records, const GroupingSpec& spec,
                                       std::vector<std::string>* warnings) {
  spec.validate();
  std::vector<const EvalRecord*> ptrs;
  ptrs.reserve(records.size());
  for (const auto& r : records) ptrs.push_back(&r);

  if (spec.mode == GroupMode::positive_negative) {
    RecordGroup pos{"positive", {}}, neg{"negative", {}};
    for (const auto* r : ptrs) {
      if (!r->correct) throw ValueError("record '" + r->image_id + "' has no correctness flag");
      (*r->correct ? pos : neg).members.push_back(r);
    }
    auto by_id = [](const EvalRecord* a, const EvalRecord* b) { return a->image_id < b->image_id; };
    std::sort(pos.members.begin(), pos.members.end(), by_id);
    std::sort(neg.members.begin(), neg.members.end(), by_id);
    return {pos, neg};
  }

  for (const auto* r : ptrs) {
    if (!r->task_score) throw ValueError("record '" + r->image_id + "' has no task score");
  }
  std::sort(ptrs.begin(), ptrs.end(), [](const EvalRecord* a, const EvalRecord* b) {
    if (*a->task_score != *b->task_score) return *a->task_score > *b->task_score;
    return a->image_id < b->image_id;
  });
  std::size_t k = spec.k;
  if (2 * k > ptrs.size()) {
    k = ptrs.size() / 2;
    if (warnings) {
      warnings->push_back("k = " + std::to_string(spec.k) + " exceeds half of " + std::to_string(ptrs.size()) +
                          " records; groups truncated to " + std::to_string(k));
    }
  }
  RecordGroup top{"top-" + std::to_string(spec.k), {ptrs.begin(), ptrs.begin() + static_cast<std::ptrdiff_t>(k)}};
  RecordGroup bottom{"bottom-" + std::to_string(spec.k),
                     {ptrs.end() - static_cast<std::ptrdiff_t>(k), ptrs.end()}};
  return {top, bottom};
}

GazeContext::GazeContext(std::span<const FixationSet> fixations, std::span<const FixationSet> others,
                         double blur_sigma)
    : others_(others), blur_sigma_(blur_sigma) {
  for (const auto& f : fixations) by_id_[f.image_id()] = &f;
}

const FixationSet* GazeContext::fixations_for(const std::string& image_id) const {
  const auto it = by_id_.find(image_id);
  return it == by_id_.end() ? nullptr : it->second;
}

const DensityMap& GazeContext::baseline_excluding(const std::string& image_id, std::size_t rows, std::size_t cols) {
  const std::string key = image_id + '\n' + std::to_string(rows) + 'x' + std::to_string(cols);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  std::vector<FixationSet> pool;
  for (const auto& f : others_) {
    if (f.image_id() != image_id) pool.push_back(f);
  }
  const double sigma = blur_sigma_ < 0.0 ? default_blur_sigma(rows, cols) : blur_sigma_;
  return cache_.emplace(key, build_shuffled_baseline(pool, rows, cols, sigma)).first->second;
}

namespace {

struct Mean {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  std::optional<double> value() const {
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

}  // namespace

GroupScores score_group(const RecordGroup& group, GazeContext& context, const GroupingSpec& spec) {
  spec.validate();
  GroupScores out;
  Mean sauc, ig;
  const auto& m = group.members;

  if (spec.protocol == WithinGroup::vs_human) {
    for (const auto* r : m) {
      const FixationSet* fix = context.fixations_for(r->image_id);
      if (!fix || !fix->scorable()) continue;
      try {
        const double s = s_auc(r->attention.view(), *fix, context.others(), spec.shuffle);
        const auto& base = context.baseline_excluding(r->image_id, r->attention.rows(), r->attention.cols());
        const double g = info_gain(r->attention.view(), *fix, base, spec.ig_epsilon);
        sauc.add(s);
        ig.add(g);
        ++out.scored;
      } catch (const ScoringError&) {
        // Unscorable item: left out of the mean.
      }
    }
    out.s_auc = sauc.value();
    out.info_gain = ig.value();
    return out;
  }

  const std::size_t n = m.size();
  if (n < 2) return out;
  std::vector<std::optional<double>> ps(n * n), pg(n * n);
  std::vector<FixationSet> pseudo;
  pseudo.reserve(n);
  for (const auto* r : m) pseudo.push_back(pseudo_fixations(r->attention, spec.top_fraction, r->image_id));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& map_i = m[i]->attention;
    const auto& base = context.baseline_excluding(m[i]->image_id, map_i.rows(), map_i.cols());
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (pseudo[j].rows() != map_i.rows() || pseudo[j].cols() != map_i.cols()) {
        throw ShapeError("pairwise scoring needs all maps on one grid");
      }
      // Negatives exclude image i's own fixations, as in vs_human mode.
      const FixationSet positives(m[i]->image_id, map_i.rows(), map_i.cols(),
                                  std::vector<Fixation>(pseudo[j].points().begin(), pseudo[j].points().end()));
      try {
        ps[i * n + j] = s_auc(map_i.view(), positives, context.others(), spec.shuffle);
        pg[i * n + j] = info_gain(map_i.view(), positives, base, spec.ig_epsilon);
      } catch (const ScoringError&) {
        ps[i * n + j].reset();
        pg[i * n + j].reset();
      }
    }
  }
  Mean sym_s, sym_g;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !ps[i * n + j]) continue;
      sauc.add(*ps[i * n + j]);
      ig.add(*pg[i * n + j]);
      out.pair_s_auc.push_back(*ps[i * n + j]);
      ++out.scored;
      if (j > i && ps[j * n + i]) {
        sym_s.add(0.5 * (*ps[i * n + j] + *ps[j * n + i]));
        sym_g.add(0.5 * (*pg[i * n + j] + *pg[j * n + i]));
      }
    }
  }
  out.s_auc = sauc.value();
  out.info_gain = ig.value();
  out.s_auc_symmetric = sym_s.value();
  out.info_gain_symmetric = sym_g.value();
  return out;
}

ReportTable correlation_table(std::span<const EvalRecord> records, std::span<const FixationSet> fixations,
                              std::span<const FixationSet> others, const GroupingSpec& spec) {
  spec.validate();
  const bool pairwise = spec.protocol == WithinGroup::pairwise_pseudo;
  ReportTable table;
  table.title = std::string("Grouped correlation ") +
                (spec.mode == GroupMode::top_bottom_k ? "top-bottom" : "positive-negative") + " " +
                (pairwise ? "pairwise-pseudo" : "vs-human");
  table.metadata["interpretation"] = spec.interpretation();
  table.metadata["within_group"] = pairwise ? "pairwise_pseudo" : "vs_human";
  table.metadata["grouping"] = spec.mode == GroupMode::top_bottom_k ? "top_bottom_k" : "positive_negative";
  if (pairwise) table.metadata["top_fraction"] = format_double(spec.top_fraction);

  const std::vector<std::string> group_names =
      spec.mode == GroupMode::top_bottom_k
          ? std::vector<std::string>{"top-" + std::to_string(spec.k), "bottom-" + std::to_string(spec.k)}
          : std::vector<std::string>{"positive", "negative"};
  for (const auto& g : group_names) {
    table.columns.push_back(g + " s-AUC");
    table.columns.push_back(g + " IG");
    if (pairwise) {
      table.columns.push_back(g + " s-AUC sym");
      table.columns.push_back(g + " IG sym");
    }
  }

  GazeContext context(fixations, others, spec.blur_sigma);
  for (const AttentionKind kind : kAllAttentionKinds) {
    std::vector<EvalRecord> mine;
    for (const auto& r : records) {
      if (r.kind == kind) mine.push_back(r);
    }
    if (mine.empty()) continue;
    const std::string name(to_string(kind));
    std::vector<std::string> local_warnings;
    const auto groups = assign_groups(mine, spec, &local_warnings);
    for (const auto& w : local_warnings) table.warnings.push_back(name + ": " + w);
    std::vector<std::optional<double>> row;
    for (const auto& g : groups) {
      if (pairwise && g.members.size() < 2) {
        table.warnings.push_back(name + ": group '" + g.name + "' has " + std::to_string(g.members.size()) +
                                 " member(s); pairwise scoring skipped");
      }
      const GroupScores s = score_group(g, context, spec);
      row.push_back(s.s_auc);
      row.push_back(s.info_gain);
      if (pairwise) {
        row.push_back(s.s_auc_symmetric);
        row.push_back(s.info_gain_symmetric);
      }
    }
    table.add_row(name, std::move(row));
  }
  return table;
}

BenchmarkData load_benchmark_data(const Manifest& manifest, std::vector<std::string>* warnings) {
  auto warn = [&](const std::string& w) {
    if (warnings) warnings->push_back(w);
  };
  const auto& st = manifest.settings;
  BenchmarkData data;
  data.num_classes = st.classes;
  std::vector<Sample> all;
  std::vector<std::optional<std::string>> splits;
  for (const auto& e : manifest.entries) {
    if (!e.image_path || !e.label) {
      warn("entry '" + e.id + "' has no image or label; skipped");
      continue;
    }
    FeatureMap image = load_image(manifest.resolve(*e.image_path), st.channels);
    if (image.rows() != st.rows || image.cols() != st.cols) {
      throw ValidationError("entry '" + e.id + "': image is " + shape_string(image.rows(), image.cols()) +
                            ", manifest grid is " + shape_string(st.rows, st.cols));
    }
    FixationSet fix(e.id, st.rows, st.cols);
    if (e.fixation_path) {
      fix = load_fixations(manifest.resolve(*e.fixation_path), std::pair{st.rows, st.cols}, e.id);
    } else {
      warn("entry '" + e.id + "' has no fixations; gaze metrics will skip it");
    }
    std::optional<DensityMap> density;
    if (e.density_path) {
      density = load_density_map(manifest.resolve(*e.density_path));
    } else if (fix.scorable()) {
      density = build_shuffled_baseline(std::span(&fix, 1), st.rows, st.cols, default_blur_sigma(st.rows, st.cols));
    } else {
      density = DensityMap::filled(st.rows, st.cols, 0.0);
      warn("entry '" + e.id + "' has no gaze density; the human baseline sees an empty map");
    }
    if (e.gt_mask_path) data.masks.emplace(e.id, load_mask(manifest.resolve(*e.gt_mask_path)));
    all.push_back(Sample{e.id, std::move(image), *e.label, std::move(*density), std::move(fix)});
    splits.push_back(e.split);
  }
  if (all.empty()) throw ValidationError("manifest has no entries with an image and a label");

  const bool any_split = std::any_of(splits.begin(), splits.end(), [](const auto& s) { return s.has_value(); });
  std::set<std::string> test_ids;
  if (any_split) {
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (!splits[i]) throw ValidationError("entry '" + all[i].id + "' lacks a split while others have one");
      if (*splits[i] == "test") test_ids.insert(all[i].id);
    }
  } else {
    std::vector<std::string> ids;
    for (const auto& s : all) ids.push_back(s.id);
    const auto folds = kfold_split(ids, 5, st.seed);
    test_ids.insert(folds.front().validation.begin(), folds.front().validation.end());
  }
  for (auto& s : all) (test_ids.count(s.id) ? data.test : data.train).push_back(std::move(s));
  if (data.train.empty() || data.test.empty()) throw ValidationError("benchmark needs both train and test items");
  if (data.num_classes == 0) {
    int max_label = 0;
    for (const auto& s : data.train) max_label = std::max(max_label, s.label);
    for (const auto& s : data.test) max_label = std::max(max_label, s.label);
    data.num_classes = static_cast<std::size_t>(max_label) + 1;
  }
  return data;
}

std::string BenchmarkConfig::canonical() const {
  std::ostringstream ss;
  ss << "baselines=";
  for (auto b : baselines) ss << to_string(b) << ';';
  ss << " lr=" << format_double(train.learning_rate) << " steps=" << train.steps << " batch=" << train.batch_size
     << " seed=" << train.seed << " optimizer=" << (train.optimizer == OptimizerKind::adam ? "adam" : "gd")
     << " p=" << format_double(train.attention.activation_exponent)
     << " lambda=" << format_double(train.attention.supervision_weight)
     << " eps=" << format_double(train.attention.epsilon) << " D=" << feature_channels
     << " fusion=" << to_string(fusion) << " fgsm=" << (fgsm_epsilon ? format_double(*fgsm_epsilon) : "none")
     << " k=" << k << " top_fraction=" << format_double(top_fraction)
     << " shuffle=" << (shuffle.mode == ShuffleMode::monte_carlo ? "mc" : "union") << '/' << shuffle.num_shuffles
     << '/' << shuffle.seed << " ig_eps=" << format_double(ig_epsilon) << " beta_sq=" << format_double(beta_sq)
     << " pretrained=" << pretrained.size();
  return ss.str();
}

const BaselineRun* BenchmarkResult::run(AttentionKind kind) const {
  for (const auto& r : runs) {
    if (r.kind == kind) return &r;
  }
  return nullptr;
}

namespace {

double mean_loss(const ModelParams& params, std::span<const Sample> samples, const AttentionConfig& config) {
  double total = 0.0;
  for (const auto& s : samples) total += sample_loss(params, s, config).total;
  return total / static_cast<double>(samples.size());
}

AttentionMap on_grid(const AttentionMap& a, std::size_t rows, std::size_t cols) {
  const AttentionMap up = resample_map(a, rows, cols);
  return normalize_to_unit(map_cast<SignificanceMap>(up));
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkData& data, const BenchmarkConfig& config) {
  config.train.validate();
  BenchmarkResult result;
  std::set<AttentionKind> seen;
  for (auto b : config.baselines) {
    if (!seen.insert(b).second) throw ValueError("baseline '" + std::string(to_string(b)) + "' listed twice");
  }
  const std::uint64_t seed = config.train.seed;
  std::map<std::string, std::string> meta{{"seed", std::to_string(seed)},
                                          {"config_hash", hash_hex(config.canonical())},
                                          {"interpretation", "baseline x metric"}};

  const bool have_data = !config.baselines.empty();
  if (have_data && (data.train.empty() || data.test.empty())) throw ValueError("benchmark needs train and test items");

  ModelShape shape;
  if (have_data) {
    const auto& first = data.train.front().image;
    shape = ModelShape{first.rows(),      first.cols(), first.channels(), config.feature_channels,
                       data.num_classes, config.fusion};
    shape.validate();
  }

  // Train every baseline; runs are independent.
  result.runs.resize(config.baselines.size());
  parallel_for(config.baselines.size(), config.jobs, [&](std::size_t b) {
    BaselineRun& run = result.runs[b];
    run.kind = config.baselines[b];
    TrainConfig tc = config.train;
    tc.attention.kind = run.kind;
    run.model.attention = tc.attention;
    const ModelParams initial = init_params(shape, seed);
    run.initial_loss = mean_loss(initial, data.train, tc.attention);
    if (const auto it = config.pretrained.find(run.kind); it != config.pretrained.end()) {
      if (!(it->second.params.shape == shape)) {
        throw ValidationError("checkpoint for '" + std::string(to_string(run.kind)) + "' has a different shape");
      }
      run.model.params = it->second.params;
      run.model.steps = it->second.steps;
    } else {
      TrainResult tr = train(initial, data.train, tc);
      run.model.params = std::move(tr.params);
      run.model.steps = tr.steps;
      run.trace = std::move(tr.trace);
    }
    run.final_loss = mean_loss(run.model.params, data.train, tc.attention);
  });

  // Per-image evaluation.
  const std::size_t rows = have_data ? data.test.front().image.rows() : 0;
  const std::size_t cols = have_data ? data.test.front().image.cols() : 0;
  std::vector<FixationSet> test_fix;
  for (const auto& s : data.test) test_fix.push_back(s.gaze_fixations);
  GazeContext gaze(test_fix, test_fix, -1.0);
  if (have_data) {
    for (const auto& s : data.test) {
      if (s.gaze_fixations.scorable()) gaze.baseline_excluding(s.id, rows, cols);
    }
  }
  for (auto& run : result.runs) {
    run.records.resize(data.test.size());
    run.test_probs.resize(data.test.size());
    parallel_for(data.test.size(), config.jobs, [&](std::size_t i) {
      const Sample& s = data.test[i];
      const ForwardResult fr = forward(run.model.params, s.image, run.model.attention, &s.gaze_density);
      const int pred =
          static_cast<int>(std::max_element(fr.probs.begin(), fr.probs.end()) - fr.probs.begin());
      EvalRecord rec;
      rec.image_id = s.id;
      rec.kind = run.kind;
      rec.attention = on_grid(fr.attention, rows, cols);
      rec.task_score = fr.probs[static_cast<std::size_t>(s.label)];
      rec.correct = pred == s.label;
      run.test_probs[i] = fr.probs;
      run.records[i] = std::move(rec);
    });
    // Gaze scores read the shared baseline cache, so they run on this thread.
    for (std::size_t i = 0; i < data.test.size(); ++i) {
      const Sample& s = data.test[i];
      EvalRecord& rec = run.records[i];
      if (!s.gaze_fixations.scorable()) continue;
      try {
        rec.scores["s-AUC"] = s_auc(rec.attention.view(), s.gaze_fixations, test_fix, config.shuffle);
        rec.scores["IG"] = info_gain(rec.attention.view(), s.gaze_fixations,
                                     gaze.baseline_excluding(s.id, rows, cols), config.ig_epsilon);
      } catch (const ScoringError& e) {
        result.warnings.push_back(std::string(to_string(run.kind)) + ": " + e.what());
      }
    }
    std::size_t correct = 0;
    for (const auto& r : run.records) correct += *r.correct;
    run.test_accuracy = static_cast<double>(correct) / static_cast<double>(data.test.size());
  }

  // Task performance table.
  ReportTable task;
  task.title = "Task performance";
  task.columns = {"accuracy", "mAP", "initial loss", "final loss", "loss ratio", "steps"};
  task.metadata = meta;
  for (const auto& run : result.runs) {
    std::vector<RankedPredictions> classes;
    for (std::size_t c = 0; c < data.num_classes; ++c) {
      std::vector<RankedItem> items;
      for (std::size_t i = 0; i < data.test.size(); ++i) {
        items.push_back({data.test[i].id, run.test_probs[i][c], data.test[i].label == static_cast<int>(c)});
      }
      classes.emplace_back("class-" + std::to_string(c), std::move(items));
    }
    std::optional<double> map_value;
    try {
      map_value = mean_average_precision(classes).value;
    } catch (const ValueError&) {
    }
    task.add_row(std::string(to_string(run.kind)),
                 {run.test_accuracy, map_value, run.initial_loss, run.final_loss,
                  run.initial_loss > 0.0 ? std::optional(run.final_loss / run.initial_loss) : std::nullopt,
                  static_cast<double>(run.model.steps)});
  }
  result.tables.push_back(std::move(task));

  // Gaze agreement and saliency-style metrics.
  ReportTable gaze_table;
  gaze_table.title = "Attention vs human gaze";
  gaze_table.columns = {"s-AUC", "IG", "F adaptive", "F max", "MAE"};
  gaze_table.metadata = meta;
  gaze_table.metadata["interpretation"] =
      "attention resampled to the image grid and max-normalised; s-AUC and IG against the image's own fixations "
      "with other test images' fixations as shuffled negatives; F and MAE against ground-truth masks";
  for (const auto& run : result.runs) {
    double s_sum = 0.0, g_sum = 0.0;
    std::size_t n = 0;
    std::vector<SaliencyPrediction> preds;
    std::vector<GroundTruthMask> gts;
    double mae_sum = 0.0;
    for (const auto& rec : run.records) {
      if (auto it = rec.scores.find("s-AUC"); it != rec.scores.end()) {
        s_sum += it->second;
        g_sum += rec.scores.at("IG");
        ++n;
      }
      if (auto m = data.masks.find(rec.image_id); m != data.masks.end()) {
        preds.push_back({rec.image_id, rec.attention});
        gts.push_back({rec.image_id, m->second});
        mae_sum += mae(rec.attention, m->second);
      }
    }
    std::optional<double> fa, fm, ma;
    if (!preds.empty()) {
      const auto f = f_max(preds, gts, config.beta_sq);
      fa = f.adaptive_mean;
      fm = f.sweep_max;
      ma = mae_sum / static_cast<double>(preds.size());
    }
    gaze_table.add_row(std::string(to_string(run.kind)),
                       {n ? std::optional(s_sum / static_cast<double>(n)) : std::nullopt,
                        n ? std::optional(g_sum / static_cast<double>(n)) : std::nullopt, fa, fm, ma});
  }
  result.tables.push_back(std::move(gaze_table));

  // Grouped correlation analyses, both groupings under both interpretations.
  std::vector<EvalRecord> all_records;
  for (const auto& run : result.runs) all_records.insert(all_records.end(), run.records.begin(), run.records.end());
  for (const GroupMode mode : {GroupMode::top_bottom_k, GroupMode::positive_negative}) {
    for (const WithinGroup within : {WithinGroup::vs_human, WithinGroup::pairwise_pseudo}) {
      GroupingSpec spec;
      spec.mode = mode;
      spec.protocol = within;
      spec.k = config.k;
      spec.top_fraction = config.top_fraction;
      spec.shuffle = config.shuffle;
      spec.ig_epsilon = config.ig_epsilon;
      ReportTable t = correlation_table(all_records, test_fix, test_fix, spec);
      for (const auto& [key, value] : meta) {
        if (key != "interpretation") t.metadata[key] = value;
      }
      result.tables.push_back(std::move(t));
    }
  }

  if (config.fgsm_epsilon) {
    AttackConfig attack;
    attack.epsilon = *config.fgsm_epsilon;
    std::vector<TrainedBaseline> models;
    for (const auto& run : result.runs) models.push_back(run.model);
    result.robustness = evaluate_robustness(models, data.test, attack, config.jobs);
    ReportTable fool;
    fool.title = "FGSM fooling rates";
    fool.columns = {"clean accuracy", "fooling rate"};
    fool.metadata = meta;
    fool.metadata["epsilon"] = format_double(attack.epsilon);
    fool.metadata["clamp_range"] = format_double(attack.clamp_min) + "," + format_double(attack.clamp_max);
    fool.metadata["attacked_loss"] = "cross-entropy at the true label";
    fool.metadata["input_preprocessing"] = "none; raw intensities";
    for (const auto& row : result.robustness) {
      fool.add_row(std::string(to_string(row.kind)), {row.clean_accuracy, row.fooling_rate});
    }
    result.tables.push_back(std::move(fool));
  }

  for (auto& t : result.tables) {
    for (const auto& w : t.warnings) result.warnings.push_back(t.title + ": " + w);
  }
  return result;
}

}  // namespace gazeattn
