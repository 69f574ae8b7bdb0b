#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gazeattn/gaze_metrics.hpp"
#include "oracles.hpp"

using namespace gazeattn;

namespace {

std::vector<FixationSet> make_others(Rng& rng, std::size_t rows, std::size_t cols, std::size_t images, std::size_t per) {
  std::vector<FixationSet> out;
  for (std::size_t i = 0; i < images; ++i) out.push_back(oracle::random_fixations(rng, "o" + std::to_string(i), rows, cols, per));
  return out;
}

}  // namespace

TEST_SUITE("gaze_metrics") {
  TEST_CASE("s-AUC equals the pairwise oracle on random instances") {
    Rng rng(1);
    int checked = 0;
    for (int t = 0; t < 200; ++t) {
      const std::size_t rows = 2 + rng.index(7), cols = 2 + rng.index(7);
      const auto map = oracle::random_map(rng, rows * cols, 5);
      const FixationSet fix = oracle::random_fixations(rng, "x", rows, cols, 1 + rng.index(6));
      const auto others = make_others(rng, rows, cols, 3, 4);
      const GridView view{rows, cols, map};
      const double expect = oracle::s_auc(map, cols, fix, others);
      if (std::isnan(expect)) {
        CHECK_THROWS_AS(s_auc(view, fix, others), ScoringError);
        continue;
      }
      CHECK(s_auc(view, fix, others) == doctest::Approx(expect).epsilon(1e-14));
      ++checked;
    }
    CHECK(checked > 150);
  }

  TEST_CASE("s-AUC fixed 8x8 instance with 5 positives and 12 negatives") {
    Rng rng(77);
    std::vector<double> map(64);
    for (double& v : map) v = rng.uniform();
    const FixationSet fix("a", 8, 8, {{0, 0}, {1, 2}, {3, 3}, {5, 1}, {7, 7}});
    const FixationSet other("b", 8, 8,
                            {{0, 1}, {0, 2}, {2, 2}, {2, 5}, {3, 6}, {4, 4}, {4, 7}, {5, 5}, {6, 0}, {6, 6}, {7, 0}, {7, 3}});
    const std::vector<FixationSet> others{other};
    CHECK(s_auc(GridView{8, 8, map}, fix, others) == oracle::s_auc(map, 8, fix, others));
  }

  TEST_CASE("s-AUC degenerate and perfect cases") {
    Rng rng(2);
    const auto others = make_others(rng, 6, 6, 4, 5);
    const FixationSet fix("x", 6, 6, {{0, 0}, {5, 5}});
    const std::vector<double> flat(36, 0.42);
    CHECK(s_auc(GridView{6, 6, flat}, fix, others) == 0.5);

    std::vector<double> perfect(36, 0.0);
    perfect[0] = perfect[35] = 1.0;
    const FixationSet negs("y", 6, 6, {{1, 1}, {2, 3}});
    CHECK(s_auc(GridView{6, 6, perfect}, fix, std::vector<FixationSet>{negs}) == 1.0);

    CHECK_THROWS_AS(s_auc(GridView{6, 6, flat}, FixationSet("x", 6, 6), others), ScoringError);
    CHECK_THROWS_AS(s_auc(GridView{6, 6, flat}, fix, std::vector<FixationSet>{FixationSet("y", 6, 6, {{0, 0}})}),
                    ScoringError);
  }

  TEST_CASE("s-AUC is invariant to strictly monotone transforms") {
    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
      const auto map = oracle::random_map(rng, 49, 7);
      std::vector<double> warped(map.size());
      std::transform(map.begin(), map.end(), warped.begin(), [](double v) { return std::exp(3.0 * v) - 0.5; });
      const FixationSet fix = oracle::random_fixations(rng, "x", 7, 7, 4);
      const auto others = make_others(rng, 7, 7, 3, 6);
      CHECK(s_auc(GridView{7, 7, map}, fix, others) == s_auc(GridView{7, 7, warped}, fix, others));
    }
  }

  TEST_CASE("s-AUC of a centre prediction against centre-biased negatives is near chance") {
    // 200 images x 50 fixations on a fine grid, so the positive-cell
    // exclusion removes a negligible share of the negatives.
    Rng rng(8);
    const std::size_t n = 256;
    const double mid = 127.5, spread = 30.0;
    std::vector<double> centre(n * n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        centre[r * n + c] = std::exp(-((r - mid) * (r - mid) + (c - mid) * (c - mid)) / (2 * spread * spread));
    auto centred = [&](const std::string& id, std::size_t count) {
      std::vector<Fixation> pts;
      while (pts.size() < count) {
        const double r = rng.normal(mid, spread), c = rng.normal(mid, spread);
        if (r < 0 || c < 0 || r >= n || c >= n) continue;
        pts.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c)});
      }
      return FixationSet(id, n, n, pts);
    };
    const std::vector<FixationSet> others{centred("pool", 10000)};
    double sum = 0.0;
    for (int i = 0; i < 200; ++i) sum += s_auc(GridView{n, n, centre}, centred("x" + std::to_string(i), 50), others);
    CHECK(std::abs(sum / 200 - 0.5) < 0.05);
  }

  TEST_CASE("Monte Carlo shuffle is seeded") {
    Rng rng(6);
    const auto map = oracle::random_map(rng, 64, 9);
    const FixationSet fix = oracle::random_fixations(rng, "x", 8, 8, 5);
    const auto others = make_others(rng, 8, 8, 5, 8);
    const ShuffleSpec mc{.mode = ShuffleMode::monte_carlo, .num_shuffles = 20, .seed = 3};
    const double a = s_auc(GridView{8, 8, map}, fix, others, mc);
    CHECK(a == s_auc(GridView{8, 8, map}, fix, others, mc));
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }

  TEST_CASE("information gain hand cases") {
    const FixationSet one("x", 1, 2, {{0, 0}});
    const double ig = info_gain(GridView{1, 2, std::vector<double>{0.5, 0.5}}, one, DensityMap(1, 2, {0.25, 0.75}), 0.0);
    CHECK(ig == 1.0);

    Rng rng(12);
    std::vector<double> base(16);
    for (double& v : base) v = 0.5 + rng.uniform();
    const std::vector<double> same = base;
    const FixationSet fix = oracle::random_fixations(rng, "x", 4, 4, 6);
    CHECK(std::abs(info_gain(GridView{4, 4, same}, fix, DensityMap(4, 4, base))) < 1e-12);

    // Double the baseline mass at the fixated cells, keep totals equal.
    const FixationSet two("x", 4, 4, {{0, 0}, {3, 3}});
    std::vector<double> b(16, 1.0 / 16), p(16, 0.0);
    p[0] = p[15] = 2.0 / 16;
    const double rest = (1.0 - 4.0 / 16) / 14;
    for (std::size_t i = 1; i < 15; ++i) p[i] = rest;
    CHECK(info_gain(GridView{4, 4, p}, two, DensityMap(4, 4, b), 0.0) == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(info_gain(GridView{1, 2, std::vector<double>{0.5, 0.5}}, FixationSet("x", 1, 2), DensityMap(1, 2, {0.5, 0.5})),
                    ScoringError);
  }

  TEST_CASE("shuffled baseline") {
    const FixationSet centre("o", 5, 5, {{2, 2}});
    const DensityMap delta = build_shuffled_baseline(std::vector<FixationSet>{centre}, 5, 5, 0.0);
    CHECK(delta(2, 2) == 1.0);
    CHECK(std::accumulate(delta.values().begin(), delta.values().end(), 0.0) == 1.0);

    Rng rng(13);
    const FixationSet uniform = oracle::random_fixations(rng, "u", 8, 8, 200000);
    const DensityMap d = build_shuffled_baseline(std::vector<FixationSet>{uniform}, 8, 8, 1.0);
    const auto [lo, hi] = std::minmax_element(d.values().begin(), d.values().end());
    CHECK(*hi / *lo < 1.05);
    CHECK(std::accumulate(d.values().begin(), d.values().end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("pseudo fixations") {
    CHECK(pseudo_fixations(AttentionMap::filled(3, 2, 0.3), 1.0).size() == 6);
    const FixationSet top = pseudo_fixations(AttentionMap(2, 2, {0.9, 0.1, 0.2, 0.8}), 0.5);
    REQUIRE(top.size() == 2);
    CHECK(top.points()[0] == Fixation{0, 0});
    CHECK(top.points()[1] == Fixation{1, 1});
    const FixationSet tie = pseudo_fixations(AttentionMap::filled(2, 2, 0.5), 0.25);
    REQUIRE(tie.size() == 1);
    CHECK(tie.points()[0] == Fixation{0, 0});
  }

  TEST_CASE("rescale and blur") {
    const FixationSet f("x", 4, 4, {{3, 3}, {0, 1}});
    const FixationSet g = rescale_fixations(f, 8, 8);
    CHECK(g.rows() == 8);
    for (const auto& p : g.points()) {
      CHECK(p.row < 8);
      CHECK(p.col < 8);
    }
    const std::vector<double> flat(20, 0.7);
    for (double v : gaussian_blur(GridView{4, 5, flat}, 1.5)) CHECK(v == doctest::Approx(0.7).epsilon(1e-14));
  }
}
