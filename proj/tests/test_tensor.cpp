#include <doctest.h>

#include "gazeattn/random.hpp"
#include "gazeattn/tensor.hpp"

using namespace gazeattn;

TEST_SUITE("tensor") {
  TEST_CASE("apply_attention identity, annihilator and hand case") {
    Rng rng(3);
    FeatureMap z = FeatureMap::zeros(3, 4, 2);
    for (double& v : z.values()) v = rng.normal();

    CHECK(apply_attention(z, AttentionMap::filled(3, 4, 1.0)) == z);
    {
      const auto held = apply_attention(z, AttentionMap::filled(3, 4, 0.0));
      for (double v : held.values()) CHECK(v == 0.0);
    }

    const FeatureMap one(1, 1, 2, {3.0, -4.0});
    const FeatureMap g = apply_attention(one, AttentionMap(1, 1, {0.5}));
    CHECK(g(0, 0, 0) == 1.5);
    CHECK(g(0, 0, 1) == -2.0);
  }

  TEST_CASE("apply_attention rejects mismatched grids") {
    CHECK_THROWS_AS(apply_attention(FeatureMap::zeros(2, 2, 1), AttentionMap::filled(2, 3, 1.0)), ShapeError);
  }

  TEST_CASE("map domains are enforced") {
    CHECK_THROWS_AS(AttentionMap(1, 2, {0.5, 1.5}), ValueError);
    CHECK_THROWS_AS(DensityMap(1, 1, {-0.1}), ValueError);
    CHECK_THROWS_AS(MaskMap(1, 1, {0.5}), ValueError);
    CHECK_THROWS_AS(SignificanceMap(1, 1, {std::nan("")}), ValueError);
    CHECK_THROWS_AS(AttentionMap(2, 2, {0.0, 0.0, 0.0}), ShapeError);
    CHECK_NOTHROW(SignificanceMap(1, 2, {-7.0, 9.0}));
    CHECK_THROWS_AS(map_cast<AttentionMap>(SignificanceMap(1, 1, {2.0})), ValueError);
  }

  TEST_CASE("resample_map examples") {
    const AttentionMap m(2, 2, {0.0, 1.0, 1.0, 0.0});
    CHECK(resample_map(m, 2, 2) == m);

    const AttentionMap up = resample_map(m, 3, 3);
    CHECK(up(1, 1) == doctest::Approx(0.5).epsilon(1e-15));

    const DensityMap c = DensityMap::filled(4, 6, 0.37);
    const DensityMap r = resample_map(c, 7, 3);
    CHECK(r.rows() == 7);
    CHECK(r.cols() == 3);
    for (double v : r.values()) CHECK(v == doctest::Approx(0.37).epsilon(1e-15));
  }

  TEST_CASE("resample_map stays inside the source range") {
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> v(5 * 7);
      for (double& x : v) x = rng.uniform();
      const AttentionMap src(5, 7, v);
      const AttentionMap dst = resample_map(src, 1 + rng.index(12), 1 + rng.index(12));
      for (double x : dst.values()) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
      }
    }
  }
}
