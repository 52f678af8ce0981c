#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support/oracles.hpp"
#include "support/testutil.hpp"
#include "wsseg/weakmodels.hpp"

using namespace wsseg;

TEST_CASE("moi1 on a 5x5 all-foreground mask matches the hand evaluation") {
  const Mask m(5, 5, 1);
  const WeightResult r = moi1_weights(m, 1.0);
  REQUIRE(r.flag == WeightFlag::ok);
  CHECK(r.map.at(2, 2) == 1.0f);  // zero distance at the center
  // corner: d = 2*sqrt(2), max d = 2*sqrt(2)
  const double d = 2.0 * std::sqrt(2.0);
  CHECK(r.map.at(0, 0) == doctest::Approx(1.0 - d / (d + 1.0)).epsilon(1e-6));
  CHECK(r.map.at(0, 0) == doctest::Approx(0.2612).epsilon(1e-3));
}

TEST_CASE("both models leave background confidence at exactly 1") {
  Rng rng(42);
  const Mask m = testutil::random_oval_mask(rng, 24);
  for (const auto& r : {moi1_weights(m, 1.0), moi2_weights(m, 1.0)}) {
    for (int i = 0; i < m.height(); ++i) {
      for (int j = 0; j < m.width(); ++j) {
        if (!m.at(i, j)) CHECK(r.map.at(i, j) == 1.0f);
      }
    }
  }
}

TEST_CASE("moi1 weights match the brute-force oracle exactly") {
  Rng rng(101);
  for (int round = 0; round < 10; ++round) {
    const Mask m = testutil::random_oval_mask(rng, 16);
    const WeightResult r = moi1_weights(m, 1.0);
    CHECK(r.map == oracle::naive_moi1(m, 1.0));
  }
}

TEST_CASE("moi2 weights match the brute-force oracle exactly") {
  Rng rng(202);
  for (int round = 0; round < 10; ++round) {
    const Mask m = testutil::random_oval_mask(rng, 16);
    const WeightResult r = moi2_weights(m, 1.0);
    CHECK(r.flag == WeightFlag::ok);
    CHECK(r.map == oracle::naive_moi2(m, 1.0));
  }
}

TEST_CASE("all confidences stay in (0,1]") {
  Rng rng(303);
  for (int round = 0; round < 25; ++round) {
    const Mask m = testutil::random_oval_mask(rng, 20);
    for (const auto& r : {moi1_weights(m, 1.0), moi2_weights(m, 1.0)}) {
      for (float v : r.map.vec()) {
        CHECK(v > 0.0f);
        CHECK(v <= 1.0f);
      }
    }
  }
}

TEST_CASE("moi1 confidence is non-increasing in distance from the center") {
  Rng rng(404);
  const Mask m = testutil::random_oval_mask(rng, 32);
  const OvalStats s = compute_oval_stats(m, 1.0);
  const WeightResult r = moi1_weights(m, 1.0);
  std::vector<std::pair<double, float>> by_dist;
  for (int i = 0; i < m.height(); ++i) {
    for (int j = 0; j < m.width(); ++j) {
      if (!m.at(i, j)) continue;
      const double di = i - s.center_i, dj = j - s.center_j;
      by_dist.emplace_back(std::sqrt(di * di + dj * dj), r.map.at(i, j));
    }
  }
  std::sort(by_dist.begin(), by_dist.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t i = 1; i < by_dist.size(); ++i) CHECK(by_dist[i].second <= by_dist[i - 1].second);
}

TEST_CASE("moi2 assigns equal confidence on centrally mirrored pixels") {
  // For a point-symmetric foreground the Mahalanobis distance of v and -v
  // agree exactly, so the iso-ellipse property is bitwise checkable.
  const Mask m = testutil::oval_mask(41, 41, 20.0, 20.0, 12.0, 6.0, 0.7);
  const WeightResult r = moi2_weights(m, 1.0);
  REQUIRE(r.flag == WeightFlag::ok);
  for (int i = 0; i < 41; ++i) {
    for (int j = 0; j < 41; ++j) {
      const int mi = 40 - i, mj = 40 - j;
      REQUIRE(m.at(i, j) == m.at(mi, mj));  // symmetric rasterization
      CHECK(r.map.at(i, j) == r.map.at(mi, mj));
    }
  }
}

TEST_CASE("moi2 equalizes anisotropic boundary pixels that moi1 separates") {
  // Axis-aligned ellipse, semi-axes 10 and 5: offsets (±10,0) and (0,±5)
  // have equal Mahalanobis but unequal Euclidean distance.
  const Mask m = testutil::oval_mask(31, 31, 15.0, 15.0, 10.0, 5.0, 0.0);
  const WeightResult r1 = moi1_weights(m, 1.0);
  const WeightResult r2 = moi2_weights(m, 1.0);
  REQUIRE(m.at(25, 15) == 1);
  REQUIRE(m.at(15, 20) == 1);
  const double moi2_gap = std::abs(r2.map.at(25, 15) - r2.map.at(15, 20));
  const double moi1_gap = std::abs(r1.map.at(25, 15) - r1.map.at(15, 20));
  // Brute-force values on this rasterization: the Mahalanobis distances of
  // the two boundary pixels are 1.933 and 2.026, the Euclidean ones 10 and 5.
  CHECK(moi1_gap == doctest::Approx(0.454545).epsilon(1e-4));
  CHECK(moi2_gap == doctest::Approx(0.030949).epsilon(1e-3));
  CHECK(moi2_gap < 0.1 * moi1_gap);
}

TEST_CASE("moi1 and moi2 rank disc pixels identically") {
  const Mask disc = testutil::oval_mask(25, 25, 12.0, 12.0, 10.0, 10.0, 0.0);
  const WeightMap w1 = moi1_weights(disc, 1.0).map;
  const WeightMap w2 = moi2_weights(disc, 1.0).map;
  std::vector<std::pair<float, float>> pairs;
  for (int i = 0; i < 25; ++i) {
    for (int j = 0; j < 25; ++j) {
      if (disc.at(i, j)) pairs.emplace_back(w1.at(i, j), w2.at(i, j));
    }
  }
  for (size_t a = 0; a < pairs.size(); ++a) {
    for (size_t b = a + 1; b < pairs.size(); ++b) {
      CHECK((pairs[a].first < pairs[b].first) == (pairs[a].second < pairs[b].second));
      CHECK((pairs[a].first == pairs[b].first) == (pairs[a].second == pairs[b].second));
    }
  }
}

TEST_CASE("degenerate foregrounds fall back as specified") {
  Mask empty(8, 8, 0);
  const WeightResult r0 = moi1_weights(empty, 1.0);
  CHECK(r0.flag == WeightFlag::empty_foreground);
  for (float v : r0.map.vec()) CHECK(v == 1.0f);

  Mask line(8, 8, 0);
  for (int j = 1; j < 7; ++j) line.at(4, j) = 1;  // collinear
  const WeightResult r1 = moi2_weights(line, 1.0);
  CHECK(r1.flag == WeightFlag::singular_fallback);
  CHECK(r1.map == moi1_weights(line, 1.0).map);
}

TEST_CASE("power_transform: n=1 is the identity, n=2 squares") {
  Rng rng(505);
  const Mask m = testutil::random_oval_mask(rng, 16);
  const WeightMap wm = moi1_weights(m, 1.0).map;
  CHECK(power_transform(wm, 1.0) == wm);

  const WeightMap sq = power_transform(wm, 2.0);
  for (size_t i = 0; i < wm.size(); ++i) {
    CHECK(sq.data()[i] ==
          doctest::Approx(static_cast<double>(wm.data()[i]) * wm.data()[i]).epsilon(1e-6));
  }
  WeightMap half(1, 1, 0.5f);
  CHECK(power_transform(half, 2.0).at(0, 0) == 0.25f);
}

TEST_CASE("power_transform with n>1 never increases a weight and keeps ones") {
  Rng rng(606);
  const Mask m = testutil::random_oval_mask(rng, 16);
  const WeightMap wm = moi2_weights(m, 1.0).map;
  for (double n : {1.5, 2.0, 7.0}) {
    const WeightMap out = power_transform(wm, n);
    for (size_t i = 0; i < wm.size(); ++i) {
      CHECK(out.data()[i] <= wm.data()[i]);
      CHECK(out.data()[i] > 0.0f);
      if (wm.data()[i] == 1.0f) CHECK(out.data()[i] == 1.0f);
    }
  }
  CHECK_THROWS_AS(power_transform(wm, 0.0), InvalidArgument);
  CHECK_THROWS_AS(power_transform(wm, -2.0), InvalidArgument);
}
