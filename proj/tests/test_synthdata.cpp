#include <doctest.h>

#include <cmath>

#include "support/testutil.hpp"
#include "wsseg/imageio.hpp"
#include "wsseg/manifest.hpp"
#include "wsseg/maskstats.hpp"
#include "wsseg/phantom.hpp"

using namespace wsseg;

namespace {

// A blob is (a rasterization of) a filled ellipse iff it is a sublevel set of
// its own Mahalanobis distance: no background pixel may sit closer than the
// farthest foreground pixel.
bool looks_elliptical(const Mask& truth) {
  const PixelMoments m = foreground_moments(truth);
  if (m.degenerate()) return true;
  const double mu_i = m.mean_i(), mu_j = m.mean_j();
  const double c00 = m.cov_ii(), c01 = m.cov_ij(), c11 = m.cov_jj();
  const double det = c00 * c11 - c01 * c01;
  const double inv00 = c11 / det, inv01 = -c01 / det, inv11 = c00 / det;
  auto d2 = [&](int i, int j) {
    const double di = i - mu_i, dj = j - mu_j;
    return inv00 * di * di + 2.0 * inv01 * di * dj + inv11 * dj * dj;
  };
  double max_fg = 0.0;
  for (int i = 0; i < truth.height(); ++i)
    for (int j = 0; j < truth.width(); ++j)
      if (truth.at(i, j)) max_fg = std::max(max_fg, d2(i, j));
  for (int i = 0; i < truth.height(); ++i)
    for (int j = 0; j < truth.width(); ++j)
      if (!truth.at(i, j) && d2(i, j) < max_fg) return false;
  return true;
}

}  // namespace

TEST_CASE("generate_phantom is bit-deterministic in the seed") {
  const Phantom a = generate_phantom(1234, 64);
  const Phantom b = generate_phantom(1234, 64);
  CHECK(a.image == b.image);
  CHECK(a.truth == b.truth);
  const Phantom c = generate_phantom(1235, 64);
  CHECK(a.image.vec() != c.image.vec());
}

TEST_CASE("generate_phantom keeps the lesion fraction within bounds") {
  for (std::uint64_t seed : {1ULL, 7ULL, 99ULL, 1234ULL, 777777ULL}) {
    const Phantom p = generate_phantom(seed, 64);
    const double frac =
        static_cast<double>(count_foreground(p.truth)) / (64.0 * 64.0);
    CHECK(frac >= 0.005);
    CHECK(frac <= 0.15);
    for (float v : p.image.vec()) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
    CHECK(!p.lesions.empty());
    CHECK(p.lesions.size() <= 3);
  }
}

TEST_CASE("most generated lesions are not perfectly elliptical") {
  int non_elliptical = 0;
  const int total = 1000;
  for (int s = 0; s < total; ++s) {
    const Phantom p = generate_phantom(static_cast<std::uint64_t>(s), 64);
    if (!looks_elliptical(p.truth)) ++non_elliptical;
  }
  CHECK(non_elliptical >= 950);
}

TEST_CASE("fit_oval fully covers a true ellipse") {
  const Mask truth = testutil::oval_mask(48, 48, 23.0, 25.0, 11.0, 7.0, 0.5);
  const OvalFit fit = fit_oval(truth);
  CHECK(!fit.bbox_fallback);
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth.data()[i]) CHECK(fit.mask.data()[i] == 1);
  }
}

TEST_CASE("fit_oval over-covers an L-shaped blob") {
  Mask truth(32, 32, 0);
  for (int i = 0; i < 25; ++i)
    for (int j = 0; j < 5; ++j) truth.at(i + 3, j + 3) = 1;
  for (int i = 20; i < 25; ++i)
    for (int j = 0; j < 20; ++j) truth.at(i + 3, j + 3) = 1;
  REQUIRE(count_foreground(truth) == 200);

  const OvalFit fit = fit_oval(truth);
  CHECK(!fit.bbox_fallback);
  size_t covered = 0;
  for (size_t i = 0; i < truth.size(); ++i) covered += (truth.data()[i] && fit.mask.data()[i]);
  CHECK(covered >= 198);  // >= 99% of 200
  CHECK(count_foreground(fit.mask) > 200);
}

TEST_CASE("fit_oval output is row-convex") {
  Rng rng(31);
  for (int round = 0; round < 5; ++round) {
    const Phantom p = generate_phantom(rng.next_u64(), 64);
    const OvalFit fit = fit_oval(p.truth);
    for (int i = 0; i < fit.mask.height(); ++i) {
      int transitions = 0;
      int prev = 0;
      for (int j = 0; j < fit.mask.width(); ++j) {
        if (fit.mask.at(i, j) != prev) ++transitions;
        prev = fit.mask.at(i, j);
      }
      if (prev) ++transitions;
      CHECK(transitions <= 2);  // at most one contiguous run per row
    }
  }
}

TEST_CASE("fit_oval falls back to the bounding box for degenerate blobs") {
  Mask two(16, 16, 0);
  two.at(4, 4) = 1;
  two.at(9, 11) = 1;
  const OvalFit fit = fit_oval(two);
  CHECK(fit.bbox_fallback);
  for (int i = 4; i <= 9; ++i)
    for (int j = 4; j <= 11; ++j) CHECK(fit.mask.at(i, j) == 1);
  CHECK(count_foreground(fit.mask) == 6 * 8);
}

TEST_CASE("corruption_indices draws disjoint subsets that partition the pool") {
  std::vector<char> seen(40, 0);
  for (int s = 0; s < 5; ++s) {
    const auto idx = corruption_indices(40, 8, 99, s);
    CHECK(idx.size() == 8);
    for (int i : idx) {
      CHECK(!seen[static_cast<size_t>(i)]);
      seen[static_cast<size_t>(i)] = 1;
    }
  }
  for (char c : seen) CHECK(c == 1);
  CHECK(corruption_indices(40, 8, 99, 2) == corruption_indices(40, 8, 99, 2));
  CHECK_THROWS_AS(corruption_indices(10, 8, 99, 1), ConfigError);
}

TEST_CASE("corrupt_dataset rewrites the chosen masks as flagged ovals") {
  testutil::TempDir dir("corrupt");
  DatasetManifest base;
  for (int i = 0; i < 6; ++i) {
    const Phantom p = generate_phantom(static_cast<std::uint64_t>(i), 64);
    const std::string img = "img_" + std::to_string(i) + ".pfm";
    const std::string mask = "mask_" + std::to_string(i) + ".pgm";
    write_pfm(dir.path() / img, p.image);
    write_pgm(dir.path() / mask, p.truth);
    base.records.push_back({i, img, mask, false, "-"});
  }

  const DatasetManifest same = corrupt_dataset(base, dir.path(), 0, 7, 0);
  CHECK(same.records.size() == base.records.size());
  for (const auto& r : same.records) CHECK(!r.oval);

  const DatasetManifest cor = corrupt_dataset(base, dir.path(), 2, 7, 0);
  int flagged = 0;
  for (size_t i = 0; i < cor.records.size(); ++i) {
    const auto& r = cor.records[i];
    if (!r.oval) {
      CHECK(r.mask_path == base.records[i].mask_path);
      continue;
    }
    ++flagged;
    const Mask oval = read_pgm(dir.path() / r.mask_path);
    const Mask truth = read_pgm(dir.path() / base.records[i].mask_path);
    CHECK(count_foreground(oval) > count_foreground(truth));
    CHECK(r.image_path == base.records[i].image_path);  // images untouched
  }
  CHECK(flagged == 2);

  const auto path = dir.path() / "manifest.tsv";
  write_manifest(path, cor);
  const DatasetManifest back = read_manifest(path);
  CHECK(back.records.size() == cor.records.size());
  CHECK(back.k_corrupted == 2);
  for (size_t i = 0; i < back.records.size(); ++i) {
    CHECK(back.records[i].oval == cor.records[i].oval);
    CHECK(back.records[i].mask_path == cor.records[i].mask_path);
  }
}
