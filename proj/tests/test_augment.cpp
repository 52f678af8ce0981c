#include <doctest.h>

#include "support/testutil.hpp"
#include "wsseg/augment.hpp"
#include "wsseg/phantom.hpp"
#include "wsseg/weakmodels.hpp"

using namespace wsseg;

namespace {

SampleRecord make_sample(std::uint64_t seed) {
  const Phantom p = generate_phantom(seed, 64);
  SampleRecord s;
  s.image = p.image;
  s.mask = p.truth;
  s.wmap = moi1_weights(p.truth, 1.0).map;
  return s;
}

}  // namespace

TEST_CASE("a seed whose coins all miss leaves the sample untouched") {
  std::uint64_t identity_seed = 0;
  bool found = false;
  for (std::uint64_t s = 0; s < 512 && !found; ++s) {
    const AugmentParams p = draw_augment_params(s);
    if (!p.flip && !p.rotate && !p.crop && !p.elastic) {
      identity_seed = s;
      found = true;
    }
  }
  REQUIRE(found);
  const SampleRecord in = make_sample(5);
  const SampleRecord out = augment(in, identity_seed);
  CHECK(out.image == in.image);
  CHECK(out.mask == in.mask);
  CHECK(out.wmap == in.wmap);
}

TEST_CASE("horizontal flip is an involution") {
  const SampleRecord in = make_sample(17);
  CHECK(hflip(hflip(in.mask)) == in.mask);
  CHECK(hflip(hflip(in.image)) == in.image);
}

TEST_CASE("augment is deterministic in the seed") {
  const SampleRecord in = make_sample(23);
  const SampleRecord a = augment(in, 909);
  const SampleRecord b = augment(in, 909);
  CHECK(a.image == b.image);
  CHECK(a.mask == b.mask);
  CHECK(a.wmap == b.wmap);
}

TEST_CASE("augmentation preserves shapes, binarity and confidence range") {
  const SampleRecord in = make_sample(31);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SampleRecord out = augment(in, seed);
    CHECK(out.image.height() == in.image.height());
    CHECK(out.image.width() == in.image.width());
    CHECK(out.mask.same_shape(in.mask));
    CHECK(out.wmap.same_shape(in.wmap));
    for (auto v : out.mask.vec()) CHECK((v == 0 || v == 1));
    for (float v : out.wmap.vec()) {
      CHECK(v > 0.0f);
      CHECK(v <= 1.0f);
    }
    for (float v : out.image.vec()) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
  }
}

TEST_CASE("the same spatial transform hits image and mask") {
  // With rotation only, foreground pixel counts change little; flipping only
  // the mask would desync them wholesale. Compare mask-vs-image alignment by
  // rotating a sample whose lesion is bright in an otherwise empty image.
  Image img(64, 64, 0.0f);
  Mask mask(64, 64, 0);
  for (int i = 20; i < 30; ++i) {
    for (int j = 35; j < 45; ++j) {
      img.at(i, j) = 1.0f;
      mask.at(i, j) = 1;
    }
  }
  SampleRecord s{img, mask, WeightMap(64, 64, 1.0f), false};

  AugmentParams p;
  p.rotate = true;
  p.angle = 0.2;
  const SampleRecord out = apply_augment(s, p);
  // Every strongly bright pixel must be inside the rotated mask.
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) {
      if (out.image.at(i, j) > 0.99f) CHECK(out.mask.at(i, j) == 1);
    }
  }
}

TEST_CASE("elastic fields are seed-deterministic and bounded by alpha") {
  ElasticParams cfg;
  const DisplacementField f1 = elastic_field(64, 64, cfg, 77);
  const DisplacementField f2 = elastic_field(64, 64, cfg, 77);
  CHECK(f1.di == f2.di);
  CHECK(f1.dj == f2.dj);
  float peak = 0.0f;
  for (size_t i = 0; i < f1.di.size(); ++i) {
    peak = std::max({peak, std::abs(f1.di.data()[i]), std::abs(f1.dj.data()[i])});
  }
  CHECK(peak <= static_cast<float>(cfg.alpha) * 1.0001f);
  CHECK(peak > 1.0f);  // the field actually moves pixels
}
