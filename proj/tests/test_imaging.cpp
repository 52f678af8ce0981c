#include <doctest.h>

#include "support/testutil.hpp"
#include "wsseg/imaging.hpp"

using namespace wsseg;

namespace {
Image make_image(int h, int w, std::initializer_list<float> vals) {
  Image img(h, w);
  std::copy(vals.begin(), vals.end(), img.data());
  return img;
}
}  // namespace

TEST_CASE("minmax_normalize maps the example grid to exact quarters") {
  const Image img = make_image(2, 2, {0, 2, 4, 8});
  const Image out = minmax_normalize(img);
  CHECK(out.at(0, 0) == 0.0f);
  CHECK(out.at(0, 1) == 0.25f);
  CHECK(out.at(1, 0) == 0.5f);
  CHECK(out.at(1, 1) == 1.0f);
}

TEST_CASE("minmax_normalize maps a constant image to zeros") {
  const Image img(2, 2, 5.0f);
  const Image out = minmax_normalize(img);
  for (float v : out.vec()) CHECK(v == 0.0f);
}

TEST_CASE("minmax_normalize keeps an already normalized image unchanged") {
  const Image img = make_image(2, 2, {0.0f, 0.25f, 0.75f, 1.0f});
  CHECK(minmax_normalize(img) == img);
}

TEST_CASE("minmax_normalize is idempotent on random non-constant images") {
  Rng rng(7);
  for (int round = 0; round < 20; ++round) {
    const Image img = testutil::random_image(rng, 9, 13, -4.0f, 11.0f);
    const Image once = minmax_normalize(img);
    CHECK(minmax_normalize(once) == once);
  }
}

TEST_CASE("minmax_normalize rejects non-finite input") {
  Image img(2, 2, 1.0f);
  img.at(1, 1) = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(minmax_normalize(img), InvalidArgument);
}

TEST_CASE("center_crop drops even margins symmetrically") {
  Image img(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) img.at(i, j) = static_cast<float>(10 * i + j);
  const Image out = center_crop(img, 4, 4);
  CHECK(out.at(0, 0) == 11.0f);  // rows 1..4, cols 1..4
  CHECK(out.at(3, 3) == 44.0f);
}

TEST_CASE("center_crop drops the odd leftover from bottom/right") {
  Image img(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) img.at(i, j) = static_cast<float>(10 * i + j);
  const Image out = center_crop(img, 4, 4);
  CHECK(out.at(0, 0) == 0.0f);  // rows 0..3, cols 0..3
  CHECK(out.at(3, 3) == 33.0f);
}

TEST_CASE("center_crop to the same size is the identity") {
  Rng rng(3);
  const Image img = testutil::random_image(rng, 8, 9);
  CHECK(center_crop(img, 8, 9) == img);
}

TEST_CASE("center_crop rejects oversize requests") {
  const Image img(4, 4, 0.0f);
  CHECK_THROWS_AS(center_crop(img, 5, 4), InvalidArgument);
}

TEST_CASE("resize_bilinear matches the corner-aligned hand example") {
  const Image img = make_image(2, 2, {0, 1, 0, 1});
  const Image out = resize_bilinear(img, 2, 4);
  for (int i = 0; i < 2; ++i) {
    CHECK(out.at(i, 0) == doctest::Approx(0.0));
    CHECK(out.at(i, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(out.at(i, 2) == doctest::Approx(2.0 / 3.0));
    CHECK(out.at(i, 3) == doctest::Approx(1.0));
  }
}

TEST_CASE("resize to identical dimensions reproduces the input bits") {
  Rng rng(11);
  const Image img = testutil::random_image(rng, 7, 5);
  CHECK(resize_bilinear(img, 7, 5) == img);
  CHECK(resize_nearest(img, 7, 5) == img);
}

TEST_CASE("resize of a constant image stays constant") {
  const Image img(3, 4, 0.375f);
  const Image out = resize_bilinear(img, 9, 7);
  for (float v : out.vec()) CHECK(v == 0.375f);
}

TEST_CASE("resize_nearest preserves the mask value set") {
  Rng rng(23);
  Mask m(10, 10, 0);
  for (auto& v : m.vec()) v = rng.bernoulli(0.3) ? 1 : 0;
  const Mask up = resize_nearest(m, 23, 17);
  for (auto v : up.vec()) CHECK((v == 0 || v == 1));
}
