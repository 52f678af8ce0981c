#include <doctest.h>

#include <cstring>
#include <fstream>

#include "support/testutil.hpp"
#include "wsseg/imageio.hpp"

using namespace wsseg;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("pgm round-trips masks and reproduces canonical files byte for byte") {
  testutil::TempDir dir("pgm");
  Rng rng(5);
  Mask m(12, 9, 0);
  for (auto& v : m.vec()) v = rng.bernoulli(0.4) ? 1 : 0;

  const auto p1 = dir.path() / "a.pgm";
  write_pgm(p1, m);
  const Mask back = read_pgm(p1);
  CHECK(back == m);

  const auto p2 = dir.path() / "b.pgm";
  write_pgm(p2, back);
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("pgm rejects non-255 maxval") {
  testutil::TempDir dir("pgm");
  const auto p = dir.path() / "wide.pgm";
  spit(p, std::string("P5\n2 1\n65535\n") + std::string(4, '\0'));
  CHECK_THROWS_AS(read_pgm(p), FormatError);
}

TEST_CASE("pgm rejects gray pixels with the byte offset") {
  testutil::TempDir dir("pgm");
  const auto p = dir.path() / "gray.pgm";
  std::string bytes = "P5\n2 1\n255\n";
  bytes.push_back('\x00');
  bytes.push_back('\x80');  // 128: neither 0 nor 255
  spit(p, bytes);
  try {
    read_pgm(p);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    const std::string what = e.what();
    CHECK(what.find("byte 12") != std::string::npos);
  }
}

TEST_CASE("pgm truncated payload is a format error") {
  testutil::TempDir dir("pgm");
  const auto p = dir.path() / "short.pgm";
  spit(p, std::string("P5\n4 4\n255\n") + std::string(3, '\0'));
  CHECK_THROWS_AS(read_pgm(p), FormatError);
}

TEST_CASE("pfm writes the documented 1x1 layout") {
  testutil::TempDir dir("pfm");
  Grid<float> g(1, 1, 0.5f);
  const auto p = dir.path() / "half.pfm";
  write_pfm(p, g);
  const std::string bytes = slurp(p);
  CHECK(bytes.size() == 16);  // "Pf\n1 1\n-1.0\n" + 4 payload bytes
  CHECK(bytes.substr(0, 12) == "Pf\n1 1\n-1.0\n");
  float v;
  std::memcpy(&v, bytes.data() + 12, 4);
  CHECK(v == 0.5f);
}

TEST_CASE("pfm round-trips float grids losslessly") {
  testutil::TempDir dir("pfm");
  Rng rng(9);
  const Image img = testutil::random_image(rng, 6, 11, -3.0f, 3.0f);
  const auto p1 = dir.path() / "a.pfm";
  write_pfm(p1, img);
  const Grid<float> back = read_pfm(p1);
  CHECK(back == img);

  const auto p2 = dir.path() / "b.pfm";
  write_pfm(p2, back);
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("pfm rejects big-endian and color variants") {
  testutil::TempDir dir("pfm");
  const auto p = dir.path() / "bad.pfm";
  spit(p, std::string("Pf\n1 1\n1.0\n") + std::string(4, '\0'));
  CHECK_THROWS_AS(read_pfm(p), FormatError);
  spit(p, std::string("PF\n1 1\n-1.0\n") + std::string(12, '\0'));
  CHECK_THROWS_AS(read_pfm(p), FormatError);
}

TEST_CASE("pfm truncation names the byte offset") {
  testutil::TempDir dir("pfm");
  const auto p = dir.path() / "short.pfm";
  spit(p, std::string("Pf\n2 2\n-1.0\n") + std::string(4, '\0'));
  try {
    read_pfm(p);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
}
