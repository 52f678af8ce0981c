#include "wsseg/imageio.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

namespace wsseg {

namespace {

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return bytes;
}

void spit(const std::filesystem::path& path, const std::string& header,
          const void* payload, size_t payload_bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f.write(header.data(), static_cast<std::streamsize>(header.size()));
  f.write(static_cast<const char*>(payload), static_cast<std::streamsize>(payload_bytes));
  if (!f) throw FormatError("short write to " + path.string());
}

class Cursor {
 public:
  Cursor(const std::vector<char>& bytes, std::string file) : bytes_(bytes), file_(std::move(file)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(file_ + ": " + what + " at byte " + std::to_string(pos_));
  }

  bool is_space(char c) const { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string token() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) fail("unexpected end of header");
    const size_t start = pos_;
    while (pos_ < bytes_.size() && !is_space(bytes_[pos_]) && bytes_[pos_] != '#') ++pos_;
    return std::string(bytes_.begin() + start, bytes_.begin() + pos_);
  }

  long parse_long(const std::string& what) {
    const size_t at = pos_;
    const std::string t = token();
    try {
      size_t used = 0;
      const long v = std::stol(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      pos_ = at;
      fail("invalid " + what + " '" + t + "'");
    }
  }

  // Exactly one whitespace byte separates the header from the payload.
  void expect_single_space() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) fail("missing payload separator");
    ++pos_;
  }

  const char* payload(size_t need) {
    if (bytes_.size() - pos_ < need) {
      throw FormatError(file_ + ": truncated payload, need " + std::to_string(need) +
                        " bytes from byte " + std::to_string(pos_) + ", have " +
                        std::to_string(bytes_.size() - pos_));
    }
    return bytes_.data() + pos_;
  }

  size_t pos() const { return pos_; }

 private:
  const std::vector<char>& bytes_;
  std::string file_;
  size_t pos_ = 0;
};

}  // namespace

Mask read_pgm(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  Cursor c(bytes, path.string());
  if (c.token() != "P5") c.fail("not a binary PGM (expected magic P5)");
  const long w = c.parse_long("width");
  const long h = c.parse_long("height");
  const long maxval = c.parse_long("maxval");
  if (w < 1 || h < 1) c.fail("non-positive dimensions");
  if (maxval != 255) c.fail("unsupported maxval " + std::to_string(maxval) + " (expected 255)");
  c.expect_single_space();
  const size_t n = static_cast<size_t>(w) * static_cast<size_t>(h);
  const char* p = c.payload(n);
  Mask mask(static_cast<int>(h), static_cast<int>(w));
  for (size_t i = 0; i < n; ++i) {
    const auto v = static_cast<unsigned char>(p[i]);
    if (v == 0) {
      mask.data()[i] = 0;
    } else if (v == 255) {
      mask.data()[i] = 1;
    } else {
      throw FormatError(path.string() + ": mask pixel value " + std::to_string(v) +
                        " not in {0,255} at byte " + std::to_string(c.pos() + i));
    }
  }
  return mask;
}

void write_pgm(const std::filesystem::path& path, const Mask& mask) {
  require_binary(mask, "write_pgm");
  const std::string header = "P5\n" + std::to_string(mask.width()) + " " +
                             std::to_string(mask.height()) + "\n255\n";
  std::vector<unsigned char> payload(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) payload[i] = mask.data()[i] ? 255 : 0;
  spit(path, header, payload.data(), payload.size());
}

Grid<float> read_pfm(const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little,
                "PFM reader assumes a little-endian host");
  const auto bytes = slurp(path);
  Cursor c(bytes, path.string());
  const std::string magic = c.token();
  if (magic == "PF") c.fail("color PFM not supported (expected grayscale Pf)");
  if (magic != "Pf") c.fail("not a PFM (expected magic Pf)");
  const long w = c.parse_long("width");
  const long h = c.parse_long("height");
  const std::string scale_tok = c.token();
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception&) {
    c.fail("invalid scale '" + scale_tok + "'");
  }
  if (!(scale < 0.0)) c.fail("big-endian PFM (non-negative scale) not supported");
  if (w < 1 || h < 1) c.fail("non-positive dimensions");
  c.expect_single_space();
  const size_t n = static_cast<size_t>(w) * static_cast<size_t>(h);
  const char* p = c.payload(n * sizeof(float));
  Grid<float> grid(static_cast<int>(h), static_cast<int>(w));
  // PFM scanlines run bottom-to-top.
  for (long row = h - 1; row >= 0; --row) {
    const size_t file_row = static_cast<size_t>(h - 1 - row);
    std::memcpy(grid.data() + static_cast<size_t>(row) * w, p + file_row * w * sizeof(float),
                w * sizeof(float));
    for (long col = 0; col < w; ++col) {
      if (!std::isfinite(grid.at(static_cast<int>(row), static_cast<int>(col)))) {
        throw FormatError(path.string() + ": non-finite value at byte " +
                          std::to_string(c.pos() + (file_row * w + col) * sizeof(float)));
      }
    }
  }
  return grid;
}

void write_pfm(const std::filesystem::path& path, const Grid<float>& grid) {
  static_assert(std::endian::native == std::endian::little,
                "PFM writer assumes a little-endian host");
  const std::string header =
      "Pf\n" + std::to_string(grid.width()) + " " + std::to_string(grid.height()) + "\n-1.0\n";
  std::vector<float> payload(grid.size());
  for (int row = grid.height() - 1, out = 0; row >= 0; --row, ++out) {
    std::memcpy(payload.data() + static_cast<size_t>(out) * grid.width(),
                grid.data() + static_cast<size_t>(row) * grid.width(),
                static_cast<size_t>(grid.width()) * sizeof(float));
  }
  spit(path, header, payload.data(), payload.size() * sizeof(float));
}

}  // namespace wsseg
