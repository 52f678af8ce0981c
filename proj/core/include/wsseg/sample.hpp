#pragma once

#include "wsseg/grid.hpp"

namespace wsseg {

// One training unit in memory.
struct SampleRecord {
  Image image;
  Mask mask;
  WeightMap wmap;
  bool oval = false;
};

}  // namespace wsseg
