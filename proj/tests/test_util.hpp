#ifndef PERIFSI_TEST_UTIL_HPP
#define PERIFSI_TEST_UTIL_HPP

#include <random>

#include "perifsi/common.hpp"

namespace perifsi::testutil {

inline std::mt19937& rng() {
  static std::mt19937 gen(20240817u);
  return gen;
}

inline double uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng());
}

inline Vec2 uniform_point(const Rect& r, double margin = 0.0) {
  return {uniform(r.x0 + margin, r.x1 - margin),
          uniform(r.y0 + margin, r.y1 - margin)};
}

}  // namespace perifsi::testutil

#endif
