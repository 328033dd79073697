#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gafx/market_data.hpp"
#include "gafx/ohlc.hpp"

namespace gafx::testing {

// Valid random window: prices around `base` with random shadows.
inline Window random_window(Rng& rng, double base = 1.1) {
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  std::uniform_real_distribution<double> s(0.0, 0.004);
  Window w;
  double prev = base;
  for (auto& b : w.bars) {
    b.open = prev;
    b.close = prev * (1.0 + u(rng));
    b.high = std::max(b.open, b.close) * (1.0 + s(rng));
    b.low = std::min(b.open, b.close) * (1.0 - s(rng));
    prev = b.close;
  }
  return w;
}

inline std::vector<double> random_unit_series(Rng& rng, std::size_t n = 10) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs(n);
  for (auto& x : xs) x = u(rng);
  return xs;
}

inline OhlcBar bar(double o, double h, double l, double c) { return OhlcBar{o, h, l, c, {}}; }

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("gafx_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace gafx::testing
