#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gafx/ohlc.hpp"

namespace gafx {

inline constexpr std::size_t kChannels = 4;  // open, high, low, close
inline constexpr std::size_t kSide = kWindowLength;

enum class Channel : std::uint8_t { kOpen = 0, kHigh = 1, kLow = 2, kClose = 3 };

using Series = std::array<double, kWindowLength>;
using GasfMatrix = std::array<double, kSide * kSide>;  // row-major

// Joint min/max over all 40 prices of a window.
struct NormRecord {
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const NormRecord&, const NormRecord&) = default;
};

struct NormalizedSeries {
  std::array<Series, kChannels> channels{};  // values in [0, 1]
  NormRecord norm;
  bool degenerate = false;  // flat window; every value is 0.5

  friend bool operator==(const NormalizedSeries&, const NormalizedSeries&) = default;
};

// phi_i = arccos(x_i); r_i = t_i / N with t_i = i + 1. GASF depends only on
// the angles; the radii are kept for completeness.
struct PolarSeries {
  std::vector<double> angles;
  std::vector<double> radii;
};

PolarSeries to_polar(std::span<const double> xs);

struct GasfTensor {
  std::array<GasfMatrix, kChannels> channels{};
  NormRecord norm;
  bool degenerate = false;

  double at(std::size_t c, std::size_t i, std::size_t j) const { return channels[c][i * kSide + j]; }
  double& at(std::size_t c, std::size_t i, std::size_t j) { return channels[c][i * kSide + j]; }
  Series diagonal(std::size_t c) const;

  friend bool operator==(const GasfTensor&, const GasfTensor&) = default;
};

// Degenerate windows (max == min) map every value to 0.5 and set the flag.
NormalizedSeries normalize(const Window& w);

// Product form x_i x_j - sqrt(1 - x_i^2) sqrt(1 - x_j^2), diagonal as the
// correctly rounded 2 x_i^2 - 1. n x n row-major, exactly symmetric.
// Throws DomainError if any x lies outside [0, 1] by more than 1e-12.
std::vector<double> gasf_matrix(std::span<const double> xs);

// Angle form cos(phi_i + phi_j) through to_polar. Same contract as gasf_matrix.
std::vector<double> gasf_matrix_trig(std::span<const double> xs);

GasfTensor encode(const NormalizedSeries& s);
GasfTensor encode(const Window& w);

// x = cos(arccos(d) / 2), evaluated as sqrt((1 + d) / 2). Throws DomainError
// outside [-1, 1] beyond 1e-12.
double decode_value(double d);
std::vector<double> decode_diagonal(std::span<const double> diag);

// Diagonal of every channel back to a normalized series; carries norm record.
NormalizedSeries decode(const GasfTensor& t);

// x = x~ (max - min) + min, then high/low widened to cover open and close.
// Throws DomainError for a degenerate record.
Window denormalize(const NormalizedSeries& s);

// Tensor container: "GASF" magic, u32 version, u32 channels, u32 side,
// channel-major row-major f64 entries, norm min/max, degenerate byte.
std::string serialize_tensor(const GasfTensor& t);
GasfTensor deserialize_tensor(std::string_view bytes);

}  // namespace gafx
