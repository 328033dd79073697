#include "gafx/gasf.hpp"

#include <algorithm>
#include <cmath>

#include "gafx/binary_io.hpp"
#include "gafx/errors.hpp"

namespace gafx {

namespace {

constexpr double kDomainTol = 1e-12;

double checked_unit(double x) {
  if (!(x >= -kDomainTol && x <= 1.0 + kDomainTol)) {
    throw DomainError("normalized value " + std::to_string(x) + " outside [0, 1]");
  }
  return std::clamp(x, 0.0, 1.0);
}

std::array<double, kChannels> prices(const OhlcBar& b) { return {b.open, b.high, b.low, b.close}; }

}  // namespace

Series GasfTensor::diagonal(std::size_t c) const {
  Series d{};
  for (std::size_t i = 0; i < kSide; ++i) {
    d[i] = at(c, i, i);
  }
  return d;
}

PolarSeries to_polar(std::span<const double> xs) {
  PolarSeries p;
  p.angles.reserve(xs.size());
  p.radii.reserve(xs.size());
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    p.angles.push_back(std::acos(checked_unit(xs[i])));
    p.radii.push_back(static_cast<double>(i + 1) / n);
  }
  return p;
}

NormalizedSeries normalize(const Window& w) {
  NormalizedSeries s;
  double lo = w.bars[0].low;
  double hi = w.bars[0].high;
  for (const auto& b : w.bars) {
    for (double p : prices(b)) {
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
  }
  s.norm = {lo, hi};
  s.degenerate = !(hi > lo);
  const double span = hi - lo;
  for (std::size_t i = 0; i < kWindowLength; ++i) {
    const auto p = prices(w.bars[i]);
    for (std::size_t c = 0; c < kChannels; ++c) {
      s.channels[c][i] = s.degenerate ? 0.5 : std::clamp((p[c] - lo) / span, 0.0, 1.0);
    }
  }
  return s;
}

std::vector<double> gasf_matrix(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<double> x(n), s(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = checked_unit(xs[i]);
    s[i] = std::sqrt((1.0 - x[i]) * (1.0 + x[i]));
  }
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i * n + i] = std::fma(2.0 * x[i], x[i], -1.0);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::clamp(x[i] * x[j] - s[i] * s[j], -1.0, 1.0);
      g[i * n + j] = v;
      g[j * n + i] = v;
    }
  }
  return g;
}

std::vector<double> gasf_matrix_trig(std::span<const double> xs) {
  const std::size_t n = xs.size();
  const auto polar = to_polar(xs);
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = std::cos(polar.angles[i] + polar.angles[j]);
      g[i * n + j] = v;
      g[j * n + i] = v;
    }
  }
  return g;
}

GasfTensor encode(const NormalizedSeries& s) {
  GasfTensor t;
  t.norm = s.norm;
  t.degenerate = s.degenerate;
  for (std::size_t c = 0; c < kChannels; ++c) {
    const auto g = gasf_matrix(s.channels[c]);
    std::copy(g.begin(), g.end(), t.channels[c].begin());
  }
  return t;
}

GasfTensor encode(const Window& w) { return encode(normalize(w)); }

double decode_value(double d) {
  if (!(d >= -1.0 - kDomainTol && d <= 1.0 + kDomainTol)) {
    throw DomainError("GASF diagonal entry " + std::to_string(d) + " outside [-1, 1]");
  }
  d = std::clamp(d, -1.0, 1.0);
  // Half-angle identity; 1 + d is exact on [-1, -0.5] where the angle form loses digits.
  return std::sqrt(0.5 * (1.0 + d));
}

std::vector<double> decode_diagonal(std::span<const double> diag) {
  std::vector<double> x;
  x.reserve(diag.size());
  for (double d : diag) {
    x.push_back(decode_value(d));
  }
  return x;
}

NormalizedSeries decode(const GasfTensor& t) {
  NormalizedSeries s;
  s.norm = t.norm;
  s.degenerate = t.degenerate;
  for (std::size_t c = 0; c < kChannels; ++c) {
    for (std::size_t i = 0; i < kSide; ++i) {
      s.channels[c][i] = decode_value(t.at(c, i, i));
    }
  }
  return s;
}

Window denormalize(const NormalizedSeries& s) {
  if (s.degenerate || !(s.norm.max > s.norm.min)) {
    throw DomainError("cannot denormalize a degenerate window (max == min)");
  }
  const double span = s.norm.max - s.norm.min;
  Window w;
  for (std::size_t i = 0; i < kWindowLength; ++i) {
    auto& b = w.bars[i];
    b.open = s.channels[0][i] * span + s.norm.min;
    b.high = s.channels[1][i] * span + s.norm.min;
    b.low = s.channels[2][i] * span + s.norm.min;
    b.close = s.channels[3][i] * span + s.norm.min;
    b.high = std::max({b.open, b.high, b.low, b.close});
    b.low = std::min({b.open, b.high, b.low, b.close});
  }
  return w;
}

namespace {
constexpr std::string_view kTensorMagic = "GASF";
constexpr std::uint32_t kTensorVersion = 1;
}  // namespace

std::string serialize_tensor(const GasfTensor& t) {
  ByteWriter w;
  w.raw(kTensorMagic);
  w.u32(kTensorVersion);
  w.u32(kChannels);
  w.u32(kSide);
  for (const auto& m : t.channels) {
    for (double v : m) {
      w.f64(v);
    }
  }
  w.f64(t.norm.min);
  w.f64(t.norm.max);
  w.u8(t.degenerate ? 1 : 0);
  return w.bytes();
}

GasfTensor deserialize_tensor(std::string_view bytes) {
  ByteReader r(bytes, "GASF tensor");
  r.expect_magic(kTensorMagic);
  if (auto v = r.u32(); v != kTensorVersion) {
    throw FormatError("GASF tensor: unsupported version " + std::to_string(v));
  }
  const auto channels = r.u32();
  const auto side = r.u32();
  if (channels != kChannels || side != kSide) {
    throw FormatError("GASF tensor: expected " + std::to_string(kChannels) + "x" +
                      std::to_string(kSide) + "x" + std::to_string(kSide) + ", found " +
                      std::to_string(channels) + "x" + std::to_string(side) + "x" +
                      std::to_string(side));
  }
  GasfTensor t;
  for (auto& m : t.channels) {
    for (double& v : m) {
      v = r.f64();
    }
  }
  t.norm.min = r.f64();
  t.norm.max = r.f64();
  const auto flag = r.u8();
  if (flag > 1) {
    throw FormatError("GASF tensor: bad degenerate flag");
  }
  t.degenerate = flag == 1;
  r.expect_end();
  return t;
}

}  // namespace gafx
