#include "gafx/patterns.hpp"

#include <algorithm>
#include <cmath>

namespace gafx {

namespace {

struct Context {
  TrendDirection trend;
  double mean_trend_body;
};

double midpoint_of_body(const OhlcBar& b) { return 0.5 * (b.open + b.close); }

bool is_tall(const OhlcBar& b, const BarAnatomy& a, const Context& ctx, const RuleThresholds& th) {
  return a.color != CandleColor::kDoji && a.body >= th.tall_body_frac * (b.high - b.low) &&
         a.body >= th.tall_body_mean_ratio * ctx.mean_trend_body;
}

bool is_small(const BarAnatomy& a, const Context& ctx, const RuleThresholds& th) {
  return a.body <= th.small_body_frac * ctx.mean_trend_body;
}

bool hammer_shape(const BarAnatomy& a, const RuleThresholds& th) {
  return a.color != CandleColor::kDoji && a.lower_shadow >= 2.0 * a.body &&
         a.upper_shadow <= th.tiny_shadow_frac * a.body;
}

bool inverted_hammer_shape(const BarAnatomy& a, const RuleThresholds& th) {
  return a.color != CandleColor::kDoji && a.upper_shadow >= 2.0 * a.body &&
         a.lower_shadow <= th.tiny_shadow_frac * a.body;
}

}  // namespace

BarAnatomy anatomy(const OhlcBar& bar, const RuleThresholds& th) {
  BarAnatomy a;
  const double top = std::max(bar.open, bar.close);
  const double bottom = std::min(bar.open, bar.close);
  a.body = top - bottom;
  a.upper_shadow = bar.high - top;
  a.lower_shadow = bottom - bar.low;
  if (a.body <= th.doji_rel_tol * std::abs(bar.close)) {
    a.color = CandleColor::kDoji;
  } else {
    a.color = bar.close > bar.open ? CandleColor::kWhite : CandleColor::kBlack;
  }
  return a;
}

TrendContext trend(const Window& w, const RuleThresholds& th) {
  constexpr double kCentre = (kTrendBars - 1) / 2.0;
  double mean_close = 0.0;
  for (std::size_t i = 0; i < kTrendBars; ++i) {
    mean_close += w.bars[i].close;
  }
  mean_close /= kTrendBars;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < kTrendBars; ++i) {
    const double dx = static_cast<double>(i) - kCentre;
    sxy += dx * (w.bars[i].close - mean_close);
    sxx += dx * dx;
  }

  double hi = w.bars[0].high;
  double lo = w.bars[0].low;
  for (const auto& b : w.bars) {
    hi = std::max(hi, b.high);
    lo = std::min(lo, b.low);
  }
  const double threshold = th.trend_slope_frac * (hi - lo);

  TrendContext t;
  t.slope = sxy / sxx;
  if (t.slope > threshold && threshold > 0.0) {
    t.direction = TrendDirection::kUp;
  } else if (t.slope < -threshold && threshold > 0.0) {
    t.direction = TrendDirection::kDown;
  }
  return t;
}

std::array<bool, kNumClasses> raw_matches(const Window& w, const RuleThresholds& th) {
  std::array<bool, kNumClasses> m{};

  Context ctx{trend(w, th).direction, 0.0};
  for (std::size_t i = 0; i < kTrendBars; ++i) {
    ctx.mean_trend_body += anatomy(w.bars[i], th).body;
  }
  ctx.mean_trend_body /= kTrendBars;

  const OhlcBar& b8 = w.bars[7];
  const OhlcBar& b9 = w.bars[8];
  const OhlcBar& b10 = w.bars[9];
  const BarAnatomy a8 = anatomy(b8, th);
  const BarAnatomy a9 = anatomy(b9, th);
  const BarAnatomy a10 = anatomy(b10, th);
  const bool down = ctx.trend == TrendDirection::kDown;
  const bool up = ctx.trend == TrendDirection::kUp;

  m[code(PatternLabel::kMorningStar)] =
      down && a8.color == CandleColor::kBlack && is_tall(b8, a8, ctx, th) &&
      is_small(a9, ctx, th) && a10.color == CandleColor::kWhite && is_tall(b10, a10, ctx, th) &&
      b10.close > midpoint_of_body(b8);

  m[code(PatternLabel::kEveningStar)] =
      up && a8.color == CandleColor::kWhite && is_tall(b8, a8, ctx, th) &&
      is_small(a9, ctx, th) && a10.color == CandleColor::kBlack && is_tall(b10, a10, ctx, th) &&
      b10.close < midpoint_of_body(b8);

  m[code(PatternLabel::kBullishEngulfing)] =
      down && a9.color == CandleColor::kBlack && a10.color == CandleColor::kWhite &&
      b10.open <= b9.close && b10.close >= b9.open && a10.body > a9.body;

  m[code(PatternLabel::kBearishEngulfing)] =
      up && a9.color == CandleColor::kWhite && a10.color == CandleColor::kBlack &&
      b10.open >= b9.close && b10.close <= b9.open && a10.body > a9.body;

  const bool hammer = hammer_shape(a10, th);
  const bool inverted = inverted_hammer_shape(a10, th);
  m[code(PatternLabel::kHammer)] = down && hammer;
  m[code(PatternLabel::kHangingMan)] = up && hammer;
  m[code(PatternLabel::kInvertedHammer)] = down && inverted;
  m[code(PatternLabel::kShootingStar)] = up && inverted;
  return m;
}

PatternLabel detect_pattern(const Window& w, const RuleThresholds& th) {
  static constexpr std::array kPriority = {
      PatternLabel::kMorningStar,      PatternLabel::kEveningStar,
      PatternLabel::kBullishEngulfing, PatternLabel::kBearishEngulfing,
      PatternLabel::kHammer,           PatternLabel::kInvertedHammer,
      PatternLabel::kShootingStar,     PatternLabel::kHangingMan,
  };
  const auto m = raw_matches(w, th);
  for (auto l : kPriority) {
    if (m[code(l)]) {
      return l;
    }
  }
  return PatternLabel::kNone;
}

}  // namespace gafx
