#pragma once

#include <array>

#include "gafx/ohlc.hpp"

namespace gafx {

enum class CandleColor { kWhite, kBlack, kDoji };

struct BarAnatomy {
  double body = 0.0;
  double upper_shadow = 0.0;
  double lower_shadow = 0.0;
  CandleColor color = CandleColor::kDoji;
};

enum class TrendDirection { kUp, kDown, kFlat };

struct TrendContext {
  double slope = 0.0;  // price per bar, least squares over closes of bars 1..7
  TrendDirection direction = TrendDirection::kFlat;
};

// Quantitative reading of the candlestick prose. All values are ratios, so the
// rules are invariant to price scale.
struct RuleThresholds {
  // "tall": body >= tall_body_frac * (high - low) and body >= tall_body_mean_ratio * mean trend body
  double tall_body_frac = 0.6;
  double tall_body_mean_ratio = 1.2;
  // "small-bodied": body <= small_body_frac * mean trend body
  double small_body_frac = 0.3;
  // "little or no shadow": shadow <= tiny_shadow_frac * body
  double tiny_shadow_frac = 0.25;
  // up iff slope > trend_slope_frac * window range, down iff < -trend_slope_frac * range
  double trend_slope_frac = 0.02;
  // |close - open| <= doji_rel_tol * close counts as open == close
  double doji_rel_tol = 1e-9;

  friend bool operator==(const RuleThresholds&, const RuleThresholds&) = default;
};

BarAnatomy anatomy(const OhlcBar& bar, const RuleThresholds& th = {});

TrendContext trend(const Window& w, const RuleThresholds& th = {});

// Raw detector results indexed by label code; entry 0 is always false.
std::array<bool, kNumClasses> raw_matches(const Window& w, const RuleThresholds& th = {});

// Resolves raw matches by priority: three-bar > two-bar > one-bar, lowest code
// within a tier. Returns kNone when no detector fires.
PatternLabel detect_pattern(const Window& w, const RuleThresholds& th = {});

}  // namespace gafx
