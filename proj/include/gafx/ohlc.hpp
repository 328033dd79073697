#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace gafx {

inline constexpr std::size_t kWindowLength = 10;
// Bars 1..7 carry the trend; bars 8..10 carry the pattern.
inline constexpr std::size_t kTrendBars = 7;
inline constexpr std::size_t kNumClasses = 9;

struct OhlcBar {
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  std::optional<std::int64_t> timestamp;  // epoch milliseconds

  friend bool operator==(const OhlcBar&, const OhlcBar&) = default;
};

// Positive finite prices with low <= min(open, close) <= max(open, close) <= high.
bool is_valid_bar(const OhlcBar& bar) noexcept;

// Exactly ten bars, oldest first.
struct Window {
  std::array<OhlcBar, kWindowLength> bars{};

  friend bool operator==(const Window&, const Window&) = default;
};

bool is_valid_window(const Window& w) noexcept;

enum class PatternLabel : std::uint8_t {
  kNone = 0,
  kMorningStar = 1,
  kEveningStar = 2,
  kHammer = 3,
  kInvertedHammer = 4,
  kBullishEngulfing = 5,
  kBearishEngulfing = 6,
  kShootingStar = 7,
  kHangingMan = 8,
};

constexpr int code(PatternLabel l) { return static_cast<int>(l); }

// Throws UsageError when c is outside 0..8.
PatternLabel label_from_code(int c);

std::string_view label_name(PatternLabel l);

struct LabeledWindow {
  Window window;
  PatternLabel label = PatternLabel::kNone;

  friend bool operator==(const LabeledWindow&, const LabeledWindow&) = default;
};

}  // namespace gafx
