#pragma once

#include <string>
#include <string_view>

#include "gafx/gasf.hpp"
#include "gafx/ohlc.hpp"

namespace gafx {

struct PanelAnnotation {
  std::string title;
  int predicted = -1;  // < 0: no prediction line
  double confidence = 0.0;
};

// "#rrggbb" on a blue-white-red scale over [-1, 1]; values are clamped.
std::string diverging_color(double v);

// Ten bars left to right, oldest first. Hollow white bodies for close > open,
// filled black for close < open, a horizontal tick for a doji, wicks from low
// to high. The price axis spans the window range plus a 5% margin.
std::string render_candles(const Window& w, const PanelAnnotation& note = {},
                           std::string_view provenance = {});

// 10x10 heatmap of one channel (0 open, 1 high, 2 low, 3 close) with the
// diagonal cells outlined. Throws UsageError for channel >= 4.
std::string render_gasf(const GasfTensor& t, std::size_t channel, const PanelAnnotation& note = {},
                        std::string_view provenance = {});

// Side-by-side original / attacked panels.
std::string render_candles_pair(const Window& original, const PanelAnnotation& original_note,
                                const Window& attacked, const PanelAnnotation& attacked_note,
                                std::string_view provenance = {});
std::string render_gasf_pair(const GasfTensor& original, const PanelAnnotation& original_note,
                             const GasfTensor& attacked, const PanelAnnotation& attacked_note,
                             std::size_t channel, std::string_view provenance = {});

// Accepts open/high/low/close or 0..3.
std::size_t parse_channel(std::string_view name);

}  // namespace gafx
