#include "gafx/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "gafx/errors.hpp"
#include "gafx/patterns.hpp"

namespace gafx {

namespace {

constexpr double kCandlePanelW = 420.0;
constexpr double kCandlePanelH = 300.0;
constexpr double kHeaderH = 40.0;
constexpr double kCell = 24.0;
constexpr double kGasfPanelW = kCell * kSide + 40.0;
constexpr double kGasfPanelH = kHeaderH + kCell * kSide + 40.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void open_svg(std::ostringstream& out, double w, double h, std::string_view provenance) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(w)
      << "\" height=\"" << num(h) << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\">\n";
  if (!provenance.empty()) {
    out << "<metadata>" << escape(provenance) << "</metadata>\n";
  }
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" fill=\"#f7f7f7\"/>\n";
}

void annotate(std::ostringstream& out, double x0, double y0, const PanelAnnotation& note) {
  if (!note.title.empty()) {
    out << "<text x=\"" << num(x0 + 8) << "\" y=\"" << num(y0 + 16)
        << "\" font-family=\"sans-serif\" font-size=\"13\">" << escape(note.title) << "</text>\n";
  }
  if (note.predicted >= 0) {
    std::string name = note.predicted < static_cast<int>(kNumClasses)
                           ? std::string(label_name(static_cast<PatternLabel>(note.predicted)))
                           : "?";
    char conf[32];
    std::snprintf(conf, sizeof conf, "%.3f", note.confidence);
    out << "<text class=\"prediction\" x=\"" << num(x0 + 8) << "\" y=\"" << num(y0 + 33)
        << "\" font-family=\"sans-serif\" font-size=\"12\">predicted " << note.predicted << " ("
        << escape(name) << "), confidence " << conf << "</text>\n";
  }
}

void draw_candles(std::ostringstream& out, double x0, double y0, const Window& w,
                  const PanelAnnotation& note) {
  annotate(out, x0, y0, note);
  double hi = w.bars[0].high, lo = w.bars[0].low;
  for (const auto& b : w.bars) {
    hi = std::max(hi, b.high);
    lo = std::min(lo, b.low);
  }
  double margin = 0.05 * (hi - lo);
  if (!(margin > 0.0)) {
    margin = 0.05 * std::max(std::abs(hi), 1e-12);
  }
  const double top = hi + margin, bottom = lo - margin;
  const double plot_y = y0 + kHeaderH, plot_h = kCandlePanelH - kHeaderH - 10.0;
  const double slot = (kCandlePanelW - 20.0) / kWindowLength;
  const double body_w = slot * 0.6;
  auto ypos = [&](double p) { return plot_y + (top - p) / (top - bottom) * plot_h; };

  out << "<g class=\"candles\">\n";
  for (std::size_t i = 0; i < kWindowLength; ++i) {
    const auto& b = w.bars[i];
    const double cx = x0 + 10.0 + slot * (static_cast<double>(i) + 0.5);
    out << "<line class=\"wick\" x1=\"" << num(cx) << "\" y1=\"" << num(ypos(b.high)) << "\" x2=\""
        << num(cx) << "\" y2=\"" << num(ypos(b.low)) << "\" stroke=\"#000000\"/>\n";
    const auto a = anatomy(b);
    if (a.color == CandleColor::kDoji) {
      out << "<line class=\"candle doji\" x1=\"" << num(cx - body_w / 2) << "\" y1=\""
          << num(ypos(b.close)) << "\" x2=\"" << num(cx + body_w / 2) << "\" y2=\""
          << num(ypos(b.close)) << "\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
      continue;
    }
    const bool white = a.color == CandleColor::kWhite;
    const double y_top = ypos(std::max(b.open, b.close));
    const double y_bot = ypos(std::min(b.open, b.close));
    out << "<rect class=\"candle " << (white ? "white" : "black") << "\" x=\""
        << num(cx - body_w / 2) << "\" y=\"" << num(y_top) << "\" width=\"" << num(body_w)
        << "\" height=\"" << num(std::max(y_bot - y_top, 0.5)) << "\" fill=\""
        << (white ? "#ffffff" : "#000000") << "\" stroke=\"#000000\"/>\n";
  }
  out << "</g>\n";
}

void draw_gasf(std::ostringstream& out, double x0, double y0, const GasfTensor& t, std::size_t ch,
               const PanelAnnotation& note) {
  annotate(out, x0, y0, note);
  const double gx = x0 + 20.0, gy = y0 + kHeaderH;
  out << "<g class=\"heatmap\">\n";
  for (std::size_t i = 0; i < kSide; ++i) {
    for (std::size_t j = 0; j < kSide; ++j) {
      out << "<rect class=\"cell\" data-row=\"" << i << "\" data-col=\"" << j << "\" x=\""
          << num(gx + kCell * static_cast<double>(j)) << "\" y=\""
          << num(gy + kCell * static_cast<double>(i)) << "\" width=\"" << num(kCell)
          << "\" height=\"" << num(kCell) << "\" fill=\"" << diverging_color(t.at(ch, i, j))
          << "\"/>\n";
    }
  }
  for (std::size_t i = 0; i < kSide; ++i) {
    out << "<rect class=\"diag\" x=\"" << num(gx + kCell * static_cast<double>(i)) << "\" y=\""
        << num(gy + kCell * static_cast<double>(i)) << "\" width=\"" << num(kCell)
        << "\" height=\"" << num(kCell) << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
  }
  out << "</g>\n";
  const double ly = gy + kCell * kSide + 10.0;
  for (int k = 0; k <= 20; ++k) {
    const double v = -1.0 + 0.1 * k;
    out << "<rect class=\"legend\" x=\"" << num(gx + k * (kCell * kSide / 21.0)) << "\" y=\""
        << num(ly) << "\" width=\"" << num(kCell * kSide / 21.0) << "\" height=\"8\" fill=\""
        << diverging_color(v) << "\"/>\n";
  }
  out << "<text x=\"" << num(gx) << "\" y=\"" << num(ly + 22)
      << "\" font-family=\"sans-serif\" font-size=\"10\">-1</text>\n"
      << "<text x=\"" << num(gx + kCell * kSide - 8) << "\" y=\"" << num(ly + 22)
      << "\" font-family=\"sans-serif\" font-size=\"10\">1</text>\n";
}

void check_channel(std::size_t ch) {
  if (ch >= kChannels) {
    throw UsageError("invalid GASF channel " + std::to_string(ch) + " (expected 0..3)");
  }
}

}  // namespace

std::string diverging_color(double v) {
  if (std::isnan(v)) {
    v = 0.0;
  }
  v = std::clamp(v, -1.0, 1.0);
  // blue (33,102,172) at -1, white at 0, red (178,24,43) at +1
  const double lo[3] = {33, 102, 172}, hi[3] = {178, 24, 43};
  int rgb[3];
  for (int k = 0; k < 3; ++k) {
    const double end = v < 0.0 ? lo[k] : hi[k];
    const double a = std::abs(v);
    rgb[k] = static_cast<int>(std::lround(255.0 + (end - 255.0) * a));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::string render_candles(const Window& w, const PanelAnnotation& note, std::string_view provenance) {
  std::ostringstream out;
  open_svg(out, kCandlePanelW, kCandlePanelH, provenance);
  draw_candles(out, 0.0, 0.0, w, note);
  out << "</svg>\n";
  return out.str();
}

std::string render_gasf(const GasfTensor& t, std::size_t channel, const PanelAnnotation& note,
                        std::string_view provenance) {
  check_channel(channel);
  std::ostringstream out;
  open_svg(out, kGasfPanelW, kGasfPanelH, provenance);
  draw_gasf(out, 0.0, 0.0, t, channel, note);
  out << "</svg>\n";
  return out.str();
}

std::string render_candles_pair(const Window& original, const PanelAnnotation& original_note,
                                const Window& attacked, const PanelAnnotation& attacked_note,
                                std::string_view provenance) {
  std::ostringstream out;
  open_svg(out, 2 * kCandlePanelW, kCandlePanelH, provenance);
  draw_candles(out, 0.0, 0.0, original, original_note);
  draw_candles(out, kCandlePanelW, 0.0, attacked, attacked_note);
  out << "</svg>\n";
  return out.str();
}

std::string render_gasf_pair(const GasfTensor& original, const PanelAnnotation& original_note,
                             const GasfTensor& attacked, const PanelAnnotation& attacked_note,
                             std::size_t channel, std::string_view provenance) {
  check_channel(channel);
  std::ostringstream out;
  open_svg(out, 2 * kGasfPanelW, kGasfPanelH, provenance);
  draw_gasf(out, 0.0, 0.0, original, channel, original_note);
  draw_gasf(out, kGasfPanelW, 0.0, attacked, channel, attacked_note);
  out << "</svg>\n";
  return out.str();
}

std::size_t parse_channel(std::string_view name) {
  if (name == "open" || name == "0") return 0;
  if (name == "high" || name == "1") return 1;
  if (name == "low" || name == "2") return 2;
  if (name == "close" || name == "3") return 3;
  throw UsageError("invalid GASF channel \"" + std::string(name) + "\" (open, high, low, close)");
}

}  // namespace gafx
