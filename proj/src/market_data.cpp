#include "gafx/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "gafx/binary_io.hpp"
#include "gafx/errors.hpp"
#include "gafx/kernels.hpp"

namespace gafx {

bool is_valid_bar(const OhlcBar& b) noexcept {
  for (double p : {b.open, b.high, b.low, b.close}) {
    if (!std::isfinite(p) || p <= 0.0) {
      return false;
    }
  }
  return b.low <= std::min(b.open, b.close) && std::max(b.open, b.close) <= b.high;
}

bool is_valid_window(const Window& w) noexcept {
  return std::all_of(w.bars.begin(), w.bars.end(), is_valid_bar);
}

PatternLabel label_from_code(int c) {
  if (c < 0 || c >= static_cast<int>(kNumClasses)) {
    throw UsageError("pattern label out of range: " + std::to_string(c));
  }
  return static_cast<PatternLabel>(c);
}

std::string_view label_name(PatternLabel l) {
  switch (l) {
    case PatternLabel::kNone: return "none";
    case PatternLabel::kMorningStar: return "morning star";
    case PatternLabel::kEveningStar: return "evening star";
    case PatternLabel::kHammer: return "hammer";
    case PatternLabel::kInvertedHammer: return "inverted hammer";
    case PatternLabel::kBullishEngulfing: return "bullish engulfing";
    case PatternLabel::kBearishEngulfing: return "bearish engulfing";
    case PatternLabel::kShootingStar: return "shooting star";
    case PatternLabel::kHangingMan: return "hanging man";
  }
  return "?";
}

Rng make_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xFFFFFFFFu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(a), hi(a), lo(b), hi(b)};
  return Rng(seq);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) {
    return {};
  }
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Reads one RFC-4180 record. Quoted fields may span lines; `line` advances by
// the number of physical lines consumed. Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  std::string physical;
  if (!std::getline(in, physical)) {
    return false;
  }
  ++line;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i == physical.size()) {
      if (quoted) {
        field.push_back('\n');
        if (!std::getline(in, physical)) {
          break;  // unterminated quote: take what we have
        }
        ++line;
        i = 0;
        continue;
      }
      break;
    }
    char c = physical[i++];
    if (quoted) {
      if (c == '"') {
        if (i < physical.size() && physical[i] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return true;
}

std::optional<double> parse_price(const std::string& raw) {
  std::string s = trim(raw);
  if (s.empty()) {
    return std::nullopt;
  }
  const char* first = s.data();
  if (*first == '+') {
    ++first;
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

std::optional<std::int64_t> parse_timestamp(const std::string& raw) {
  std::string s = trim(raw);
  if (s.empty()) {
    return std::nullopt;
  }
  std::int64_t epoch = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), epoch);
  if (ec == std::errc() && ptr == s.data() + s.size()) {
    return epoch;
  }

  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0.0;
  char sep1 = 0, sep2 = 0, t = 0;
  std::istringstream is(s);
  is >> y >> sep1 >> mo >> sep2 >> d;
  if (!is || sep1 != sep2 || (sep1 != '-' && sep1 != '.' && sep1 != '/')) {
    return std::nullopt;
  }
  if (is.peek() == 'T' || is.peek() == ' ') {
    is.get(t);
    char c1 = 0;
    is >> h >> c1 >> mi;
    if (!is || c1 != ':') {
      return std::nullopt;
    }
    if (is.peek() == ':') {
      is.get();
      is >> sec;
      if (!is) {
        return std::nullopt;
      }
    }
  }
  if (is.peek() == 'Z') {
    is.get();
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    return std::nullopt;
  }

  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0.0 || sec >= 61.0) {
    return std::nullopt;
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86'400'000 + static_cast<std::int64_t>(h) * 3'600'000 +
         static_cast<std::int64_t>(mi) * 60'000 + std::llround(sec * 1000.0);
}

}  // namespace

CsvParseResult parse_csv(std::istream& in, const CsvSchema& schema) {
  CsvParseResult result;
  std::vector<std::string> fields;
  std::size_t line = 0;
  if (!read_record(in, fields, line)) {
    throw SchemaError("CSV has no header row");
  }
  std::vector<std::string> header;
  for (auto& f : fields) {
    header.push_back(lower(trim(f)));
  }
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), lower(trim(name)));
    if (it == header.end()) {
      throw SchemaError("CSV header is missing column \"" + name + "\"");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::optional<std::size_t> ts_col =
      schema.timestamp.empty() ? std::nullopt : std::optional(column(schema.timestamp));
  const std::array<std::size_t, 4> price_cols = {column(schema.open), column(schema.high),
                                                 column(schema.low), column(schema.close)};
  static constexpr std::array<const char*, 4> kNames = {"open", "high", "low", "close"};

  while (true) {
    const std::size_t row_line = line + 1;
    if (!read_record(in, fields, line)) {
      break;
    }
    if (fields.size() == 1 && trim(fields[0]).empty()) {
      continue;  // blank line
    }
    auto fail = [&](std::string msg) { result.errors.push_back({row_line, std::move(msg)}); };
    if (fields.size() < header.size()) {
      fail("expected " + std::to_string(header.size()) + " fields, found " +
           std::to_string(fields.size()));
      continue;
    }
    OhlcBar bar;
    std::array<double*, 4> dst = {&bar.open, &bar.high, &bar.low, &bar.close};
    bool ok = true;
    for (std::size_t k = 0; k < 4 && ok; ++k) {
      auto v = parse_price(fields[price_cols[k]]);
      if (!v) {
        fail(std::string("non-numeric ") + kNames[k] + " \"" + fields[price_cols[k]] + "\"");
        ok = false;
      } else {
        *dst[k] = *v;
      }
    }
    if (!ok) {
      continue;
    }
    if (ts_col) {
      bar.timestamp = parse_timestamp(fields[*ts_col]);
      if (!bar.timestamp) {
        fail("unparseable timestamp \"" + fields[*ts_col] + "\"");
        continue;
      }
    }
    if (!is_valid_bar(bar)) {
      fail("OHLC ordering violated or non-positive price");
      continue;
    }
    result.bars.push_back(bar);
  }
  return result;
}

std::vector<Window> slide_windows(std::span<const OhlcBar> bars, std::size_t stride) {
  if (stride == 0) {
    throw UsageError("window stride must be positive");
  }
  if (bars.size() < kWindowLength) {
    throw EmptyInputError("need at least " + std::to_string(kWindowLength) + " bars, got " +
                          std::to_string(bars.size()));
  }
  std::vector<Window> out;
  out.reserve((bars.size() - kWindowLength) / stride + 1);
  for (std::size_t off = 0; off + kWindowLength <= bars.size(); off += stride) {
    Window w;
    std::copy_n(bars.begin() + static_cast<std::ptrdiff_t>(off), kWindowLength, w.bars.begin());
    out.push_back(w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic generation

namespace {

class BarFactory {
 public:
  BarFactory(Rng& rng, const GeneratorConfig& cfg) : rng_(rng), cfg_(cfg) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  bool coin() { return std::bernoulli_distribution(0.5)(rng_); }
  // Small multiplicative gap between a close and the next open.
  double gap_factor() { return std::exp(0.1 * cfg_.volatility * normal()); }

  // One random-walk bar continuing from prev_close with log drift `drift`.
  OhlcBar walk(double prev_close, double drift) {
    const double vol = cfg_.volatility;
    const double open = prev_close * gap_factor();
    const double close = open * std::exp(drift + vol * normal());
    const double upper = std::abs(normal()) * 0.5 * vol * open;
    const double lower = std::abs(normal()) * 0.5 * vol * open;
    return make(open, close - open, upper, lower);
  }

  static OhlcBar make(double open, double signed_body, double upper, double lower) {
    OhlcBar b;
    b.open = open;
    b.close = open + signed_body;
    b.high = std::max(b.open, b.close) + upper;
    b.low = std::min(b.open, b.close) - lower;
    return b;
  }

 private:
  Rng& rng_;
  const GeneratorConfig& cfg_;
};

TrendDirection trend_for(PatternLabel l) {
  switch (l) {
    case PatternLabel::kMorningStar:
    case PatternLabel::kHammer:
    case PatternLabel::kInvertedHammer:
    case PatternLabel::kBullishEngulfing:
      return TrendDirection::kDown;
    case PatternLabel::kEveningStar:
    case PatternLabel::kBearishEngulfing:
    case PatternLabel::kShootingStar:
    case PatternLabel::kHangingMan:
      return TrendDirection::kUp;
    case PatternLabel::kNone:
      break;
  }
  return TrendDirection::kFlat;
}

// Bars 8..10 for the three-bar star patterns. `sign` is +1 for the morning
// star (black, small, white) and -1 for the evening star.
void star_tail(BarFactory& f, Window& w, double u, double sign) {
  const double prev = w.bars[6].close;
  const double body8 = u * f.uniform(1.5, 2.6);
  w.bars[7] = BarFactory::make(prev + sign * u * f.uniform(-0.1, 0.1), -sign * body8,
                               body8 * f.uniform(0.0, 0.15), body8 * f.uniform(0.0, 0.15));
  const double gap = u * f.uniform(0.0, 0.6);
  const double body9 = u * f.uniform(0.0, 0.25) * (f.coin() ? 1.0 : -1.0);
  w.bars[8] = BarFactory::make(w.bars[7].close - sign * gap, body9, u * f.uniform(0.2, 1.2),
                               u * f.uniform(0.2, 1.2));
  const double body10 = body8 * f.uniform(0.8, 1.4);
  w.bars[9] = BarFactory::make(w.bars[8].close + sign * u * f.uniform(0.0, 0.3), sign * body10,
                               body10 * f.uniform(0.0, 0.15), body10 * f.uniform(0.0, 0.15));
}

// Bars 9..10 for engulfing. sign +1: black then engulfing white (bullish).
void engulfing_tail(BarFactory& f, Window& w, double u, double sign, double drift) {
  w.bars[7] = f.walk(w.bars[6].close, drift);
  const double body9 = u * f.uniform(0.3, 1.1);
  w.bars[8] = BarFactory::make(w.bars[7].close, -sign * body9, u * f.uniform(0.0, 0.5),
                               u * f.uniform(0.0, 0.5));
  const double open10 = w.bars[8].close - sign * u * f.uniform(0.0, 0.4);
  const double close10 = w.bars[8].open + sign * u * f.uniform(0.05, 0.8);
  w.bars[9] = BarFactory::make(open10, close10 - open10, u * f.uniform(0.0, 0.4),
                               u * f.uniform(0.0, 0.4));
}

// Bar 10 with one long shadow. long_lower selects hammer/hanging-man shape,
// otherwise inverted-hammer/shooting-star shape.
void single_tail(BarFactory& f, Window& w, double u, double drift, bool long_lower) {
  w.bars[7] = f.walk(w.bars[6].close, drift);
  w.bars[8] = f.walk(w.bars[7].close, drift);
  const double body = u * f.uniform(0.25, 1.0);
  const double long_shadow = body * f.uniform(2.2, 4.5);
  const double short_shadow = body * f.uniform(0.0, 0.2);
  const double open = w.bars[8].close * f.gap_factor();
  const double signed_body = f.coin() ? body : -body;
  w.bars[9] = long_lower ? BarFactory::make(open, signed_body, short_shadow, long_shadow)
                         : BarFactory::make(open, signed_body, long_shadow, short_shadow);
}

Window candidate(Rng& rng, PatternLabel target, const GeneratorConfig& cfg) {
  BarFactory f(rng, cfg);
  const TrendDirection dir = trend_for(target);
  const double drift = dir == TrendDirection::kUp     ? cfg.trend_drift
                       : dir == TrendDirection::kDown ? -cfg.trend_drift
                                                      : f.uniform(-1.0, 1.0) * cfg.trend_drift;
  Window w;
  double close = cfg.base_price * std::exp(0.05 * f.normal());
  const std::size_t walked = target == PatternLabel::kNone ? kWindowLength : kTrendBars;
  for (std::size_t i = 0; i < walked; ++i) {
    w.bars[i] = f.walk(close, drift);
    close = w.bars[i].close;
  }
  if (target == PatternLabel::kNone) {
    return w;
  }

  double u = 0.0;
  for (std::size_t i = 0; i < kTrendBars; ++i) {
    u += std::abs(w.bars[i].close - w.bars[i].open);
  }
  u /= kTrendBars;

  switch (target) {
    case PatternLabel::kMorningStar: star_tail(f, w, u, +1.0); break;
    case PatternLabel::kEveningStar: star_tail(f, w, u, -1.0); break;
    case PatternLabel::kBullishEngulfing: engulfing_tail(f, w, u, +1.0, drift); break;
    case PatternLabel::kBearishEngulfing: engulfing_tail(f, w, u, -1.0, drift); break;
    case PatternLabel::kHammer:
    case PatternLabel::kHangingMan: single_tail(f, w, u, drift, true); break;
    case PatternLabel::kInvertedHammer:
    case PatternLabel::kShootingStar: single_tail(f, w, u, drift, false); break;
    case PatternLabel::kNone: break;
  }
  return w;
}

}  // namespace

LabeledWindow synthesize_window(Rng& rng, PatternLabel target, const GeneratorConfig& cfg,
                                const RuleThresholds& th) {
  for (std::size_t attempt = 0; attempt < cfg.max_retries; ++attempt) {
    Window w = candidate(rng, target, cfg);
    if (is_valid_window(w) && detect_pattern(w, th) == target) {
      return {w, target};
    }
  }
  throw GenerationError("could not synthesize a \"" + std::string(label_name(target)) +
                        "\" window within " + std::to_string(cfg.max_retries) + " attempts");
}

// ---------------------------------------------------------------------------
// Datasets

std::array<std::size_t, kNumClasses> class_counts(const Dataset& d) {
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& s : d.samples) {
    ++counts[code(s.label)];
  }
  return counts;
}

Dataset generate_dataset(const GeneratorConfig& cfg, const RuleThresholds& th, std::uint64_t seed,
                         int workers) {
  Dataset d;
  d.seed = seed;
  d.split = SplitTag::kAll;
  d.samples = workers <= 1 ? kernels::serial::generate_samples(cfg, th, seed)
                           : kernels::omp::generate_samples(cfg, th, seed, workers);
  return d;
}

std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train fraction must lie in (0, 1)");
  }
  std::array<std::vector<std::size_t>, kNumClasses> by_label;
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    by_label[code(d.samples[i].label)].push_back(i);
  }
  std::vector<bool> to_train(d.samples.size(), false);
  for (std::size_t l = 0; l < kNumClasses; ++l) {
    auto& idx = by_label[l];
    if (idx.empty()) {
      continue;
    }
    if (idx.size() < 2) {
      throw StratificationError("label " + std::to_string(l) + " has " +
                                std::to_string(idx.size()) + " sample; need at least 2 to split");
    }
    Rng rng = make_rng(seed, 0x5917, l);
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(idx.size()) * train_fraction));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    for (std::size_t k = 0; k < n_train; ++k) {
      to_train[idx[k]] = true;
    }
  }
  Dataset train, test;
  train.split = SplitTag::kTrain;
  test.split = SplitTag::kTest;
  train.seed = test.seed = d.seed;
  train.provenance = test.provenance = d.provenance;
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    (to_train[i] ? train : test).samples.push_back(d.samples[i]);
  }
  return {std::move(train), std::move(test)};
}

namespace {
constexpr std::string_view kDatasetMagic = "GAFL1";
}

std::string serialize_dataset(const Dataset& d) {
  ByteWriter w;
  w.raw(kDatasetMagic);
  w.u8(static_cast<std::uint8_t>(d.split));
  w.u64(d.seed);
  w.str(d.provenance);
  w.u64(d.samples.size());
  for (const auto& s : d.samples) {
    w.u8(static_cast<std::uint8_t>(code(s.label)));
    const bool has_ts = std::all_of(s.window.bars.begin(), s.window.bars.end(),
                                    [](const OhlcBar& b) { return b.timestamp.has_value(); });
    w.u8(has_ts ? 1 : 0);
    for (const auto& b : s.window.bars) {
      w.f64(b.open);
      w.f64(b.high);
      w.f64(b.low);
      w.f64(b.close);
    }
    if (has_ts) {
      for (const auto& b : s.window.bars) {
        w.i64(*b.timestamp);
      }
    }
  }
  return w.bytes();
}

Dataset deserialize_dataset(std::string_view bytes) {
  ByteReader r(bytes, "dataset");
  r.expect_magic(kDatasetMagic);
  Dataset d;
  const auto tag = r.u8();
  if (tag > 2) {
    throw FormatError("dataset: unknown split tag " + std::to_string(tag));
  }
  d.split = static_cast<SplitTag>(tag);
  d.seed = r.u64();
  d.provenance = r.str();
  const auto n = r.u64();
  // Each sample is at least 2 + 40 * 8 bytes; reject absurd counts before reserving.
  if (n > bytes.size() / 322) {
    throw FormatError("dataset: sample count " + std::to_string(n) + " exceeds file size");
  }
  d.samples.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    LabeledWindow s;
    const auto label = r.u8();
    if (label >= kNumClasses) {
      throw FormatError("dataset: sample " + std::to_string(i) + " has label " +
                        std::to_string(label));
    }
    s.label = static_cast<PatternLabel>(label);
    const auto has_ts = r.u8();
    if (has_ts > 1) {
      throw FormatError("dataset: bad timestamp flag in sample " + std::to_string(i));
    }
    for (auto& b : s.window.bars) {
      b.open = r.f64();
      b.high = r.f64();
      b.low = r.f64();
      b.close = r.f64();
    }
    if (has_ts) {
      for (auto& b : s.window.bars) {
        b.timestamp = r.i64();
      }
    }
    d.samples.push_back(s);
  }
  r.expect_end();
  return d;
}

void save_dataset(const std::filesystem::path& path, const Dataset& d) {
  write_file(path, serialize_dataset(d));
}

Dataset load_dataset(const std::filesystem::path& path) {
  try {
    return deserialize_dataset(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace gafx
