#include <doctest.h>

#include <set>
#include <sstream>

#include "gafx/errors.hpp"
#include "gafx/market_data.hpp"
#include "support.hpp"

using namespace gafx;
using gafx::testing::bar;

namespace {

CsvParseResult parse(const std::string& text, const CsvSchema& schema = {}) {
  std::istringstream in(text);
  return parse_csv(in, schema);
}

std::vector<OhlcBar> flat_bars(std::size_t n) {
  std::vector<OhlcBar> bars;
  for (std::size_t i = 0; i < n; ++i) bars.push_back(bar(1.0 + i, 1.5 + i, 0.5 + i, 1.2 + i));
  return bars;
}

}  // namespace

TEST_CASE("csv row maps onto a bar") {
  const auto r = parse("timestamp,open,high,low,close\n2016-01-02T00:00:00,1.0860,1.0862,1.0858,1.0861\n");
  REQUIRE(r.bars.size() == 1);
  CHECK(r.errors.empty());
  CHECK(r.bars[0].open == 1.0860);
  CHECK(r.bars[0].high == 1.0862);
  CHECK(r.bars[0].low == 1.0858);
  CHECK(r.bars[0].close == 1.0861);
  CHECK(r.bars[0].timestamp == 1451692800000LL);
}

TEST_CASE("csv reports bad rows with line numbers") {
  const auto r = parse(
      "timestamp,open,high,low,close\n"
      "1451692800000,1.0,1.1,0.9,1.05\n"
      "1451692860000,1.0,0.8,0.9,1.0\n"
      "1451692920000,abc,1.1,0.9,1.0\n"
      "\n"
      "1451692980000,1.0,1.2,0.9,1.1\n");
  CHECK(r.bars.size() == 2);
  REQUIRE(r.errors.size() == 2);
  CHECK(r.errors[0].line == 3);
  CHECK(r.errors[1].line == 4);
  for (const auto& b : r.bars) CHECK(is_valid_bar(b));
}

TEST_CASE("csv header only gives nothing") {
  const auto r = parse("timestamp,open,high,low,close\n");
  CHECK(r.bars.empty());
  CHECK(r.errors.empty());
}

TEST_CASE("csv quoting, column order and custom names") {
  CsvSchema s;
  s.timestamp = "";
  s.open = "Open";
  s.high = "High";
  s.low = "Low";
  s.close = "Last";
  const auto r = parse("\"note\",LAST,low,HIGH,open\n\"a, \"\"quoted\"\"\nline\",2,1,3,1.5\r\n", s);
  REQUIRE(r.bars.size() == 1);
  CHECK(r.bars[0].open == 1.5);
  CHECK(r.bars[0].high == 3.0);
  CHECK(r.bars[0].low == 1.0);
  CHECK(r.bars[0].close == 2.0);
  CHECK_FALSE(r.bars[0].timestamp.has_value());
}

TEST_CASE("csv missing column is a schema error") {
  CHECK_THROWS_AS(parse("timestamp,open,high,close\n"), SchemaError);
}

TEST_CASE("slide_windows counts") {
  CHECK(slide_windows(flat_bars(10), 1).size() == 1);
  CHECK(slide_windows(flat_bars(12), 1).size() == 3);
  const auto w = slide_windows(flat_bars(25), 10);
  REQUIRE(w.size() == 2);
  CHECK(w[0].bars[0] == flat_bars(25)[0]);
  CHECK(w[1].bars[0] == flat_bars(25)[10]);
  for (std::size_t n = 10; n < 40; ++n)
    for (std::size_t s = 1; s < 12; ++s) CHECK(slide_windows(flat_bars(n), s).size() == (n - 10) / s + 1);
  CHECK_THROWS_AS(slide_windows(flat_bars(9), 1), EmptyInputError);
  CHECK_THROWS_AS(slide_windows(flat_bars(10), 0), UsageError);
}

TEST_CASE("synthesized windows satisfy the oracle for every label") {
  for (int l = 0; l < static_cast<int>(kNumClasses); ++l) {
    for (std::uint64_t k = 0; k < 30; ++k) {
      Rng rng = make_rng(5, static_cast<std::uint64_t>(l), k);
      const auto s = synthesize_window(rng, label_from_code(l));
      CHECK(code(s.label) == l);
      CHECK(detect_pattern(s.window) == s.label);
      CHECK(is_valid_window(s.window));
    }
  }
}

TEST_CASE("morning star windows trend down") {
  Rng rng = make_rng(8);
  const auto s = synthesize_window(rng, PatternLabel::kMorningStar);
  CHECK(trend(s.window).direction == TrendDirection::kDown);
}

TEST_CASE("synthesis is deterministic") {
  Rng a = make_rng(3, 1, 2), b = make_rng(3, 1, 2);
  CHECK(synthesize_window(a, PatternLabel::kHammer) == synthesize_window(b, PatternLabel::kHammer));
}

TEST_CASE("impossible generation fails naming the label") {
  RuleThresholds th;
  th.tall_body_frac = 2.0;  // no bar can be tall
  GeneratorConfig cfg;
  cfg.max_retries = 20;
  Rng rng = make_rng(1);
  CHECK_THROWS_WITH_AS(synthesize_window(rng, PatternLabel::kMorningStar, cfg, th),
                       doctest::Contains("morning star"), GenerationError);
}

TEST_CASE("generate_dataset counts and determinism") {
  GeneratorConfig cfg;
  cfg.per_label = 12;
  cfg.none_count = 24;
  const Dataset a = generate_dataset(cfg, {}, 17);
  const auto c = class_counts(a);
  CHECK(c[0] == 24);
  for (std::size_t l = 1; l < kNumClasses; ++l) CHECK(c[l] == 12);
  CHECK(generate_dataset(cfg, {}, 17) == a);
  CHECK(generate_dataset(cfg, {}, 17, 3) == a);
  CHECK_FALSE(generate_dataset(cfg, {}, 18) == a);
}

TEST_CASE("split is a stratified deterministic partition") {
  GeneratorConfig cfg;
  cfg.per_label = 100;
  cfg.none_count = 100;
  const Dataset d = generate_dataset(cfg, {}, 4);
  const auto [tr, te] = split(d, 0.8, 9);
  for (std::size_t l = 0; l < kNumClasses; ++l) {
    CHECK(class_counts(tr)[l] == 80);
    CHECK(class_counts(te)[l] == 20);
  }
  CHECK(tr.split == SplitTag::kTrain);
  CHECK(te.split == SplitTag::kTest);
  const auto [tr2, te2] = split(d, 0.8, 9);
  CHECK(tr2 == tr);
  CHECK(te2 == te);
}

TEST_CASE("half split of 9 x 10 is disjoint and complete") {
  GeneratorConfig cfg;
  cfg.per_label = 10;
  cfg.none_count = 10;
  const Dataset d = generate_dataset(cfg, {}, 21);
  const auto [tr, te] = split(d, 0.5, 1);
  auto key = [](const LabeledWindow& s) { return serialize_dataset({{s}, SplitTag::kAll, 0, ""}); };
  std::multiset<std::string> all, parts;
  for (const auto& s : d.samples) all.insert(key(s));
  std::set<std::string> train_keys;
  for (const auto& s : tr.samples) {
    parts.insert(key(s));
    train_keys.insert(key(s));
  }
  for (const auto& s : te.samples) {
    parts.insert(key(s));
    CHECK(train_keys.count(key(s)) == 0);
  }
  CHECK(all == parts);
  for (std::size_t l = 0; l < kNumClasses; ++l) {
    CHECK(class_counts(tr)[l] == 5);
    CHECK(class_counts(te)[l] == 5);
  }
}

TEST_CASE("split rejects tiny classes and bad fractions") {
  Dataset d;
  Rng rng = make_rng(2);
  d.samples.push_back(synthesize_window(rng, PatternLabel::kHammer));
  CHECK_THROWS_AS(split(d, 0.5, 1), StratificationError);
  d.samples.push_back(d.samples[0]);
  CHECK_NOTHROW(split(d, 0.5, 1));
  CHECK_THROWS_AS(split(d, 0.0, 1), UsageError);
  CHECK_THROWS_AS(split(d, 1.0, 1), UsageError);
}

TEST_CASE("dataset container round-trips byte for byte") {
  GeneratorConfig cfg;
  cfg.per_label = 5;
  cfg.none_count = 10;
  Dataset d = generate_dataset(cfg, {}, 33);
  d.provenance = "seed = 33\n";
  d.samples[3].window.bars[2].timestamp = 1451692800000LL;
  for (auto& b : d.samples[3].window.bars) b.timestamp = 1451692800000LL;
  const std::string bytes = serialize_dataset(d);
  CHECK(bytes.substr(0, 5) == "GAFL1");
  const Dataset back = deserialize_dataset(bytes);
  CHECK(back == d);
  CHECK(serialize_dataset(back) == bytes);

  const auto dir = gafx::testing::scratch_dir("dataset");
  save_dataset(dir / "d.gafl", d);
  CHECK(load_dataset(dir / "d.gafl") == d);
}

TEST_CASE("corrupt dataset header names the magic mismatch") {
  std::string bytes = serialize_dataset(Dataset{});
  bytes[0] = 'X';
  CHECK_THROWS_WITH_AS(deserialize_dataset(bytes), doctest::Contains("magic string mismatch"),
                       FormatError);
  CHECK_THROWS_AS(deserialize_dataset(serialize_dataset(Dataset{}) + "x"), FormatError);
}
