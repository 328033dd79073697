#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gafx/ohlc.hpp"
#include "gafx/patterns.hpp"

namespace gafx {

using Rng = std::mt19937_64;

// Independent stream for (seed, a, b): used for per-sample and per-worker sources
// so results never depend on thread scheduling.
Rng make_rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0);

// ---------------------------------------------------------------------------
// CSV ingestion

struct CsvSchema {
  std::string timestamp = "timestamp";  // empty: file has no timestamp column
  std::string open = "open";
  std::string high = "high";
  std::string low = "low";
  std::string close = "close";
};

struct CsvRowError {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string message;
};

struct CsvParseResult {
  std::vector<OhlcBar> bars;
  std::vector<CsvRowError> errors;  // one per skipped row
};

// Header row required; RFC-4180 quoting; '.' decimal separator. Column lookup is
// case-insensitive. Throws SchemaError if a named column is absent. Timestamps
// may be integer epoch milliseconds or "YYYY-MM-DD[T ]HH:MM[:SS[.fff]]" (UTC).
CsvParseResult parse_csv(std::istream& in, const CsvSchema& schema = {});

// Windows at offsets 0, stride, 2*stride, ...; partial tails dropped.
// Throws EmptyInputError for fewer than 10 bars and UsageError for stride 0.
std::vector<Window> slide_windows(std::span<const OhlcBar> bars, std::size_t stride);

// ---------------------------------------------------------------------------
// Synthetic generation

struct GeneratorConfig {
  std::size_t per_label = 1500;   // labels 1..8
  std::size_t none_count = 3000;  // label 0
  double base_price = 1.1;
  double volatility = 0.001;   // per-bar log-return std
  double trend_drift = 0.0015; // per-bar log drift for trending templates
  std::size_t max_retries = 2000;

  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

// Geometric random walk for the trend bars, template construction of the
// pattern bars, then generate-and-verify against detect_pattern. Throws
// GenerationError naming the label once max_retries candidates are rejected.
LabeledWindow synthesize_window(Rng& rng, PatternLabel target, const GeneratorConfig& cfg = {},
                                const RuleThresholds& th = {});

// ---------------------------------------------------------------------------
// Datasets

enum class SplitTag : std::uint8_t { kTrain = 0, kTest = 1, kAll = 2 };

struct Dataset {
  std::vector<LabeledWindow> samples;
  SplitTag split = SplitTag::kAll;
  std::uint64_t seed = 0;
  std::string provenance;  // key = value lines: generator config, thresholds, run config

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

std::array<std::size_t, kNumClasses> class_counts(const Dataset& d);

// Counts per label; label-major order, sample k of label L drawn from
// make_rng(seed, L, k). workers <= 1 runs the serial reference.
Dataset generate_dataset(const GeneratorConfig& cfg, const RuleThresholds& th, std::uint64_t seed,
                         int workers = 1);

// Stratified, deterministic for a fixed seed. Per class, round(n * fraction)
// samples go to train, clamped so each side keeps at least one. Relative order
// within each output follows the input. Throws StratificationError when a
// present class has fewer than 2 samples, UsageError when fraction is not in (0, 1).
std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, std::uint64_t seed);

// "GAFL1" container. serialize/deserialize are exact inverses on bytes.
std::string serialize_dataset(const Dataset& d);
Dataset deserialize_dataset(std::string_view bytes);
void save_dataset(const std::filesystem::path& path, const Dataset& d);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace gafx
