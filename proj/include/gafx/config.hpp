#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "gafx/attack.hpp"
#include "gafx/classifier.hpp"
#include "gafx/market_data.hpp"
#include "gafx/patterns.hpp"

namespace gafx {

// Resolved settings for one command. Built from defaults, then a config file
// ("[section]" headers, "key = value" lines, '#' comments), then flags.
struct RunConfig {
  // [run]
  std::uint64_t seed = 42;
  int workers = 1;                // not echoed: results never depend on it
  std::size_t render = 0;         // figure pairs per label written by attack
  std::filesystem::path out = "out";
  std::filesystem::path data;     // dataset/checkpoint directory; empty: out
  std::filesystem::path csv;      // ingest input

  // [data]
  GeneratorConfig generator;
  double train_fraction = 0.8;    // train vs test
  double valid_fraction = 0.15;   // carved from train for model selection
  std::size_t stride = 10;
  CsvSchema schema;

  // [patterns]
  RuleThresholds thresholds;

  // [train]
  TrainConfig train;

  // [attack]
  AttackConfig attack;
  std::size_t attack_per_label = 0;  // 0: every correctly classified sample
  std::vector<int> attack_labels = {1, 2, 3, 4, 5, 6, 7, 8};

  std::filesystem::path data_dir() const { return data.empty() ? out : data; }

  // Sets generator.per_label and keeps label 0 at twice that. Throws
  // UsageError for 0.
  void set_per_label(std::size_t n);

  // Copies seed into the train and attack blocks and validates ranges.
  // Throws UsageError.
  void resolve();

  // Canonical "key = value" listing of every setting except workers, used as
  // the provenance block of every artifact.
  std::string to_text() const;
};

// Throws UsageError naming the source for unknown sections or keys
// and malformed values.
void apply_config(RunConfig& cfg, std::istream& in, const std::string& source = "config");
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

}  // namespace gafx
