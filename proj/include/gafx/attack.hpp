#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gafx/classifier.hpp"
#include "gafx/gasf.hpp"
#include "gafx/market_data.hpp"

namespace gafx {

// Local search over the GASF diagonal. The reference parameter set also
// lists "d = 0"; the search procedure never reads it, so it has no field.
struct AttackConfig {
  double scale_low = 0.8;   // r ~ Uniform[scale_low, scale_high]
  double scale_high = 1.2;
  double bound = 0.5;       // |r * A[l,l]| >= bound rejects the step
  std::size_t episodes = 150;
  std::size_t reset_period = 10;
  std::uint64_t seed = 0;

  // Throws UsageError unless 0 < scale_low <= scale_high, 0 < bound <= 1,
  // episodes >= 1 and reset_period >= 1.
  void validate() const;
};

// Black-box query interface. Implementations must be safe to call
// concurrently when used with more than one worker.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual Prediction classify(const GasfTensor& t) const = 0;
};

class ModelClassifier final : public Classifier {
 public:
  explicit ModelClassifier(const Model& m) : model_(m) {}
  Prediction classify(const GasfTensor& t) const override { return forward(model_, to_input(t)); }

 private:
  const Model& model_;
};

// One scale per timestep, shared by all channels; each channel entry is
// accepted or left as is on its own.
GasfTensor scale_diagonal(const GasfTensor& t, std::span<const double> scales, double bound);

// Draws kSide scales from rng and applies scale_diagonal.
GasfTensor perturb_diagonal(const GasfTensor& t, Rng& rng, const AttackConfig& cfg);

// Decodes each channel's diagonal back to a series and re-encodes the
// off-diagonal entries from it. The diagonal itself is carried over unchanged.
GasfTensor reencode(const GasfTensor& t);

struct EpisodeRecord {
  int predicted = 0;
  double confidence = 0.0;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct AdversarialExample {
  GasfTensor tensor;
  std::optional<Window> window;  // absent for degenerate (flat) windows
  int predicted = 0;
  double confidence = 0.0;
};

struct AttackOutcome {
  bool success = false;
  std::size_t episodes_used = 0;  // == model queries made by the search
  Window original_window;
  GasfTensor original_tensor;
  int original_label = 0;
  double original_confidence = 0.0;
  std::optional<AdversarialExample> adversarial;  // present iff success
  std::vector<EpisodeRecord> trace;
};

// Called at the start of every episode (1-based), after any restart and before
// the perturbation, with the working tensor.
using EpisodeObserver = std::function<void(std::size_t episode, const GasfTensor& working)>;

// Core search. `baseline` is the model's prediction on the clean sample and
// must equal sample.label; it is not re-queried, so the search makes at most
// config.episodes model queries.
AttackOutcome attack(const Classifier& model, const LabeledWindow& sample, const Prediction& baseline,
                     const AttackConfig& config, Rng& rng, const EpisodeObserver& observer = {});

// Queries the clean sample first; returns nullopt (skip) when the model does
// not predict sample.label. Randomness comes from make_rng(config.seed).
std::optional<AttackOutcome> attack(const Classifier& model, const LabeledWindow& sample,
                                    const AttackConfig& config);

struct LabelStats {
  int label = 0;
  std::size_t attempted = 0;  // correctly classified samples that were attacked
  std::size_t succeeded = 0;
  std::size_t skipped = 0;    // misclassified before the attack

  double ratio() const {
    return attempted ? static_cast<double>(succeeded) / static_cast<double>(attempted) : 0.0;
  }
};

struct AttackReport {
  std::vector<LabelStats> rows;  // ascending label; labels absent from the data are omitted
  double mean_ratio = 0.0;       // mean of ratio() over rows with attempted > 0
  std::vector<std::string> warnings;
};

// Builds rows for `labels`, omitting (with a warning) any label whose row has
// no samples at all.
AttackReport summarize(std::span<const LabelStats> stats);

struct CampaignOptions {
  std::vector<int> labels = {1, 2, 3, 4, 5, 6, 7, 8};
  std::size_t max_per_label = 0;  // 0: attack every correctly classified sample
  int workers = 1;
};

struct Campaign {
  AttackReport report;
  std::vector<std::size_t> sample_indices;  // dataset index of each outcome
  std::vector<AttackOutcome> outcomes;
};

// Classifies every targeted sample, skips the misclassified ones and attacks
// the rest. Sample i draws from make_rng(config.seed, kAttackStream, i), so
// the result is identical for every worker count.
Campaign batch_attack(const Classifier& model, const Dataset& data, const AttackConfig& config,
                      const CampaignOptions& options = {});

inline constexpr std::uint64_t kAttackStream = 0xA77AC;

}  // namespace gafx
