#include "gafx/attack.hpp"

#include <algorithm>
#include <cmath>

#include "gafx/errors.hpp"
#include "gafx/kernels.hpp"

namespace gafx {

void AttackConfig::validate() const {
  if (!(scale_low > 0.0 && scale_low <= scale_high)) {
    throw UsageError("attack scales must satisfy 0 < scale_low <= scale_high");
  }
  if (!(bound > 0.0 && bound <= 1.0)) {
    throw UsageError("attack bound must lie in (0, 1]");
  }
  if (episodes < 1 || reset_period < 1) {
    throw UsageError("attack episodes and reset period must be at least 1");
  }
}

GasfTensor scale_diagonal(const GasfTensor& t, std::span<const double> scales, double bound) {
  if (scales.size() != kSide) {
    throw UsageError("expected " + std::to_string(kSide) + " diagonal scales");
  }
  GasfTensor out = t;
  for (std::size_t l = 0; l < kSide; ++l) {
    for (std::size_t c = 0; c < kChannels; ++c) {
      const double v = scales[l] * t.at(c, l, l);
      if (!(v >= bound || v <= -bound)) {
        out.at(c, l, l) = v;
      }
    }
  }
  return out;
}

GasfTensor perturb_diagonal(const GasfTensor& t, Rng& rng, const AttackConfig& cfg) {
  std::uniform_real_distribution<double> dist(cfg.scale_low, cfg.scale_high);
  std::array<double, kSide> scales{};
  for (double& r : scales) {
    r = dist(rng);
  }
  return scale_diagonal(t, scales, cfg.bound);
}

GasfTensor reencode(const GasfTensor& t) {
  GasfTensor out;
  out.norm = t.norm;
  out.degenerate = t.degenerate;
  for (std::size_t c = 0; c < kChannels; ++c) {
    const Series diag = t.diagonal(c);
    const auto xs = decode_diagonal(diag);
    const auto g = gasf_matrix(xs);
    std::copy(g.begin(), g.end(), out.channels[c].begin());
    for (std::size_t i = 0; i < kSide; ++i) {
      out.at(c, i, i) = diag[i];
    }
  }
  return out;
}

AttackOutcome attack(const Classifier& model, const LabeledWindow& sample, const Prediction& baseline,
                     const AttackConfig& config, Rng& rng, const EpisodeObserver& observer) {
  config.validate();
  if (baseline.argmax != code(sample.label)) {
    throw UsageError("attack precondition violated: model predicts " +
                     std::to_string(baseline.argmax) + " for a sample labelled " +
                     std::to_string(code(sample.label)));
  }
  AttackOutcome out;
  out.original_window = sample.window;
  out.original_tensor = encode(sample.window);
  out.original_label = code(sample.label);
  out.original_confidence = baseline.confidence;
  out.trace.reserve(config.episodes);

  const GasfTensor& original = out.original_tensor;
  GasfTensor working = original;
  std::size_t since_reset = 0;
  for (std::size_t episode = 1; episode <= config.episodes; ++episode) {
    if (since_reset == config.reset_period) {
      working = original;
      since_reset = 0;
    }
    if (observer) {
      observer(episode, working);
    }
    working = reencode(perturb_diagonal(working, rng, config));
    ++since_reset;

    const Prediction p = model.classify(working);
    out.trace.push_back({p.argmax, p.confidence});
    out.episodes_used = episode;
    if (p.argmax != out.original_label) {
      out.success = true;
      AdversarialExample adv;
      adv.tensor = working;
      adv.predicted = p.argmax;
      adv.confidence = p.confidence;
      if (!working.degenerate) {
        adv.window = denormalize(decode(working));
      }
      out.adversarial = std::move(adv);
      break;
    }
  }
  return out;
}

std::optional<AttackOutcome> attack(const Classifier& model, const LabeledWindow& sample,
                                    const AttackConfig& config) {
  const Prediction baseline = model.classify(encode(sample.window));
  if (baseline.argmax != code(sample.label)) {
    return std::nullopt;
  }
  Rng rng = make_rng(config.seed);
  return attack(model, sample, baseline, config, rng);
}

AttackReport summarize(std::span<const LabelStats> stats) {
  AttackReport r;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : stats) {
    if (s.attempted + s.skipped == 0) {
      r.warnings.push_back("label " + std::to_string(s.label) + " has no samples; omitted");
      continue;
    }
    r.rows.push_back(s);
    if (s.attempted > 0) {
      sum += s.ratio();
      ++n;
    }
  }
  std::sort(r.rows.begin(), r.rows.end(),
            [](const LabelStats& a, const LabelStats& b) { return a.label < b.label; });
  r.mean_ratio = n ? sum / static_cast<double>(n) : 0.0;
  return r;
}

Campaign batch_attack(const Classifier& model, const Dataset& data, const AttackConfig& config,
                      const CampaignOptions& options) {
  config.validate();
  std::vector<LabelStats> stats;
  for (int l : options.labels) {
    label_from_code(l);
    stats.push_back(LabelStats{l, 0, 0, 0});
  }
  auto stats_for = [&](int label) -> LabelStats* {
    for (auto& s : stats) {
      if (s.label == label) {
        return &s;
      }
    }
    return nullptr;
  };

  std::vector<std::size_t> targeted;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    if (stats_for(code(data.samples[i].label)) != nullptr) {
      targeted.push_back(i);
    }
  }
  std::vector<GasfTensor> clean;
  clean.reserve(targeted.size());
  for (std::size_t i : targeted) {
    clean.push_back(encode(data.samples[i].window));
  }
  const auto baselines = options.workers <= 1
                             ? kernels::serial::classify_tensors(model, clean)
                             : kernels::omp::classify_tensors(model, clean, options.workers);

  std::vector<kernels::AttackJob> jobs;
  for (std::size_t k = 0; k < targeted.size(); ++k) {
    const std::size_t i = targeted[k];
    LabelStats& s = *stats_for(code(data.samples[i].label));
    if (options.max_per_label != 0 && s.attempted >= options.max_per_label) {
      continue;
    }
    if (baselines[k].argmax != code(data.samples[i].label)) {
      ++s.skipped;
      continue;
    }
    ++s.attempted;
    jobs.push_back({&data.samples[i], baselines[k], i});
  }

  Campaign c;
  c.outcomes = options.workers <= 1 ? kernels::serial::attack_samples(model, jobs, config)
                                    : kernels::omp::attack_samples(model, jobs, config, options.workers);
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    c.sample_indices.push_back(jobs[k].stream);
    if (c.outcomes[k].success) {
      ++stats_for(c.outcomes[k].original_label)->succeeded;
    }
  }
  c.report = summarize(stats);
  return c;
}

}  // namespace gafx
