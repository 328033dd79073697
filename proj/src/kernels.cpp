#include "gafx/kernels.hpp"

#include <algorithm>
#include <exception>

namespace gafx::kernels {

namespace {

struct SampleJob {
  PatternLabel label;
  std::uint64_t index;
};

std::vector<SampleJob> generation_jobs(const GeneratorConfig& cfg) {
  std::vector<SampleJob> jobs;
  for (int l = 0; l < static_cast<int>(kNumClasses); ++l) {
    const std::size_t n = l == 0 ? cfg.none_count : cfg.per_label;
    for (std::size_t k = 0; k < n; ++k) {
      jobs.push_back({static_cast<PatternLabel>(l), k});
    }
  }
  return jobs;
}

LabeledWindow generate_one(const SampleJob& job, const GeneratorConfig& cfg, const RuleThresholds& th,
                           std::uint64_t seed) {
  Rng rng = make_rng(seed, static_cast<std::uint64_t>(code(job.label)), job.index);
  return synthesize_window(rng, job.label, cfg, th);
}

AttackOutcome attack_one(const Classifier& c, const AttackJob& job, const AttackConfig& config) {
  Rng rng = make_rng(config.seed, kAttackStream, job.stream);
  return attack(c, *job.sample, job.baseline, config, rng);
}

// Exceptions may not escape an OpenMP region. Each iteration records its own;
// the lowest index is rethrown so the error is independent of scheduling.
class ErrorSlots {
 public:
  explicit ErrorSlots(std::size_t n) : errors_(n) {}

  template <class F>
  void run(std::size_t i, F&& f) {
    try {
      f();
    } catch (...) {
      errors_[i] = std::current_exception();
    }
  }

  void rethrow_first() const {
    for (const auto& e : errors_) {
      if (e) {
        std::rethrow_exception(e);
      }
    }
  }

 private:
  std::vector<std::exception_ptr> errors_;
};

long long as_count(std::size_t n) { return static_cast<long long>(n); }

}  // namespace

// ---------------------------------------------------------------------------
// Serial reference

namespace serial {

std::vector<LabeledWindow> generate_samples(const GeneratorConfig& cfg, const RuleThresholds& th,
                                            std::uint64_t seed) {
  const auto jobs = generation_jobs(cfg);
  std::vector<LabeledWindow> out;
  out.reserve(jobs.size());
  for (const auto& job : jobs) {
    out.push_back(generate_one(job, cfg, th, seed));
  }
  return out;
}

EncodedSet encode_samples(std::span<const LabeledWindow> samples) {
  EncodedSet set;
  set.inputs.reserve(samples.size());
  set.labels.reserve(samples.size());
  for (const auto& s : samples) {
    set.inputs.push_back(to_input(encode(s.window)));
    set.labels.push_back(code(s.label));
  }
  return set;
}

double batch_gradient(const Model& m, const EncodedSet& data, std::span<const std::size_t> batch,
                      std::span<double> grad_sum) {
  std::vector<double> g(grad_sum.size());
  double loss = 0.0;
  for (std::size_t i : batch) {
    std::fill(g.begin(), g.end(), 0.0);
    loss += accumulate_sample_gradient(m, data.inputs[i], data.labels[i], g);
    for (std::size_t p = 0; p < g.size(); ++p) {
      grad_sum[p] += g[p];
    }
  }
  return loss;
}

std::vector<Prediction> predict_samples(const Model& m, std::span<const Tensor3> inputs) {
  std::vector<Prediction> out;
  out.reserve(inputs.size());
  for (const auto& x : inputs) {
    out.push_back(forward(m, x));
  }
  return out;
}

std::vector<Prediction> classify_tensors(const Classifier& c, std::span<const GasfTensor> tensors) {
  std::vector<Prediction> out;
  out.reserve(tensors.size());
  for (const auto& t : tensors) {
    out.push_back(c.classify(t));
  }
  return out;
}

std::vector<AttackOutcome> attack_samples(const Classifier& c, std::span<const AttackJob> jobs,
                                          const AttackConfig& config) {
  std::vector<AttackOutcome> out;
  out.reserve(jobs.size());
  for (const auto& job : jobs) {
    out.push_back(attack_one(c, job, config));
  }
  return out;
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP

namespace omp {

std::vector<LabeledWindow> generate_samples(const GeneratorConfig& cfg, const RuleThresholds& th,
                                            std::uint64_t seed, int workers) {
  const auto jobs = generation_jobs(cfg);
  std::vector<LabeledWindow> out(jobs.size());
  ErrorSlots errors(jobs.size());
#pragma omp parallel for num_threads(workers) schedule(dynamic, 16)
  for (long long i = 0; i < as_count(jobs.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    errors.run(k, [&] { out[k] = generate_one(jobs[k], cfg, th, seed); });
  }
  errors.rethrow_first();
  return out;
}

EncodedSet encode_samples(std::span<const LabeledWindow> samples, int workers) {
  EncodedSet set;
  set.inputs.resize(samples.size());
  set.labels.resize(samples.size());
  ErrorSlots errors(samples.size());
#pragma omp parallel for num_threads(workers) schedule(static)
  for (long long i = 0; i < as_count(samples.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    errors.run(k, [&] {
      set.inputs[k] = to_input(encode(samples[k].window));
      set.labels[k] = code(samples[k].label);
    });
  }
  errors.rethrow_first();
  return set;
}

double batch_gradient(const Model& m, const EncodedSet& data, std::span<const std::size_t> batch,
                      std::span<double> grad_sum, int workers, GradientScratch& scratch) {
  const std::size_t n = batch.size();
  const std::size_t n_params = grad_sum.size();
  if (scratch.per_sample.size() < n) {
    scratch.per_sample.resize(n);
  }
  std::vector<double> losses(n, 0.0);
  ErrorSlots errors(n);
#pragma omp parallel num_threads(workers)
  {
#pragma omp for schedule(static)
    for (long long i = 0; i < as_count(n); ++i) {
      const auto k = static_cast<std::size_t>(i);
      errors.run(k, [&] {
        auto& g = scratch.per_sample[k];
        g.assign(n_params, 0.0);
        losses[k] = accumulate_sample_gradient(m, data.inputs[batch[k]], data.labels[batch[k]], g);
      });
    }
    // Implicit barrier above; each parameter is then summed in batch order.
#pragma omp for schedule(static)
    for (long long p = 0; p < as_count(n_params); ++p) {
      const auto q = static_cast<std::size_t>(p);
      double acc = grad_sum[q];
      for (std::size_t k = 0; k < n; ++k) {
        acc += scratch.per_sample[k][q];
      }
      grad_sum[q] = acc;
    }
  }
  errors.rethrow_first();
  double loss = 0.0;
  for (double l : losses) {
    loss += l;
  }
  return loss;
}

std::vector<Prediction> predict_samples(const Model& m, std::span<const Tensor3> inputs, int workers) {
  std::vector<Prediction> out(inputs.size());
  ErrorSlots errors(inputs.size());
#pragma omp parallel for num_threads(workers) schedule(static)
  for (long long i = 0; i < as_count(inputs.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    errors.run(k, [&] { out[k] = forward(m, inputs[k]); });
  }
  errors.rethrow_first();
  return out;
}

std::vector<Prediction> classify_tensors(const Classifier& c, std::span<const GasfTensor> tensors,
                                         int workers) {
  std::vector<Prediction> out(tensors.size());
  ErrorSlots errors(tensors.size());
#pragma omp parallel for num_threads(workers) schedule(static)
  for (long long i = 0; i < as_count(tensors.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    errors.run(k, [&] { out[k] = c.classify(tensors[k]); });
  }
  errors.rethrow_first();
  return out;
}

std::vector<AttackOutcome> attack_samples(const Classifier& c, std::span<const AttackJob> jobs,
                                          const AttackConfig& config, int workers) {
  std::vector<AttackOutcome> out(jobs.size());
  ErrorSlots errors(jobs.size());
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
  for (long long i = 0; i < as_count(jobs.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    errors.run(k, [&] { out[k] = attack_one(c, jobs[k], config); });
  }
  errors.rethrow_first();
  return out;
}

}  // namespace omp

}  // namespace gafx::kernels
