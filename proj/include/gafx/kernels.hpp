#pragma once

// Data-parallel kernels. Every kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::omp; the two produce
// bit-identical results for any worker count (tests/test_kernels.cpp).

#include <cstdint>
#include <span>
#include <vector>

#include "gafx/attack.hpp"
#include "gafx/classifier.hpp"
#include "gafx/market_data.hpp"

namespace gafx::kernels {

// Per-sample gradient buffers reused across batches by the OpenMP kernel.
struct GradientScratch {
  std::vector<std::vector<double>> per_sample;
};

struct AttackJob {
  const LabeledWindow* sample = nullptr;
  Prediction baseline;
  std::uint64_t stream = 0;  // rng stream; the dataset index in batch_attack
};

namespace serial {

std::vector<LabeledWindow> generate_samples(const GeneratorConfig& cfg, const RuleThresholds& th,
                                            std::uint64_t seed);
EncodedSet encode_samples(std::span<const LabeledWindow> samples);
// Sum (not mean) of per-sample losses; grad_sum receives the sum of per-sample
// gradients, added in batch order.
double batch_gradient(const Model& m, const EncodedSet& data, std::span<const std::size_t> batch,
                      std::span<double> grad_sum);
std::vector<Prediction> predict_samples(const Model& m, std::span<const Tensor3> inputs);
std::vector<Prediction> classify_tensors(const Classifier& c, std::span<const GasfTensor> tensors);
std::vector<AttackOutcome> attack_samples(const Classifier& c, std::span<const AttackJob> jobs,
                                          const AttackConfig& config);

}  // namespace serial

namespace omp {

std::vector<LabeledWindow> generate_samples(const GeneratorConfig& cfg, const RuleThresholds& th,
                                            std::uint64_t seed, int workers);
EncodedSet encode_samples(std::span<const LabeledWindow> samples, int workers);
double batch_gradient(const Model& m, const EncodedSet& data, std::span<const std::size_t> batch,
                      std::span<double> grad_sum, int workers, GradientScratch& scratch);
std::vector<Prediction> predict_samples(const Model& m, std::span<const Tensor3> inputs, int workers);
std::vector<Prediction> classify_tensors(const Classifier& c, std::span<const GasfTensor> tensors,
                                         int workers);
std::vector<AttackOutcome> attack_samples(const Classifier& c, std::span<const AttackJob> jobs,
                                          const AttackConfig& config, int workers);

}  // namespace omp

}  // namespace gafx::kernels
