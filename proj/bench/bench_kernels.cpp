#include <benchmark/benchmark.h>

#include "gafx/kernels.hpp"

using namespace gafx;
namespace ks = gafx::kernels::serial;
namespace ko = gafx::kernels::omp;

namespace {

GeneratorConfig bench_config() {
  GeneratorConfig g;
  g.per_label = 40;
  g.none_count = 80;
  return g;
}

const std::vector<LabeledWindow>& samples() {
  static const auto s = ks::generate_samples(bench_config(), {}, 1);
  return s;
}

const EncodedSet& encoded() {
  static const EncodedSet e = ks::encode_samples(samples());
  return e;
}

const Model& model() {
  static const Model m = [] {
    Model x = Model::gasf_cnn();
    x.initialize(1);
    return x;
  }();
  return m;
}

std::vector<std::size_t> first_batch() {
  std::vector<std::size_t> b(32);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = i * 7 % encoded().size();
  return b;
}

std::vector<kernels::AttackJob> attack_jobs() {
  std::vector<kernels::AttackJob> jobs;
  const ModelClassifier clf(model());
  for (std::size_t i = 0; i < 32; ++i) {
    const auto& s = samples()[i * 11 % samples().size()];
    Prediction p = clf.classify(encode(s.window));
    if (p.argmax == code(s.label)) jobs.push_back({&s, p, i});
  }
  return jobs;
}

void BM_GenerateSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(ks::generate_samples(bench_config(), {}, 2));
}
void BM_GenerateOmp(benchmark::State& st) {
  const int w = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(ko::generate_samples(bench_config(), {}, 2, w));
}

void BM_GradientSerial(benchmark::State& st) {
  const auto batch = first_batch();
  std::vector<double> g(model().params().size());
  for (auto _ : st) {
    std::fill(g.begin(), g.end(), 0.0);
    benchmark::DoNotOptimize(ks::batch_gradient(model(), encoded(), batch, g));
  }
}
void BM_GradientOmp(benchmark::State& st) {
  const auto batch = first_batch();
  std::vector<double> g(model().params().size());
  kernels::GradientScratch scratch;
  const int w = static_cast<int>(st.range(0));
  for (auto _ : st) {
    std::fill(g.begin(), g.end(), 0.0);
    benchmark::DoNotOptimize(ko::batch_gradient(model(), encoded(), batch, g, w, scratch));
  }
}

void BM_PredictSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(ks::predict_samples(model(), encoded().inputs));
}
void BM_PredictOmp(benchmark::State& st) {
  const int w = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(ko::predict_samples(model(), encoded().inputs, w));
}

void BM_AttackSerial(benchmark::State& st) {
  const auto jobs = attack_jobs();
  const ModelClassifier clf(model());
  AttackConfig cfg;
  cfg.episodes = 30;
  for (auto _ : st) benchmark::DoNotOptimize(ks::attack_samples(clf, jobs, cfg));
}
void BM_AttackOmp(benchmark::State& st) {
  const auto jobs = attack_jobs();
  const ModelClassifier clf(model());
  AttackConfig cfg;
  cfg.episodes = 30;
  const int w = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(ko::attack_samples(clf, jobs, cfg, w));
}

}  // namespace

BENCHMARK(BM_GenerateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradientSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradientOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AttackSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AttackOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
