#include <doctest.h>

#include <atomic>
#include <cmath>

#include "gafx/attack.hpp"
#include "gafx/errors.hpp"
#include "support.hpp"

using namespace gafx;

namespace {

Prediction one_hot(int label, double confidence = 0.9) {
  Prediction p;
  p.probabilities.assign(kNumClasses, (1.0 - confidence) / (kNumClasses - 1));
  p.probabilities[static_cast<std::size_t>(label)] = confidence;
  p.argmax = label;
  p.confidence = confidence;
  return p;
}

class ConstantClassifier final : public Classifier {
 public:
  explicit ConstantClassifier(int label) : label_(label) {}
  Prediction classify(const GasfTensor&) const override {
    ++queries;
    return one_hot(label_);
  }
  mutable std::atomic<std::size_t> queries{0};

 private:
  int label_;
};

// Predicts `label` until the close-channel diagonal has drifted from the
// reference by more than `tau` in L1, then predicts label 0.
class DriftClassifier final : public Classifier {
 public:
  DriftClassifier(const GasfTensor& reference, int label, double tau)
      : ref_(reference.diagonal(3)), label_(label), tau_(tau) {}
  Prediction classify(const GasfTensor& t) const override {
    ++queries;
    double drift = 0.0;
    const Series d = t.diagonal(3);
    for (std::size_t i = 0; i < kSide; ++i) drift += std::abs(d[i] - ref_[i]);
    return one_hot(drift > tau_ ? 0 : label_);
  }
  mutable std::atomic<std::size_t> queries{0};

 private:
  Series ref_;
  int label_;
  double tau_;
};

GasfTensor tensor_with_diagonal(double d) {
  GasfTensor t;
  for (std::size_t c = 0; c < kChannels; ++c)
    for (std::size_t i = 0; i < kSide; ++i) t.at(c, i, i) = d;
  return t;
}

LabeledWindow sample(std::uint64_t seed, PatternLabel l = PatternLabel::kHammer) {
  Rng rng = make_rng(seed, 77);
  return synthesize_window(rng, l);
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(AttackConfig{}.validate());
  CHECK_THROWS_AS((AttackConfig{1.2, 0.8}).validate(), UsageError);
  CHECK_THROWS_AS((AttackConfig{0.0, 1.0}).validate(), UsageError);
  CHECK_THROWS_AS((AttackConfig{0.8, 1.2, 1.5}).validate(), UsageError);
  CHECK_THROWS_AS((AttackConfig{0.8, 1.2, 0.5, 0}).validate(), UsageError);
  CHECK_THROWS_AS((AttackConfig{0.8, 1.2, 0.5, 150, 0}).validate(), UsageError);
}

TEST_CASE("diagonal scaling obeys the rejection bound") {
  const GasfTensor t = tensor_with_diagonal(0.6);
  std::array<double, kSide> r{};
  r.fill(0.8);
  CHECK(scale_diagonal(t, r, 0.5).at(2, 5, 5) == doctest::Approx(0.48));
  r.fill(1.1);
  CHECK(scale_diagonal(t, r, 0.5).at(2, 5, 5) == 0.6);

  const GasfTensor u = tensor_with_diagonal(0.7);
  for (double s : {0.8, 0.9, 1.0, 1.1, 1.2}) {
    r.fill(s);
    CHECK(scale_diagonal(u, r, 0.5) == u);
  }

  Rng rng = make_rng(1);
  const GasfTensor e = encode(gafx::testing::random_window(rng));
  r.fill(1.0);
  CHECK(scale_diagonal(e, r, 0.5) == e);
}

TEST_CASE("one scale per timestep, channels accepted independently") {
  GasfTensor t;
  t.at(0, 3, 3) = 0.3;
  t.at(1, 3, 3) = 0.45;
  t.at(2, 3, 3) = -0.2;
  t.at(3, 3, 3) = 0.1;
  std::array<double, kSide> r{};
  r.fill(1.0);
  r[3] = 1.2;
  const GasfTensor s = scale_diagonal(t, r, 0.5);
  CHECK(s.at(0, 3, 3) == doctest::Approx(0.36));
  CHECK(s.at(1, 3, 3) == 0.45);  // 0.54 rejected
  CHECK(s.at(2, 3, 3) == doctest::Approx(-0.24));
  CHECK(s.at(3, 3, 3) == doctest::Approx(0.12));
  CHECK(s.at(0, 3, 4) == t.at(0, 3, 4));
}

TEST_CASE("perturb_diagonal touches only the diagonal") {
  Rng rng = make_rng(2);
  const GasfTensor t = encode(gafx::testing::random_window(rng));
  const GasfTensor p = perturb_diagonal(t, rng, AttackConfig{});
  for (std::size_t c = 0; c < kChannels; ++c)
    for (std::size_t i = 0; i < kSide; ++i)
      for (std::size_t j = 0; j < kSide; ++j)
        if (i != j) CHECK(p.at(c, i, j) == t.at(c, i, j));
}

TEST_CASE("reencode is a fixed point on clean tensors") {
  Rng rng = make_rng(3);
  for (int k = 0; k < 100; ++k) {
    const GasfTensor t = encode(gafx::testing::random_window(rng));
    const GasfTensor r = reencode(t);
    for (std::size_t c = 0; c < kChannels; ++c)
      for (std::size_t i = 0; i < kSide * kSide; ++i) CHECK(std::abs(r.channels[c][i] - t.channels[c][i]) <= 1e-12);
  }
}

TEST_CASE("reencode rebuilds the row and column of a perturbed entry") {
  Rng rng = make_rng(4);
  const Window w = gafx::testing::random_window(rng);
  const NormalizedSeries s = normalize(w);
  GasfTensor t = encode(s);
  const std::size_t c = 3, i = 4;
  const double d = 0.8 * t.at(c, i, i);
  t.at(c, i, i) = d;
  const GasfTensor r = reencode(t);
  const double phi_i = std::acos(d) / 2;
  for (std::size_t j = 0; j < kSide; ++j) {
    const double phi_j = j == i ? phi_i : std::acos(s.channels[c][j]);
    CHECK(std::abs(r.at(c, i, j) - std::cos(phi_i + phi_j)) <= 1e-12);
    CHECK(r.at(c, j, i) == r.at(c, i, j));
    CHECK(std::abs(r.at(c, j, j) - t.at(c, j, j)) <= 1e-12);
  }
  CHECK(r.at(c, i, i) == d);
  for (const auto& m : r.channels)
    for (double g : m) CHECK(std::abs(g) <= 1.0);
}

TEST_CASE("constant classifier exhausts the budget") {
  const LabeledWindow s = sample(1);
  const ConstantClassifier clf(code(s.label));
  AttackConfig cfg;
  cfg.seed = 5;
  const auto o = attack(clf, s, cfg);
  REQUIRE(o.has_value());
  CHECK_FALSE(o->success);
  CHECK_FALSE(o->adversarial.has_value());
  CHECK(o->episodes_used == 150);
  CHECK(o->trace.size() == 150);
  CHECK(clf.queries == 151);  // one baseline query, then one per episode
}

TEST_CASE("misclassified samples are skipped") {
  const LabeledWindow s = sample(2);
  const ConstantClassifier clf(0);
  CHECK_FALSE(attack(clf, s, AttackConfig{}).has_value());
  Rng rng = make_rng(1);
  CHECK_THROWS_AS(attack(clf, s, one_hot(0), AttackConfig{}, rng), UsageError);
}

TEST_CASE("successful attack yields a consistent flipped example") {
  const LabeledWindow s = sample(3);
  const GasfTensor clean = encode(s.window);
  const DriftClassifier clf(clean, code(s.label), 0.3);
  AttackConfig cfg;
  cfg.seed = 9;
  Rng rng = make_rng(cfg.seed);
  const AttackOutcome o = attack(clf, s, one_hot(code(s.label)), cfg, rng);
  REQUIRE(o.success);
  REQUIRE(o.adversarial.has_value());
  CHECK(o.episodes_used <= cfg.episodes);
  CHECK(clf.queries == o.episodes_used);
  CHECK(o.adversarial->predicted != code(s.label));
  CHECK(clf.classify(o.adversarial->tensor).argmax == o.adversarial->predicted);
  CHECK(o.trace.back().predicted == o.adversarial->predicted);

  const GasfTensor again = reencode(o.adversarial->tensor);
  for (std::size_t c = 0; c < kChannels; ++c)
    for (std::size_t k = 0; k < kSide * kSide; ++k)
      CHECK(std::abs(again.channels[c][k] - o.adversarial->tensor.channels[c][k]) <= 1e-12);

  REQUIRE(o.adversarial->window.has_value());
  CHECK(is_valid_window(*o.adversarial->window));
}

TEST_CASE("attacks are deterministic for a seed") {
  const LabeledWindow s = sample(4);
  const DriftClassifier clf(encode(s.window), code(s.label), 0.5);
  AttackConfig cfg;
  cfg.seed = 12;
  const auto a = attack(clf, s, cfg), b = attack(clf, s, cfg);
  REQUIRE(a.has_value());
  CHECK(a->trace == b->trace);
  CHECK(a->episodes_used == b->episodes_used);
  CHECK(a->success == b->success);
  if (a->success) CHECK(a->adversarial->tensor == b->adversarial->tensor);
  cfg.seed = 13;
  CHECK_FALSE(attack(clf, s, cfg)->trace == a->trace);
}

TEST_CASE("working tensor is restored at every reset boundary") {
  const LabeledWindow s = sample(5);
  const GasfTensor clean = encode(s.window);
  const ConstantClassifier clf(code(s.label));
  AttackConfig cfg;
  cfg.reset_period = 10;
  Rng rng = make_rng(3);
  std::size_t boundaries = 0, drifted = 0;
  attack(clf, s, one_hot(code(s.label)), cfg, rng, [&](std::size_t episode, const GasfTensor& w) {
    if ((episode - 1) % cfg.reset_period == 0) {
      ++boundaries;
      CHECK(w == clean);
    } else if (!(w == clean)) {
      ++drifted;
    }
  });
  CHECK(boundaries == 15);
  CHECK(drifted > 0);  // perturbations accumulate between resets
}

TEST_CASE("entries beyond bound / scale_low are never modified") {
  const AttackConfig cfg;
  const double reach = cfg.bound / cfg.scale_low;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const LabeledWindow s = sample(100 + k, label_from_code(static_cast<int>(1 + k % 8)));
    const GasfTensor clean = encode(s.window);
    const ConstantClassifier clf(code(s.label));
    Rng rng = make_rng(k);
    attack(clf, s, one_hot(code(s.label)), cfg, rng, [&](std::size_t, const GasfTensor& w) {
      for (std::size_t c = 0; c < kChannels; ++c) {
        for (std::size_t i = 0; i < kSide; ++i) {
          if (std::abs(clean.at(c, i, i)) >= reach) CHECK(w.at(c, i, i) == clean.at(c, i, i));
          for (std::size_t j = 0; j < kSide; ++j) CHECK(w.at(c, i, j) == w.at(c, j, i));
        }
      }
    });
  }
}

TEST_CASE("summarize computes ratios and omits empty labels") {
  const std::vector<LabelStats> stats = {{2, 10, 4, 1}, {1, 0, 0, 0}, {3, 0, 0, 5}, {4, 20, 5, 0}};
  const AttackReport r = summarize(stats);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].label == 2);
  CHECK(r.rows[1].label == 3);
  CHECK(r.rows[1].ratio() == 0.0);
  CHECK(r.mean_ratio == doctest::Approx((0.4 + 0.25) / 2));
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("label 1") != std::string::npos);
}

TEST_CASE("batch attack with everything misclassified attempts nothing") {
  GeneratorConfig g;
  g.per_label = 3;
  g.none_count = 3;
  const Dataset d = generate_dataset(g, {}, 1);
  const ConstantClassifier clf(0);
  const Campaign c = batch_attack(clf, d, AttackConfig{});
  REQUIRE(c.report.rows.size() == 8);
  for (const auto& row : c.report.rows) {
    CHECK(row.attempted == 0);
    CHECK(row.skipped == 3);
  }
  CHECK(c.outcomes.empty());
  CHECK(c.report.mean_ratio == 0.0);
}

TEST_CASE("batch attack respects the per-label cap") {
  GeneratorConfig g;
  g.per_label = 4;
  g.none_count = 4;
  const Dataset d = generate_dataset(g, {}, 2);
  const ConstantClassifier clf(3);
  CampaignOptions opt;
  opt.labels = {3, 7};
  opt.max_per_label = 2;
  AttackConfig cfg;
  cfg.episodes = 3;
  const Campaign c = batch_attack(clf, d, cfg, opt);
  REQUIRE(c.report.rows.size() == 2);
  CHECK(c.report.rows[0].attempted == 2);
  CHECK(c.report.rows[1].attempted == 0);
  CHECK(c.report.rows[1].skipped == 4);
  CHECK(c.outcomes.size() == 2);
  for (std::size_t k = 0; k < c.outcomes.size(); ++k)
    CHECK(c.outcomes[k].original_window == d.samples[c.sample_indices[k]].window);
}
