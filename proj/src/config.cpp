#include "gafx/config.hpp"

#include <boost/program_options.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gafx/errors.hpp"

namespace po = boost::program_options;

namespace gafx {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<int> parse_labels(const std::string& text) {
  std::vector<int> labels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) {
      throw UsageError("empty entry in label list \"" + text + "\"");
    }
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item.substr(b, e - b + 1), &used);
    } catch (const std::exception&) {
      throw UsageError("invalid label \"" + item + "\"");
    }
    if (used != e - b + 1) {
      throw UsageError("invalid label \"" + item + "\"");
    }
    label_from_code(v);
    labels.push_back(v);
  }
  if (labels.empty()) {
    throw UsageError("label list is empty");
  }
  return labels;
}

std::string join_labels(const std::vector<int>& labels) {
  std::string s;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    s += (i ? "," : "") + std::to_string(labels[i]);
  }
  return s;
}

}  // namespace

void RunConfig::set_per_label(std::size_t n) {
  if (n == 0) {
    throw UsageError("--per-label must be at least 1");
  }
  generator.per_label = n;
  generator.none_count = 2 * n;
}

void RunConfig::resolve() {
  train.seed = seed;
  attack.seed = seed;
  train.workers = workers;
  if (workers < 1) {
    throw UsageError("workers must be at least 1");
  }
  if (generator.per_label == 0 || generator.none_count == 0) {
    throw UsageError("per_label and none_count must be at least 1");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train_fraction must lie in (0, 1)");
  }
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) {
    throw UsageError("valid_fraction must lie in (0, 1)");
  }
  if (stride == 0) {
    throw UsageError("stride must be at least 1");
  }
  if (train.epochs == 0 || train.batch_size == 0) {
    throw UsageError("epochs and batch_size must be at least 1");
  }
  if (!(train.learning_rate >= 0.0) || !std::isfinite(train.learning_rate)) {
    throw UsageError("learning_rate must be finite and non-negative");
  }
  attack.validate();
}

std::string RunConfig::to_text() const {
  std::ostringstream o;
  o << "[run]\n"
    << "seed = " << seed << '\n'
    << "render = " << render << '\n'
    << "[data]\n"
    << "per_label = " << generator.per_label << '\n'
    << "none_count = " << generator.none_count << '\n'
    << "train_fraction = " << fmt_double(train_fraction) << '\n'
    << "valid_fraction = " << fmt_double(valid_fraction) << '\n'
    << "base_price = " << fmt_double(generator.base_price) << '\n'
    << "volatility = " << fmt_double(generator.volatility) << '\n'
    << "trend_drift = " << fmt_double(generator.trend_drift) << '\n'
    << "max_retries = " << generator.max_retries << '\n'
    << "stride = " << stride << '\n'
    << "csv_timestamp = " << schema.timestamp << '\n'
    << "csv_open = " << schema.open << '\n'
    << "csv_high = " << schema.high << '\n'
    << "csv_low = " << schema.low << '\n'
    << "csv_close = " << schema.close << '\n'
    << "[patterns]\n"
    << "tall_body_frac = " << fmt_double(thresholds.tall_body_frac) << '\n'
    << "tall_body_mean_ratio = " << fmt_double(thresholds.tall_body_mean_ratio) << '\n'
    << "small_body_frac = " << fmt_double(thresholds.small_body_frac) << '\n'
    << "tiny_shadow_frac = " << fmt_double(thresholds.tiny_shadow_frac) << '\n'
    << "trend_slope_frac = " << fmt_double(thresholds.trend_slope_frac) << '\n'
    << "doji_rel_tol = " << fmt_double(thresholds.doji_rel_tol) << '\n'
    << "[train]\n"
    << "epochs = " << train.epochs << '\n'
    << "batch_size = " << train.batch_size << '\n'
    << "learning_rate = " << fmt_double(train.learning_rate) << '\n'
    << "beta1 = " << fmt_double(train.beta1) << '\n'
    << "beta2 = " << fmt_double(train.beta2) << '\n'
    << "epsilon = " << fmt_double(train.epsilon) << '\n'
    << "[attack]\n"
    << "scale_low = " << fmt_double(attack.scale_low) << '\n'
    << "scale_high = " << fmt_double(attack.scale_high) << '\n'
    << "bound = " << fmt_double(attack.bound) << '\n'
    << "episodes = " << attack.episodes << '\n'
    << "reset_period = " << attack.reset_period << '\n'
    << "per_label = " << attack_per_label << '\n'
    << "labels = " << join_labels(attack_labels) << '\n';
  return o.str();
}

void apply_config(RunConfig& cfg, std::istream& in, const std::string& source) {
  std::string labels = join_labels(cfg.attack_labels);
  std::string out = cfg.out.string(), data = cfg.data.string(), csv = cfg.csv.string();
  std::size_t none_count = 0;

  po::options_description d;
  d.add_options()
      ("run.seed", po::value(&cfg.seed))
      ("run.workers", po::value(&cfg.workers))
      ("run.render", po::value(&cfg.render))
      ("run.out", po::value(&out))
      ("run.data", po::value(&data))
      ("run.csv", po::value(&csv))
      ("data.per_label", po::value(&cfg.generator.per_label))
      ("data.none_count", po::value(&none_count))
      ("data.train_fraction", po::value(&cfg.train_fraction))
      ("data.valid_fraction", po::value(&cfg.valid_fraction))
      ("data.base_price", po::value(&cfg.generator.base_price))
      ("data.volatility", po::value(&cfg.generator.volatility))
      ("data.trend_drift", po::value(&cfg.generator.trend_drift))
      ("data.max_retries", po::value(&cfg.generator.max_retries))
      ("data.stride", po::value(&cfg.stride))
      ("data.csv_timestamp", po::value(&cfg.schema.timestamp))
      ("data.csv_open", po::value(&cfg.schema.open))
      ("data.csv_high", po::value(&cfg.schema.high))
      ("data.csv_low", po::value(&cfg.schema.low))
      ("data.csv_close", po::value(&cfg.schema.close))
      ("patterns.tall_body_frac", po::value(&cfg.thresholds.tall_body_frac))
      ("patterns.tall_body_mean_ratio", po::value(&cfg.thresholds.tall_body_mean_ratio))
      ("patterns.small_body_frac", po::value(&cfg.thresholds.small_body_frac))
      ("patterns.tiny_shadow_frac", po::value(&cfg.thresholds.tiny_shadow_frac))
      ("patterns.trend_slope_frac", po::value(&cfg.thresholds.trend_slope_frac))
      ("patterns.doji_rel_tol", po::value(&cfg.thresholds.doji_rel_tol))
      ("train.epochs", po::value(&cfg.train.epochs))
      ("train.batch_size", po::value(&cfg.train.batch_size))
      ("train.learning_rate", po::value(&cfg.train.learning_rate))
      ("train.beta1", po::value(&cfg.train.beta1))
      ("train.beta2", po::value(&cfg.train.beta2))
      ("train.epsilon", po::value(&cfg.train.epsilon))
      ("attack.scale_low", po::value(&cfg.attack.scale_low))
      ("attack.scale_high", po::value(&cfg.attack.scale_high))
      ("attack.bound", po::value(&cfg.attack.bound))
      ("attack.episodes", po::value(&cfg.attack.episodes))
      ("attack.reset_period", po::value(&cfg.attack.reset_period))
      ("attack.per_label", po::value(&cfg.attack_per_label))
      ("attack.labels", po::value(&labels));

  po::variables_map vm;
  try {
    po::store(po::parse_config_file(in, d, false), vm);
    po::notify(vm);
  } catch (const po::error& e) {
    throw UsageError(source + ": " + e.what());
  }
  cfg.out = out;
  cfg.data = data;
  cfg.csv = csv;
  if (vm.count("data.per_label") && !vm.count("data.none_count")) {
    cfg.generator.none_count = 2 * cfg.generator.per_label;
  }
  if (vm.count("data.none_count")) {
    cfg.generator.none_count = none_count;
  }
  if (vm.count("attack.labels")) {
    cfg.attack_labels = parse_labels(labels);
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open config file " + path.string());
  }
  apply_config(cfg, in, path.string());
}

}  // namespace gafx
