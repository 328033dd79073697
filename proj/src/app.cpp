#include "gafx/app.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gafx/binary_io.hpp"
#include "gafx/errors.hpp"
#include "gafx/render.hpp"
#include "gafx/report.hpp"

namespace fs = std::filesystem;

namespace gafx {

namespace {

constexpr const char* kTrainFile = "train.gafl";
constexpr const char* kTestFile = "test.gafl";
constexpr const char* kModelFile = "model.gafc";
constexpr std::uint64_t kValidStream = 0x7A11D;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw InputError("cannot create output directory " + dir.string());
  }
}

std::string counts_line(const Dataset& d) {
  const auto c = class_counts(d);
  std::string s;
  for (std::size_t l = 0; l < kNumClasses; ++l) {
    s += (l ? " " : "") + std::to_string(c[l]);
  }
  return s;
}

std::string manifest(const RunConfig& cfg, const Dataset& train, const Dataset& test,
                     std::string_view origin) {
  std::ostringstream o;
  o << "# gafx dataset manifest\n"
    << "origin = " << origin << '\n'
    << "train_samples = " << train.samples.size() << '\n'
    << "test_samples = " << test.samples.size() << '\n'
    << "train_counts = " << counts_line(train) << '\n'
    << "test_counts = " << counts_line(test) << '\n'
    << cfg.to_text();
  return o.str();
}

void write_split(const RunConfig& cfg, const Dataset& all, std::string_view origin,
                 std::ostream& log) {
  auto [train, test] = split(all, cfg.train_fraction, cfg.seed);
  ensure_dir(cfg.out);
  save_dataset(cfg.out / kTrainFile, train);
  save_dataset(cfg.out / kTestFile, test);
  write_file(cfg.out / "manifest.txt", manifest(cfg, train, test, origin));
  log << "wrote " << train.samples.size() << " train and " << test.samples.size()
      << " test samples to " << cfg.out.string() << '\n'
      << "class counts (0..8): " << counts_line(all) << '\n';
}

Dataset load_required(const fs::path& path) {
  if (!fs::exists(path)) {
    throw InputError("dataset not found: " + path.string());
  }
  return load_dataset(path);
}

Checkpoint load_model(const fs::path& dir) {
  const fs::path path = dir / kModelFile;
  if (!fs::exists(path)) {
    throw InputError("checkpoint not found: " + path.string());
  }
  return load_checkpoint(path);
}

std::string fmt(const char* spec, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

PanelAnnotation note(std::string title, int predicted, double confidence) {
  return PanelAnnotation{std::move(title), predicted, confidence};
}

std::string trace_csv(const AttackOutcome& o, std::string_view provenance) {
  std::ostringstream s;
  s << comment_block(provenance) << "episode,predicted,confidence\n";
  for (std::size_t e = 0; e < o.trace.size(); ++e) {
    s << e + 1 << ',' << o.trace[e].predicted << ',' << fmt("%.17g", o.trace[e].confidence) << '\n';
  }
  return s.str();
}

void render_outcomes(const RunConfig& cfg, const Campaign& c, std::ostream& log) {
  const fs::path dir = cfg.out / "figures";
  ensure_dir(dir);
  const std::string prov = cfg.to_text();
  std::array<std::size_t, kNumClasses> written{};
  for (const auto& o : c.outcomes) {
    auto& k = written[static_cast<std::size_t>(o.original_label)];
    if (!o.success || k >= cfg.render) {
      continue;
    }
    const auto& adv = *o.adversarial;
    const std::string stem =
        "label" + std::to_string(o.original_label) + "_" + std::to_string(k);
    const auto before = note("original", o.original_label, o.original_confidence);
    const auto after = note("after attack", adv.predicted, adv.confidence);
    const Window& attacked = adv.window ? *adv.window : o.original_window;
    write_file(dir / (stem + "_candles.svg"),
               render_candles_pair(o.original_window, before, attacked, after, prov));
    write_file(dir / (stem + "_gasf.svg"),
               render_gasf_pair(o.original_tensor, before, adv.tensor, after,
                                static_cast<std::size_t>(Channel::kClose), prov));
    write_file(dir / (stem + ".trace.csv"), trace_csv(o, prov));
    ++k;
  }
  for (int l : cfg.attack_labels) {
    const auto k = written[static_cast<std::size_t>(l)];
    if (k < cfg.render) {
      log << "label " << l << ": only " << k << " successful attacks to render\n";
    }
  }
}

}  // namespace

void cmd_generate(const RunConfig& cfg, std::ostream& log) {
  Dataset all = generate_dataset(cfg.generator, cfg.thresholds, cfg.seed, cfg.workers);
  all.provenance = cfg.to_text();
  write_split(cfg, all, "synthetic", log);
}

void cmd_ingest(const RunConfig& cfg, std::ostream& log) {
  if (cfg.csv.empty()) {
    throw UsageError("ingest needs --csv PATH");
  }
  std::ifstream in(cfg.csv, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + cfg.csv.string());
  }
  const CsvParseResult parsed = parse_csv(in, cfg.schema);
  for (const auto& e : parsed.errors) {
    log << cfg.csv.string() << ':' << e.line << ": skipped row: " << e.message << '\n';
  }
  log << parsed.bars.size() << " bars accepted, " << parsed.errors.size() << " rows skipped\n";
  Dataset all;
  all.seed = cfg.seed;
  all.provenance = cfg.to_text() + "csv = " + cfg.csv.string() + '\n';
  for (const auto& w : slide_windows(parsed.bars, cfg.stride)) {
    all.samples.push_back({w, detect_pattern(w, cfg.thresholds)});
  }
  write_split(cfg, all, "csv", log);
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = cfg.data_dir();
  const Dataset train_all = load_required(dir / kTrainFile);
  auto [fit, valid] = split(train_all, 1.0 - cfg.valid_fraction, cfg.seed ^ kValidStream);
  const EncodedSet fit_set = encode_dataset(fit, cfg.workers);
  const EncodedSet valid_set = encode_dataset(valid, cfg.workers);

  Model model = Model::gasf_cnn();
  model.initialize(cfg.seed);
  ensure_dir(cfg.out);

  CheckpointMeta meta;
  meta.seed = cfg.seed;
  meta.provenance = cfg.to_text();
  auto write_log = [&](const std::vector<EpochMetrics>& h) {
    write_file(cfg.out / "metrics.log", comment_block(meta.provenance) + format_history(h));
  };

  try {
    TrainResult r = train(std::move(model), fit_set, valid_set, cfg.train);
    const auto& best = r.history[r.best_epoch - 1];
    meta.epochs = static_cast<std::uint32_t>(r.history.size());
    meta.train_loss = best.train_loss;
    meta.valid_accuracy = best.valid_accuracy;
    save_checkpoint(cfg.out / kModelFile, {std::move(r.model), meta});
    write_log(r.history);
    log << "trained " << r.history.size() << " epochs on " << fit_set.size() << " samples; best epoch "
        << r.best_epoch << " valid accuracy " << fmt("%.4f", r.best_valid_accuracy) << '\n';
  } catch (const TrainingDiverged& e) {
    meta.epochs = static_cast<std::uint32_t>(e.history().size());
    if (!e.history().empty()) {
      meta.train_loss = e.history().back().train_loss;
      meta.valid_accuracy = e.history().back().valid_accuracy;
    }
    save_checkpoint(cfg.out / kModelFile, {e.last_good(), meta});
    write_log(e.history());
    throw;
  }
}

void cmd_eval(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = cfg.data_dir();
  const Checkpoint ck = load_model(dir);
  const Dataset test = load_required(dir / kTestFile);
  if (test.samples.empty()) {
    throw EmptyInputError("test dataset is empty");
  }
  const Evaluation e = evaluate(ck.model, encode_dataset(test, cfg.workers), cfg.workers);
  const std::string text = comment_block(cfg.to_text()) + format_evaluation(e);
  ensure_dir(cfg.out);
  write_file(cfg.out / "eval.txt", text);
  log << format_evaluation(e);
}

void cmd_attack(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = cfg.data_dir();
  const Checkpoint ck = load_model(dir);
  const Dataset test = load_required(dir / kTestFile);
  const ModelClassifier clf(ck.model);
  CampaignOptions opt;
  opt.labels = cfg.attack_labels;
  opt.max_per_label = cfg.attack_per_label;
  opt.workers = cfg.workers;
  const Campaign c = batch_attack(clf, test, cfg.attack, opt);

  const std::string prov = cfg.to_text();
  ensure_dir(cfg.out);
  write_file(cfg.out / "report.txt", format_report_table(c.report, prov));
  write_file(cfg.out / "report.csv", format_report_csv(c.report, prov));
  if (cfg.render > 0) {
    render_outcomes(cfg, c, log);
  }
  log << format_report_table(c.report);
}

void cmd_render(const RunConfig& cfg, std::size_t index, std::size_t channel, std::ostream& log) {
  const fs::path dir = cfg.data_dir();
  const Dataset test = load_required(dir / kTestFile);
  if (index >= test.samples.size()) {
    throw UsageError("--index " + std::to_string(index) + " out of range (test set has " +
                     std::to_string(test.samples.size()) + " samples)");
  }
  const LabeledWindow& s = test.samples[index];
  PanelAnnotation n{"sample " + std::to_string(index) + " label " + std::to_string(code(s.label)),
                    -1, 0.0};
  if (fs::exists(dir / kModelFile)) {
    const Checkpoint ck = load_model(dir);
    const Prediction p = forward(ck.model, to_input(encode(s.window)));
    n.predicted = p.argmax;
    n.confidence = p.confidence;
  }
  const fs::path out = cfg.out / "figures";
  ensure_dir(out);
  const std::string prov = cfg.to_text();
  const std::string stem = "sample" + std::to_string(index);
  write_file(out / (stem + "_candles.svg"), render_candles(s.window, n, prov));
  write_file(out / (stem + "_gasf.svg"), render_gasf(encode(s.window), channel, n, prov));
  log << "wrote " << (out / (stem + "_candles.svg")).string() << " and "
      << (out / (stem + "_gasf.svg")).string() << '\n';
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"GASF candlestick classification and local search attack"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> per_label, epochs, render;
  std::optional<int> workers;
  std::optional<std::string> out_dir, data_dir, csv_path;
  std::size_t index = 0;
  std::string channel = "close";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--workers", workers, "parallel workers")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--data", data_dir, "input directory (default: --out)");
  };
  auto* gen = app.add_subcommand("generate", "synthesize a labeled dataset");
  auto* ing = app.add_subcommand("ingest", "window and label a CSV of OHLC bars");
  auto* trn = app.add_subcommand("train", "train the classifier");
  auto* evl = app.add_subcommand("eval", "evaluate the classifier on the test split");
  auto* atk = app.add_subcommand("attack", "run the local search attack on the test split");
  auto* ren = app.add_subcommand("render", "draw one test sample");
  for (auto* sub : {gen, ing, trn, evl, atk, ren}) {
    common(sub);
  }
  gen->add_option("--per-label", per_label, "samples per pattern label (label 0 gets twice)");
  ing->add_option("--csv", csv_path, "input CSV")->required();
  trn->add_option("--epochs", epochs, "training epochs");
  atk->add_option("--render", render, "figure pairs per label");
  atk->add_option("--per-label", per_label, "attacked samples per label (0: all)");
  ren->add_option("--index", index, "test sample index");
  ren->add_option("--channel", channel, "open, high, low or close");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      apply_config_file(cfg, config_path);
    }
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (out_dir) cfg.out = *out_dir;
    if (data_dir) cfg.data = *data_dir;
    if (csv_path) cfg.csv = *csv_path;
    if (epochs) cfg.train.epochs = *epochs;
    if (render) cfg.render = *render;
    if (per_label) {
      if (atk->parsed()) {
        cfg.attack_per_label = *per_label;
      } else {
        cfg.set_per_label(*per_label);
      }
    }
    cfg.resolve();

    if (gen->parsed()) cmd_generate(cfg, out);
    if (ing->parsed()) cmd_ingest(cfg, out);
    if (trn->parsed()) cmd_train(cfg, out);
    if (evl->parsed()) cmd_eval(cfg, out);
    if (atk->parsed()) cmd_attack(cfg, out);
    if (ren->parsed()) cmd_render(cfg, index, parse_channel(channel), out);
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace gafx
