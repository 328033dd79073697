#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gafx/app.hpp"
#include "gafx/binary_io.hpp"
#include "gafx/errors.hpp"
#include "support.hpp"

using namespace gafx;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gafx");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return read_file(p); }

}  // namespace

TEST_CASE("config file parsing and canonical echo") {
  RunConfig cfg;
  std::istringstream in(
      "# comment\n"
      "[run]\nseed = 9\n"
      "[data]\nper_label = 30\n"
      "[patterns]\ntall_body_frac = 0.7\n"
      "[train]\nepochs = 4\nlearning_rate = 0.002\n"
      "[attack]\nepisodes = 50\nlabels = 1, 4,8\n");
  apply_config(cfg, in);
  CHECK(cfg.seed == 9);
  CHECK(cfg.generator.per_label == 30);
  CHECK(cfg.generator.none_count == 60);
  CHECK(cfg.thresholds.tall_body_frac == 0.7);
  CHECK(cfg.train.epochs == 4);
  CHECK(cfg.train.learning_rate == 0.002);
  CHECK(cfg.attack.episodes == 50);
  CHECK(cfg.attack_labels == std::vector<int>{1, 4, 8});
  cfg.resolve();
  CHECK(cfg.attack.seed == 9);

  RunConfig again;
  std::istringstream echo(cfg.to_text());
  apply_config(again, echo);
  CHECK(again.to_text() == cfg.to_text());
  CHECK(cfg.to_text().find("workers") == std::string::npos);
}

TEST_CASE("bundled desk config parses") {
  RunConfig cfg;
  apply_config_file(cfg, GAFX_SOURCE_DIR "/tools/desk.ini");
  CHECK(cfg.generator.per_label == 200);
  CHECK(cfg.generator.none_count == 400);
  CHECK(cfg.workers == 4);
  CHECK_NOTHROW(cfg.resolve());
}

TEST_CASE("config errors are usage errors") {
  RunConfig cfg;
  std::istringstream unknown("[train]\nmomentum = 3\n");
  CHECK_THROWS_AS(apply_config(cfg, unknown), UsageError);
  std::istringstream bad("[run]\nseed = abc\n");
  CHECK_THROWS_AS(apply_config(cfg, bad), UsageError);
  std::istringstream label("[attack]\nlabels = 1,9\n");
  CHECK_THROWS_AS(apply_config(cfg, label), UsageError);
  RunConfig r;
  r.attack.scale_low = 2.0;
  CHECK_THROWS_AS(r.resolve(), UsageError);
  CHECK_THROWS_AS(r.set_per_label(0), UsageError);
}

TEST_CASE("generate: counts, determinism and usage errors") {
  const fs::path a = gafx::testing::scratch_dir("cli_gen_a"), b = gafx::testing::scratch_dir("cli_gen_b");
  Run r = cli({"generate", "--per-label", "50", "--seed", "7", "--out", a.string()});
  REQUIRE(r.code == 0);
  const Dataset tr = load_dataset(a / "train.gafl"), te = load_dataset(a / "test.gafl");
  std::array<std::size_t, kNumClasses> total{};
  for (std::size_t l = 0; l < kNumClasses; ++l) total[l] = class_counts(tr)[l] + class_counts(te)[l];
  CHECK(total[0] == 100);
  for (std::size_t l = 1; l < kNumClasses; ++l) CHECK(total[l] == 50);
  CHECK(slurp(a / "manifest.txt").find("seed = 7") != std::string::npos);
  CHECK(tr.provenance.find("per_label = 50") != std::string::npos);

  REQUIRE(cli({"generate", "--per-label", "50", "--seed", "7", "--out", b.string(), "--workers", "3"}).code == 0);
  CHECK(slurp(a / "train.gafl") == slurp(b / "train.gafl"));
  CHECK(slurp(a / "test.gafl") == slurp(b / "test.gafl"));

  CHECK(cli({"generate", "--per-label", "0", "--out", b.string()}).code == 2);
  CHECK(cli({"generate", "--bogus"}).code == 2);
  CHECK(cli({}).code == 2);
}

TEST_CASE("train, eval, attack and render on a tiny run") {
  const fs::path dir = gafx::testing::scratch_dir("cli_pipeline");
  const std::string out = dir.string();
  REQUIRE(cli({"generate", "--per-label", "12", "--seed", "3", "--out", out}).code == 0);
  Run t = cli({"train", "--epochs", "2", "--seed", "3", "--out", out});
  REQUIRE(t.code == 0);
  CHECK(fs::exists(dir / "model.gafc"));
  std::string log = slurp(dir / "metrics.log");
  std::size_t records = 0;
  std::istringstream lines(log);
  for (std::string line; std::getline(lines, line);)
    if (!line.empty() && line[0] != '#') ++records;
  CHECK(records == 2);

  const std::string first_ck = slurp(dir / "model.gafc");
  REQUIRE(cli({"train", "--epochs", "2", "--seed", "3", "--out", out}).code == 0);
  CHECK(slurp(dir / "model.gafc") == first_ck);
  CHECK(slurp(dir / "metrics.log") == log);

  REQUIRE(cli({"eval", "--out", out}).code == 0);
  CHECK(slurp(dir / "eval.txt").find("accuracy") != std::string::npos);

  const fs::path atk = dir / "attack";
  Run a = cli({"attack", "--data", out, "--out", atk.string(), "--seed", "5", "--render", "1", "--workers", "2"});
  REQUIRE(a.code == 0);
  const std::string csv = slurp(atk / "report.csv");
  CHECK(csv.find("label,succeeded,attempted,skipped,ratio,percent\n") != std::string::npos);
  CHECK(slurp(atk / "report.txt").find("Label   | Success Rate | Percent (%)") != std::string::npos);
  REQUIRE(cli({"attack", "--data", out, "--out", atk.string(), "--seed", "5", "--render", "1"}).code == 0);
  CHECK(slurp(atk / "report.csv") == csv);

  REQUIRE(cli({"render", "--out", out, "--index", "2", "--channel", "high"}).code == 0);
  CHECK(fs::exists(dir / "figures" / "sample2_candles.svg"));
  CHECK(fs::exists(dir / "figures" / "sample2_gasf.svg"));
  CHECK(cli({"render", "--out", out, "--index", "100000"}).code == 2);
  CHECK(cli({"render", "--out", out, "--channel", "volume"}).code == 2);
}

TEST_CASE("missing and corrupt inputs exit with 2") {
  const fs::path dir = gafx::testing::scratch_dir("cli_missing");
  Run r = cli({"train", "--out", dir.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("dataset not found") != std::string::npos);
  CHECK(cli({"attack", "--out", dir.string()}).code == 2);

  write_file(dir / "train.gafl", "NOPE1 garbage");
  r = cli({"train", "--out", dir.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("magic string mismatch") != std::string::npos);
  CHECK(cli({"train", "--config", (dir / "absent.ini").string()}).code == 2);
}

TEST_CASE("divergence exits with 3 and keeps a checkpoint") {
  const fs::path dir = gafx::testing::scratch_dir("cli_diverge");
  REQUIRE(cli({"generate", "--per-label", "6", "--out", dir.string()}).code == 0);
  std::ofstream(dir / "run.ini") << "[train]\nlearning_rate = 1e300\n";
  Run r = cli({"train", "--config", (dir / "run.ini").string(), "--epochs", "3", "--out", dir.string()});
  CHECK(r.code == 3);
  CHECK(fs::exists(dir / "model.gafc"));
}

TEST_CASE("installed binary reports exit codes") {
  const fs::path dir = gafx::testing::scratch_dir("cli_binary");
  const std::string bin = GAFX_CLI_PATH;
  CHECK(std::system((bin + " generate --per-label 0 --out " + dir.string() + " 2>/dev/null").c_str()) != 0);
  CHECK(std::system((bin + " generate --per-label 3 --out " + dir.string() + " >/dev/null").c_str()) == 0);
  CHECK(fs::exists(dir / "train.gafl"));
}
