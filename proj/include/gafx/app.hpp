#pragma once

#include <ostream>

#include "gafx/config.hpp"

namespace gafx {

// Subcommands. Each reads its inputs from cfg.data_dir(), writes into cfg.out
// and prints a short summary to `log`. Errors are thrown; run_cli maps them
// onto exit codes.

// train.gafl, test.gafl, manifest.txt
void cmd_generate(const RunConfig& cfg, std::ostream& log);
// Same outputs as generate, from cfg.csv windows labeled by detect_pattern.
void cmd_ingest(const RunConfig& cfg, std::ostream& log);
// model.gafc, metrics.log. On divergence the last good model is saved before
// the error propagates.
void cmd_train(const RunConfig& cfg, std::ostream& log);
// eval.txt
void cmd_eval(const RunConfig& cfg, std::ostream& log);
// report.txt, report.csv, and with cfg.render > 0 figures/label{L}_{k}_*.svg
void cmd_attack(const RunConfig& cfg, std::ostream& log);
// figures/sample{K}_candles.svg and figures/sample{K}_gasf.svg for one test sample.
void cmd_render(const RunConfig& cfg, std::size_t index, std::size_t channel, std::ostream& log);

// Exit codes: 0 success, 1 internal error, 2 missing or invalid input,
// 3 numeric divergence. No environment variables are read.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gafx
