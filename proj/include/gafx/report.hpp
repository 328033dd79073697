#pragma once

#include <string>
#include <string_view>

#include "gafx/attack.hpp"
#include "gafx/classifier.hpp"

namespace gafx {

// 100 * succeeded / attempted rounded half-up to one decimal, in tenths of a
// percent (631 / 1500 -> 421). Zero when nothing was attempted.
long long percent_tenths(std::size_t succeeded, std::size_t attempted);
long long percent_tenths(double ratio);
std::string format_tenths(long long tenths);  // 421 -> "42.1"

// Aligned text table: "Label | Success Rate | Percent (%)" with one row per
// label ("631 / 1500 | 42.1") and an average row carrying the mean of the
// per-label ratios. Non-empty provenance is prepended as "# " lines.
std::string format_report_table(const AttackReport& r, std::string_view provenance = {});

// label,succeeded,attempted,skipped,ratio,percent, then an "average" row.
std::string format_report_csv(const AttackReport& r, std::string_view provenance = {});

std::string format_evaluation(const Evaluation& e);

// Prefixes every line of `text` with "# ".
std::string comment_block(std::string_view text);

}  // namespace gafx
