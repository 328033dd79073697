#include "gafx/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <vector>

namespace gafx {

long long percent_tenths(std::size_t succeeded, std::size_t attempted) {
  if (attempted == 0) {
    return 0;
  }
  const auto s = static_cast<long long>(succeeded);
  const auto a = static_cast<long long>(attempted);
  return (2000 * s + a) / (2 * a);
}

long long percent_tenths(double ratio) { return std::llround(std::floor(ratio * 1000.0 + 0.5)); }

std::string format_tenths(long long tenths) {
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

std::string comment_block(std::string_view text) {
  std::string out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    out += "# ";
    out += text.substr(start, end - start);
    out += '\n';
    start = end + 1;
  }
  return out;
}

std::string format_report_table(const AttackReport& r, std::string_view provenance) {
  std::vector<std::array<std::string, 3>> rows;
  rows.push_back({"Label", "Success Rate", "Percent (%)"});
  for (const auto& s : r.rows) {
    rows.push_back({std::to_string(s.label),
                    std::to_string(s.succeeded) + " / " + std::to_string(s.attempted),
                    format_tenths(percent_tenths(s.succeeded, s.attempted))});
  }
  rows.push_back({"Average", "-", format_tenths(percent_tenths(r.mean_ratio))});

  std::array<std::size_t, 3> width{};
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < 3; ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::ostringstream out;
  out << comment_block(provenance);
  auto emit = [&](const std::array<std::string, 3>& row) {
    out << std::left << std::setw(static_cast<int>(width[0])) << row[0] << " | "
        << std::setw(static_cast<int>(width[1])) << row[1] << " | " << row[2] << '\n';
  };
  emit(rows.front());
  out << std::string(width[0], '-') << "-+-" << std::string(width[1], '-') << "-+-"
      << std::string(width[2], '-') << '\n';
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (i + 1 == rows.size()) {
      out << std::string(width[0], '-') << "-+-" << std::string(width[1], '-') << "-+-"
          << std::string(width[2], '-') << '\n';
    }
    emit(rows[i]);
  }
  for (const auto& w : r.warnings) {
    out << "# warning: " << w << '\n';
  }
  return out.str();
}

std::string format_report_csv(const AttackReport& r, std::string_view provenance) {
  std::ostringstream out;
  out << comment_block(provenance);
  out << "label,succeeded,attempted,skipped,ratio,percent\n";
  char ratio[32];
  for (const auto& s : r.rows) {
    std::snprintf(ratio, sizeof ratio, "%.6f", s.ratio());
    out << s.label << ',' << s.succeeded << ',' << s.attempted << ',' << s.skipped << ',' << ratio
        << ',' << format_tenths(percent_tenths(s.succeeded, s.attempted)) << '\n';
  }
  std::snprintf(ratio, sizeof ratio, "%.6f", r.mean_ratio);
  out << "average,,,," << ratio << ',' << format_tenths(percent_tenths(r.mean_ratio)) << '\n';
  return out.str();
}

std::string format_evaluation(const Evaluation& e) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "samples " << e.total << "  accuracy " << e.accuracy << "\n\n";
  out << "label  support  precision  recall\n";
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out << std::left << std::setw(5) << c << "  " << std::setw(7) << e.support[c] << "  "
        << std::setw(9) << e.precision[c] << "  " << e.recall[c] << '\n';
  }
  out << "\nconfusion (rows: true, columns: predicted)\n     ";
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out << std::right << std::setw(6) << c;
  }
  out << '\n';
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    out << std::right << std::setw(5) << t;
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      out << std::setw(6) << e.confusion[t][p];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace gafx
