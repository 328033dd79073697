#include <doctest.h>

#include <sstream>

#include "gafx/report.hpp"

using namespace gafx;

namespace {

// Reference campaign: 1500 attacked samples per label.
const std::vector<LabelStats> kPublished = {
    {1, 1500, 631, 0},  {2, 1500, 972, 0},  {3, 1500, 1079, 0}, {4, 1500, 1319, 0},
    {5, 1500, 602, 0},  {6, 1500, 932, 0},  {7, 1500, 953, 0},  {8, 1500, 1238, 0},
};

}  // namespace

TEST_CASE("percent rounding to one decimal") {
  CHECK(percent_tenths(631, 1500) == 421);
  CHECK(percent_tenths(1319, 1500) == 879);
  CHECK(percent_tenths(602, 1500) == 401);
  CHECK(percent_tenths(1, 8) == 125);  // 12.5 exactly
  CHECK(percent_tenths(1, 2000) == 1);  // 0.05 rounds up
  CHECK(percent_tenths(0, 0) == 0);
  CHECK(percent_tenths(0.0) == 0);
  CHECK(percent_tenths(1.0) == 1000);
  CHECK(format_tenths(421) == "42.1");
  CHECK(format_tenths(5) == "0.5");
  CHECK(format_tenths(1000) == "100.0");
}

TEST_CASE("percent column matches the ratio for every count") {
  for (std::size_t a = 1; a <= 300; ++a) {
    for (std::size_t s = 0; s <= a; ++s) {
      const double exact = 1000.0 * static_cast<double>(s) / static_cast<double>(a);
      CHECK(std::abs(static_cast<double>(percent_tenths(s, a)) - exact) <= 0.5 + 1e-9);
    }
  }
}

TEST_CASE("reference campaign rows and mean") {
  const AttackReport r = summarize(kPublished);
  const std::string table = format_report_table(r);
  for (const char* row : {"1       | 631 / 1500   | 42.1", "2       | 972 / 1500   | 64.8",
                          "3       | 1079 / 1500  | 71.9", "4       | 1319 / 1500  | 87.9",
                          "5       | 602 / 1500   | 40.1", "6       | 932 / 1500   | 62.1",
                          "7       | 953 / 1500   | 63.5", "8       | 1238 / 1500  | 82.5"}) {
    CHECK(table.find(row) != std::string::npos);
  }
  // The reference mean (64.36) averages the rounded percents; the exact mean
  // of the ratios is 7726 / 12000.
  CHECK(r.mean_ratio == doctest::Approx(7726.0 / 12000.0).epsilon(1e-15));
  CHECK(std::abs(100.0 * r.mean_ratio - 64.36) < 0.05);
  CHECK(table.find("Average | -            | 64.4") != std::string::npos);
}

TEST_CASE("table layout") {
  const AttackReport r = summarize(kPublished);
  const std::string table = format_report_table(r, "seed = 1\n");
  std::istringstream in(table);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# seed = 1");
  std::getline(in, line);
  CHECK(line == "Label   | Success Rate | Percent (%)");
  std::getline(in, line);
  CHECK(line == "--------+--------------+------------");
}

TEST_CASE("csv layout") {
  AttackReport r = summarize(std::vector<LabelStats>{{2, 3, 1, 4}, {5, 8, 1, 0}});
  const std::string csv = format_report_csv(r);
  CHECK(csv ==
        "label,succeeded,attempted,skipped,ratio,percent\n"
        "2,1,3,4,0.333333,33.3\n"
        "5,1,8,0,0.125000,12.5\n"
        "average,,,,0.229167,22.9\n");
}

TEST_CASE("warnings are emitted as comments") {
  const AttackReport r = summarize(std::vector<LabelStats>{{1, 0, 0, 0}, {2, 4, 2, 0}});
  const std::string table = format_report_table(r);
  CHECK(table.find("# warning: label 1 has no samples; omitted") != std::string::npos);
}

TEST_CASE("comment_block prefixes every line") {
  CHECK(comment_block("a = 1\nb = 2\n") == "# a = 1\n# b = 2\n");
  CHECK(comment_block("") == "");
}
