#include <gtest/gtest.h>

#include <sstream>

#include "proa/report.hpp"

namespace {

using namespace proa;
using namespace proa::report;

VerifyOutcome outcome(Verdict v, double mu, double eps, std::uint64_t n) {
  VerifyOutcome o;
  o.verdict = v;
  o.mu_hat = mu;
  o.epsilon = eps;
  o.samples_used = n;
  o.margin_d = 0.123456789;
  o.wall_time = 1.5;
  return o;
}

TEST(Csv, FixedColumnsAndSixDigits) {
  const std::vector<ReportRow> rows{make_row("a.imt", "rotation", outcome(Verdict::Certified, 1.0, 0.0495291, 3900)),
                                    make_row("b,c", "hue", outcome(Verdict::Violated, 0.81234567, 0.02, 7000))};
  std::ostringstream os;
  write_csv(os, rows, false);
  EXPECT_EQ(os.str(),
            std::string(kCsvHeader) + "\n" +
                "a.imt,rotation,certified,1,0.0495291,3900,0.123457,\n"
                "\"b,c\",hue,violated,0.812346,0.02,7000,0.123457,\n");
  std::ostringstream timed;
  write_csv(timed, rows, true);
  EXPECT_NE(timed.str().find(",1.5\n"), std::string::npos);

  std::istringstream in(os.str());
  const auto parsed = read_csv(in);
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed[1].image_id, "b,c");
  EXPECT_EQ(parsed[1].verdict, "violated");
  EXPECT_EQ(parsed[0].samples_used, 3900u);
  EXPECT_DOUBLE_EQ(parsed[1].mu_hat, 0.812346);
}

TEST(Csv, RejectsBadHeader) {
  std::istringstream in("id,verdict\n");
  EXPECT_THROW(read_csv(in), std::runtime_error);
}

TEST(Summary, PercentagesAndFailures) {
  std::vector<ImageResult> rs{{"a", outcome(Verdict::Certified, 1, 0.04, 100), ""},
                              {"b", outcome(Verdict::Violated, 0.5, 0.04, 300), ""},
                              {"c", outcome(Verdict::Undetermined, 0.95, 0.06, 200), ""},
                              {"d", outcome(Verdict::Misclassified, 0, 0, 0), ""},
                              {"e", {}, "boom"},
                              {"f", outcome(Verdict::Certified, 1, 0.04, 400), ""}};
  const auto j = summarize(rs);
  const double total = j["certified_pct"].get<double>() + j["violated_pct"].get<double>() +
                       j["undetermined_pct"].get<double>() + j["misclassified_pct"].get<double>();
  EXPECT_NEAR(total, 100.0, 0.01);
  EXPECT_NEAR(j["certified_pct"].get<double>(), 40.0, 1e-9);
  EXPECT_NEAR(j["certified_accuracy"].get<double>(), 0.4, 1e-12);
  EXPECT_NEAR(j["avg_samples"].get<double>(), 200.0, 1e-12);
  EXPECT_EQ(j["counts"]["failed"], 1);
  ASSERT_EQ(j["failures"].size(), 1u);
  EXPECT_EQ(j["failures"][0]["image_id"], "e");
}

}  // namespace
