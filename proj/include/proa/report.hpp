#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "proa/verifier.hpp"

namespace proa::report {

/// One CSV line. Column order is fixed:
/// image_id,family,verdict,mu_hat,epsilon,samples_used,margin_d,wall_time
struct ReportRow {
  std::string image_id;
  std::string family;
  Verdict verdict = Verdict::Undetermined;
  double mu_hat = 0.0;
  double epsilon = 0.0;
  std::uint64_t samples_used = 0;
  double margin_d = 0.0;
  double wall_time = 0.0;
};

inline constexpr const char* kCsvHeader =
    "image_id,family,verdict,mu_hat,epsilon,samples_used,margin_d,wall_time";

ReportRow make_row(const std::string& image_id, const std::string& family, const VerifyOutcome& o);

/// 6 significant digits.
std::string format_number(double v);

/// Writes header plus rows. The wall_time column is left empty unless
/// `with_timing` is set so that reports stay byte-stable across runs.
void write_csv(std::ostream& out, std::span<const ReportRow> rows, bool with_timing);

struct ParsedRow {
  std::string image_id;
  std::string family;
  std::string verdict;
  double mu_hat = 0.0;
  double epsilon = 0.0;
  std::uint64_t samples_used = 0;
  double margin_d = 0.0;
};

/// Reads back a report written by write_csv. Throws std::runtime_error on a
/// malformed file.
std::vector<ParsedRow> read_csv(std::istream& in);

/// Summary fields: certified_pct, violated_pct, undetermined_pct,
/// misclassified_pct (over evaluated images), avg_runtime_s, avg_samples,
/// certified_accuracy, counts, failures.
nlohmann::json summarize(std::span<const ImageResult> results);

}  // namespace proa::report
