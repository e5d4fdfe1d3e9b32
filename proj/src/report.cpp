#include "proa/report.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace proa::report {

ReportRow make_row(const std::string& image_id, const std::string& family, const VerifyOutcome& o) {
  return {image_id, family, o.verdict, o.mu_hat, o.epsilon, o.samples_used, o.margin_d, o.wall_time};
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace

void write_csv(std::ostream& out, std::span<const ReportRow> rows, bool with_timing) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << csv_field(r.image_id) << ',' << csv_field(r.family) << ',' << to_string(r.verdict) << ','
        << format_number(r.mu_hat) << ',' << format_number(r.epsilon) << ',' << r.samples_used << ','
        << format_number(r.margin_d) << ',';
    if (with_timing) out << format_number(r.wall_time);
    out << '\n';
  }
}

std::vector<ParsedRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("report: bad header");
  std::vector<ParsedRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw std::runtime_error("report: expected 8 fields in '" + line + "'");
    ParsedRow r;
    r.image_id = f[0];
    r.family = f[1];
    r.verdict = f[2];
    r.mu_hat = std::stod(f[3]);
    r.epsilon = std::stod(f[4]);
    r.samples_used = std::stoull(f[5]);
    r.margin_d = std::stod(f[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

nlohmann::json summarize(std::span<const ImageResult> results) {
  VerdictCounts counts;
  double runtime = 0.0;
  double samples = 0.0;
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& r : results) {
    counts.add(r);
    if (!r.ok()) {
      failures.push_back({{"image_id", r.id}, {"error", r.error}});
      continue;
    }
    runtime += r.outcome.wall_time;
    samples += static_cast<double>(r.outcome.samples_used);
  }
  const double n = static_cast<double>(counts.evaluated());
  const auto pct = [n](std::size_t k) { return n == 0 ? 0.0 : 100.0 * static_cast<double>(k) / n; };

  nlohmann::json j;
  j["images"] = results.size();
  j["evaluated"] = counts.evaluated();
  j["certified_pct"] = pct(counts.certified);
  j["violated_pct"] = pct(counts.violated);
  j["undetermined_pct"] = pct(counts.undetermined);
  j["misclassified_pct"] = pct(counts.misclassified);
  j["certified_accuracy"] = n == 0 ? 0.0 : static_cast<double>(counts.certified) / n;
  j["avg_runtime_s"] = n == 0 ? 0.0 : runtime / n;
  j["avg_samples"] = n == 0 ? 0.0 : samples / n;
  j["counts"] = {{"certified", counts.certified},
                 {"violated", counts.violated},
                 {"undetermined", counts.undetermined},
                 {"misclassified", counts.misclassified},
                 {"failed", counts.failed}};
  j["failures"] = std::move(failures);
  return j;
}

}  // namespace proa::report
