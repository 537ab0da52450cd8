#include "fpanel/report_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fpanel {

namespace {

using nlohmann::ordered_json;

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string csv_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string format_pvalue(double p) {
  if (p < 0.001) return "<0.001";
  return fixed(p, 3);
}

// JSON has no infinity; the gap statistic overflows to null plus the
// warning flag.
ordered_json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

} // namespace

std::string render_test_report(const TestReport& report) {
  std::ostringstream out;
  out << "Panel: " << report.series_count << " series, " << report.replicate_count
      << " replicates\n";
  out << "Series:";
  for (std::size_t i = 0; i < report.series_labels.size(); ++i) {
    out << ' ' << report.series_labels[i] << "(p="
        << report.components_per_series[i] << ')';
  }
  out << "\nPooled dimension " << report.total_dim << ", inverted rank "
      << report.cutoff << ", level " << fixed(report.alpha, 3)
      << (report.detrended ? ", linear trend removed" : "") << '\n';
  if (report.gap_warning) {
    out << "Warning: tied covariance eigenvalues; eigenfunction estimates "
           "may be unstable\n";
  }
  out << '\n';
  out << "   H     statistic          z    p-value   reject\n";
  for (const auto& row : report.horizons) {
    char line[128];
    std::snprintf(line, sizeof line, "%4d  %12.4f  %9.3f  %9s   %s\n", row.h_max,
                  row.q_stat, row.z, format_pvalue(row.p_value).c_str(),
                  row.reject ? "yes" : "no");
    out << line;
  }
  return out.str();
}

std::string test_report_json(const TestReport& report, bool with_timestamp) {
  ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "portmanteau_test";
  if (with_timestamp) j["generated_at"] = iso_utc_now();
  j["series_count"] = report.series_count;
  j["replicate_count"] = report.replicate_count;
  j["alpha"] = report.alpha;
  j["detrended"] = report.detrended;
  ordered_json series = ordered_json::array();
  for (std::size_t i = 0; i < report.series_labels.size(); ++i) {
    series.push_back({{"label", report.series_labels[i]},
                      {"num_components", report.components_per_series[i]}});
  }
  j["series"] = std::move(series);
  j["total_dim"] = report.total_dim;
  j["cutoff"] = report.cutoff;
  j["gap"] = {{"gamma", finite_or_null(report.gap_gamma)},
              {"warning", report.gap_warning}};
  ordered_json horizons = ordered_json::array();
  for (const auto& row : report.horizons) {
    horizons.push_back({{"h_max", row.h_max},
                        {"statistic", row.q_stat},
                        {"z", row.z},
                        {"p_value", row.p_value},
                        {"reject", row.reject}});
  }
  j["horizons"] = std::move(horizons);
  return j.dump(2) + "\n";
}

std::string study_result_csv(const StudyResult& result) {
  std::ostringstream out;
  out << "H,frequency,lo,hi\n";
  for (const auto& row : result.rows) {
    out << row.h_max << ',' << csv_double(row.frequency) << ','
        << csv_double(row.interval.lo) << ',' << csv_double(row.interval.hi)
        << '\n';
  }
  return out.str();
}

std::string study_result_json(const StudyResult& result, bool with_timestamp) {
  ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "monte_carlo_study";
  if (with_timestamp) j["generated_at"] = iso_utc_now();
  j["series_count"] = result.series_count;
  j["replicates_per_panel"] = result.replicates_per_panel;
  j["trials"] = result.trials;
  j["rho"] = result.rho;
  j["alpha"] = result.alpha;
  j["interval_level"] = result.interval_level;
  j["seed"] = result.seed;
  ordered_json rows = ordered_json::array();
  for (const auto& row : result.rows) {
    rows.push_back({{"h_max", row.h_max},
                    {"rejections", row.rejections},
                    {"trials", row.trials},
                    {"frequency", row.frequency},
                    {"lo", row.interval.lo},
                    {"hi", row.interval.hi}});
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string render_study_result(const StudyResult& result) {
  std::ostringstream out;
  out << "Panels: " << result.series_count << " series x "
      << result.replicates_per_panel << " replicates, " << result.trials
      << " trials, alpha " << fixed(result.alpha, 3);
  if (result.rho != 0.0) out << ", rho " << csv_double(result.rho);
  out << "\n\n   H   frequency   " << fixed(result.interval_level * 100, 0)
      << "% interval\n";
  for (const auto& row : result.rows) {
    char line[96];
    std::snprintf(line, sizeof line, "%4d   %9.3f   (%.3f, %.3f)\n", row.h_max,
                  row.frequency, row.interval.lo, row.interval.hi);
    out << line;
  }
  return out.str();
}

std::string clt_summary_json(const CltSummary& summary, int dim,
                             int series_length, int h_max, std::uint64_t seed,
                             bool with_timestamp) {
  ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "normal_limit_check";
  if (with_timestamp) j["generated_at"] = iso_utc_now();
  j["dim"] = dim;
  j["series_length"] = series_length;
  j["h_max"] = h_max;
  j["trials"] = summary.trials;
  j["seed"] = seed;
  j["mean"] = summary.mean;
  j["sd"] = summary.sd;
  if (summary.ks_distance) {
    j["ks_distance"] = *summary.ks_distance;
  } else {
    j["ks_distance"] = nullptr;
  }
  j["degenerate"] = summary.degenerate;
  return j.dump(2) + "\n";
}

std::string render_clt_summary(const CltSummary& summary) {
  std::ostringstream out;
  out << "Normalized statistic over " << summary.trials << " trials\n";
  out << "  mean " << fixed(summary.mean, 4) << "\n";
  out << "  sd   " << fixed(summary.sd, 4) << "\n";
  if (summary.ks_distance) {
    out << "  KS distance to N(0,1) " << fixed(*summary.ks_distance, 4) << "\n";
  }
  if (summary.degenerate) {
    out << "  (single draw: dispersion and KS not meaningful)\n";
  }
  return out.str();
}

} // namespace fpanel
