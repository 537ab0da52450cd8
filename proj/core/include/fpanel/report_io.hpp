#ifndef FPANEL_REPORT_IO_HPP
#define FPANEL_REPORT_IO_HPP

#include <string>

#include "fpanel/mcstudy.hpp"
#include "fpanel/portmanteau.hpp"

namespace fpanel {

// Human-readable table of per-horizon results, one row per H.
std::string render_test_report(const TestReport& report);

// Machine-readable JSON. `with_timestamp` exists so tests can compare two
// runs byte for byte; production callers keep the timestamp.
std::string test_report_json(const TestReport& report, bool with_timestamp = true);

// Study output as CSV with header "H,frequency,lo,hi", one row per horizon.
std::string study_result_csv(const StudyResult& result);
std::string study_result_json(const StudyResult& result, bool with_timestamp = true);
std::string render_study_result(const StudyResult& result);

std::string clt_summary_json(const CltSummary& summary, int dim, int series_length,
                             int h_max, std::uint64_t seed,
                             bool with_timestamp = true);
std::string render_clt_summary(const CltSummary& summary);

} // namespace fpanel

#endif
