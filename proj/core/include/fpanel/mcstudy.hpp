#ifndef FPANEL_MCSTUDY_HPP
#define FPANEL_MCSTUDY_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fpanel/config.hpp"
#include "fpanel/simulate.hpp"

namespace fpanel {

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// Exact (Clopper-Pearson) two-sided confidence interval for a binomial
// proportion at the given confidence level. Endpoints are beta quantiles;
// k = 0 pins lo at 0 and k = n pins hi at 1.
ConfidenceInterval clopper_pearson(int successes, int trials, double level);

// One horizon's worth of Monte Carlo output.
struct StudyRow {
  int h_max = 0;
  int rejections = 0;
  int trials = 0;
  double frequency = 0.0;
  ConfidenceInterval interval; // exact binomial CI for the frequency
};

struct StudyResult {
  std::vector<StudyRow> rows; // one per requested horizon, input order
  // Scenario bookkeeping, echoed into reports.
  int series_count = 0;
  int replicates_per_panel = 0;
  int trials = 0;
  double rho = 0.0; // 0 for size studies
  double alpha = 0.05;
  double interval_level = 0.95;
  std::uint64_t seed = 0;
};

// Extra knobs for studies; the RunConfig fields drive the per-panel test.
struct StudyOptions {
  double interval_level = 0.95;
  // 0 = one worker per hardware thread. Results are identical for any
  // value because every replication draws from its own derived stream.
  int threads = 0;
};

// Empirical size: draw `trials` panels from the null recipe, run the test
// at each horizon in h_list, report rejection frequencies with exact
// intervals. Replication r uses derive_seed(config.seed, r).
StudyResult run_size_study(const PanelGenerator& gen, std::span<const int> h_list,
                           const RunConfig& config, const StudyOptions& opts = {});

// Empirical power: same protocol with AR(1)-coloured scores at the given
// rho.
StudyResult run_power_study(const PanelGenerator& gen, double rho,
                            std::span<const int> h_list, const RunConfig& config,
                            const StudyOptions& opts = {});

// Direct check of the normal calibration of the statistic in the idealized
// setting where scores are truly iid standard normal of known dimension
// `dim` and no estimation error exists: simulate z `trials` times and
// summarize. ks_distance is the Kolmogorov-Smirnov distance to N(0, 1),
// absent when trials < 2 (flagged degenerate) since a one-point empirical
// law says nothing.
struct CltSummary {
  int trials = 0;
  double mean = 0.0;
  double sd = 0.0;
  std::optional<double> ks_distance;
  bool degenerate = false;
};

CltSummary clt_check(int dim, int series_length, int h_max, int trials,
                     std::uint64_t seed, int threads = 0);

} // namespace fpanel

#endif
