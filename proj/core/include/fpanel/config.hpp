#ifndef FPANEL_CONFIG_HPP
#define FPANEL_CONFIG_HPP

#include <cstdint>

namespace fpanel {

// Knobs shared by the test runner and the simulation studies. Defaults
// mirror the conventional choices (85% explained-variance cutoffs, 5%
// level); validate() rejects out-of-range values early so failures happen
// before any heavy computation.
struct RunConfig {
  // Per-series cutoff: keep the smallest number of principal components
  // whose cumulative eigenvalue share reaches the threshold.
  double variance_threshold = 0.85;

  // Same rule applied to the pooled score covariance when truncating its
  // spectral inverse.
  double pooled_threshold = 0.85;

  // If true, use a strict ">" comparison at both cutoffs instead of ">=".
  // Changes results only when a cumulative share hits a threshold exactly.
  bool strict_cutoff = false;

  // Test every lag horizon H = 1..h_max.
  int h_max = 10;

  // Nominal level of the one-sided rejection rule.
  double alpha = 0.05;

  // Remove a linear trend in the replicate index before centering.
  bool detrend = false;

  // Research option: center and scale the statistic with the full pooled
  // score dimension instead of the truncated rank. Off by default; the
  // truncated rank is what the finite-sample correction was designed for.
  bool normalize_with_total_dim = false;

  std::uint64_t seed = 0;

  // Monte Carlo replication count for size/power studies.
  int replications = 200;

  // Throws std::invalid_argument with a specific message on the first
  // violated range.
  void validate() const;
};

} // namespace fpanel

#endif
