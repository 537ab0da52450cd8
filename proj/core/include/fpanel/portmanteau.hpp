#ifndef FPANEL_PORTMANTEAU_HPP
#define FPANEL_PORTMANTEAU_HPP

#include <string>
#include <vector>

#include "fpanel/config.hpp"
#include "fpanel/fpca.hpp"
#include "fpanel/panel.hpp"

namespace fpanel {

// Scores of all series glued side by side: an N x p_N matrix whose columns
// come in per-series blocks of widths p(1), ..., p(I). Rows are replicates.
class ScoreMatrix {
public:
  ScoreMatrix(Eigen::MatrixXd values, std::vector<int> block_sizes);

  static ScoreMatrix from_models(const std::vector<FpcaModel>& models);

  int replicate_count() const { return static_cast<int>(values_.rows()); }
  int total_dim() const { return static_cast<int>(values_.cols()); }
  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<int>& block_sizes() const { return block_sizes_; }

private:
  Eigen::MatrixXd values_;
  std::vector<int> block_sizes_;
};

// Pooled covariance of the stacked scores with its spectral decomposition
// and truncated inverse. The inverse keeps the leading `cutoff` directions
// (chosen by the same cumulative-share rule as the per-series FPCA) and
// zeroes the rest, which is what makes the statistic usable when p_N is
// large relative to N.
struct PooledCovariance {
  Eigen::MatrixXd c0;           // p_N x p_N, divisor N
  Eigen::VectorXd eigenvalues;  // descending, clamped at zero
  Eigen::MatrixXd eigenvectors; // orthonormal columns
  int cutoff = 0;               // q: directions kept by the inverse
  Eigen::MatrixXd inverse;      // truncated spectral inverse
};

PooledCovariance pooled_covariance(const ScoreMatrix& scores, double threshold,
                                   bool strict = false);

// Lag-h cross-covariance M_h = (1/N) sum_{n=1}^{N-h} x_{n+h} x_n^T of the
// score rows, so M_h(a, b) picks up the covariance between coordinate b
// now and coordinate a at lag h. Requires 1 <= h <= N - 2.
Eigen::MatrixXd lag_cross_cov(const ScoreMatrix& scores, int h);

// Reference evaluation of the portmanteau statistic through the explicit
// Kronecker quadratic form N * sum_h vec(M_h)^T (Cinv (x) Cinv) vec(M_h).
// Materializes a p_N^2 x p_N^2 matrix, so it refuses dimensions above
// `dim_limit`; it exists to cross-check the fast path, not for production.
double statistic_kron(const ScoreMatrix& scores, const PooledCovariance& pooled,
                      int h_max, int dim_limit = 64);

// Production evaluation via the matrix identity
// vec(M)^T (A (x) A) vec(M) = <M, A M A> for symmetric A: never forms a
// Kronecker product and costs O(h_max p_N^3).
double statistic_fast(const ScoreMatrix& scores, const PooledCovariance& pooled,
                      int h_max);

// Center and scale the raw statistic by the moments of its limiting
// chi-squared(q^2 H) law, with the finite-sample mean correction
// c = 1 - (H + 1) / (2 N):
//
//   z = (Q - q^2 H c) / (q sqrt(2 H c))
//
// and reject at level alpha when z exceeds the upper-alpha normal
// quantile. `dim` is q by default; the research flag in RunConfig swaps in
// the full pooled dimension p_N instead.
struct NormalizedStat {
  double z = 0.0;
  double p_value = 1.0;
  bool reject = false;
};

NormalizedStat normalize_and_pvalue(double q_stat, int dim, int h_max, int n,
                                    double alpha);

// One row of the final report: everything about one lag horizon H.
struct LagResult {
  int h_max = 0;
  double q_stat = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  bool reject = false;
};

struct TestReport {
  std::vector<LagResult> horizons;        // H = 1..h_max, in order
  std::vector<int> components_per_series; // p(i)
  int total_dim = 0;                      // p_N
  int cutoff = 0;                         // q
  int series_count = 0;
  int replicate_count = 0;
  double alpha = 0.05;
  bool detrended = false;
  std::vector<std::string> series_labels;
  // Spectral-gap health indicator; see gap_diagnostics().
  double gap_gamma = 0.0;
  bool gap_warning = false;
};

// The whole pipeline: optional detrend, center, per-series FPCA, pooled
// covariance, statistic and normal calibration at every horizon up to
// config.h_max.
TestReport run_test(const FunctionalPanel& panel, const RunConfig& config);

} // namespace fpanel

#endif
