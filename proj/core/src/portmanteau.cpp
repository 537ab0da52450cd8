#include "fpanel/portmanteau.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "fpanel/errors.hpp"
#include "fpanel/stats.hpp"

namespace fpanel {

ScoreMatrix::ScoreMatrix(Eigen::MatrixXd values, std::vector<int> block_sizes)
    : values_(std::move(values)), block_sizes_(std::move(block_sizes)) {
  if (values_.rows() < 1) {
    throw InsufficientDataError("score matrix has no replicates");
  }
  if (block_sizes_.empty()) {
    throw StructuralError("score matrix needs at least one series block");
  }
  int total = 0;
  for (std::size_t i = 0; i < block_sizes_.size(); ++i) {
    if (block_sizes_[i] < 1) {
      throw StructuralError("series block " + std::to_string(i) +
                            " has nonpositive width");
    }
    total += block_sizes_[i];
  }
  if (total != values_.cols()) {
    throw StructuralError("block widths sum to " + std::to_string(total) +
                          " but the score matrix has " +
                          std::to_string(values_.cols()) + " columns");
  }
  if (!values_.allFinite()) {
    throw StructuralError("score matrix contains non-finite values");
  }
}

ScoreMatrix ScoreMatrix::from_models(const std::vector<FpcaModel>& models) {
  if (models.empty()) {
    throw StructuralError("score matrix needs at least one fitted series");
  }
  const Eigen::Index n = models.front().scores.rows();
  int total = 0;
  std::vector<int> blocks;
  blocks.reserve(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (models[i].scores.rows() != n) {
      throw StructuralError("series " + std::to_string(i) + " has " +
                            std::to_string(models[i].scores.rows()) +
                            " score rows, expected " + std::to_string(n));
    }
    blocks.push_back(models[i].num_components);
    total += models[i].num_components;
  }
  Eigen::MatrixXd stacked(n, total);
  int col = 0;
  for (const auto& m : models) {
    stacked.middleCols(col, m.num_components) = m.scores;
    col += m.num_components;
  }
  return ScoreMatrix(std::move(stacked), std::move(blocks));
}

PooledCovariance pooled_covariance(const ScoreMatrix& scores, double threshold,
                                   bool strict) {
  const auto& x = scores.values();
  const double n = static_cast<double>(scores.replicate_count());
  if (scores.replicate_count() < 2) {
    throw InsufficientDataError("pooled covariance needs at least 2 replicates");
  }

  PooledCovariance out;
  out.c0 = x.transpose() * x / n;
  out.c0 = ((out.c0 + out.c0.transpose()) / 2.0).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(out.c0);
  if (solver.info() != Eigen::Success) {
    throw DegenerateInputError("pooled covariance eigendecomposition failed");
  }
  const Eigen::Index p = out.c0.rows();
  out.eigenvalues = solver.eigenvalues().reverse().cwiseMax(0.0);
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();

  out.cutoff = select_num_components(out.eigenvalues, threshold, strict);

  // Guard against inverting directions that are numerically zero; this can
  // only shrink the cutoff when the threshold is nearly 1 and the matrix is
  // rank-deficient.
  const double tol = out.eigenvalues[0] * 1e-12;
  while (out.cutoff > 0 && out.eigenvalues[out.cutoff - 1] <= tol) {
    --out.cutoff;
  }
  if (out.cutoff < 1) {
    throw DegenerateInputError("pooled covariance has no usable directions");
  }

  Eigen::VectorXd dinv = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < out.cutoff; ++i) {
    dinv[i] = 1.0 / out.eigenvalues[i];
  }
  out.inverse = out.eigenvectors * dinv.asDiagonal() * out.eigenvectors.transpose();
  out.inverse = ((out.inverse + out.inverse.transpose()) / 2.0).eval();
  return out;
}

Eigen::MatrixXd lag_cross_cov(const ScoreMatrix& scores, int h) {
  const int n = scores.replicate_count();
  if (h < 1) {
    throw std::invalid_argument("lag must be positive, got " + std::to_string(h));
  }
  if (h > n - 2) {
    throw InsufficientDataError("lag " + std::to_string(h) + " needs at least " +
                                std::to_string(h + 2) + " replicates, got " +
                                std::to_string(n));
  }
  const auto& x = scores.values();
  // Entry (a, b) sums x[n, b] * x[n + h, a] over the N - h overlapping
  // rows; the divisor stays N by definition (the normal calibration's
  // finite-sample factor absorbs the bias).
  return x.bottomRows(n - h).transpose() * x.topRows(n - h) /
         static_cast<double>(n);
}

namespace {

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return k;
}

void check_lag_budget(const ScoreMatrix& scores, int h_max) {
  if (h_max < 1) {
    throw std::invalid_argument("maximum lag must be at least 1, got " +
                                std::to_string(h_max));
  }
  const int n = scores.replicate_count();
  if (h_max > n - 2) {
    throw InsufficientDataError("maximum lag " + std::to_string(h_max) +
                                " needs at least " + std::to_string(h_max + 2) +
                                " replicates, got " + std::to_string(n));
  }
}

} // namespace

double statistic_kron(const ScoreMatrix& scores, const PooledCovariance& pooled,
                      int h_max, int dim_limit) {
  check_lag_budget(scores, h_max);
  const Eigen::Index p = scores.total_dim();
  if (p > dim_limit) {
    throw std::invalid_argument(
        "Kronecker reference path limited to dimension " +
        std::to_string(dim_limit) + ", got " + std::to_string(p) +
        "; use statistic_fast instead");
  }
  const Eigen::MatrixXd big = kronecker(pooled.inverse, pooled.inverse);
  const double n = static_cast<double>(scores.replicate_count());
  double q = 0.0;
  for (int h = 1; h <= h_max; ++h) {
    const Eigen::MatrixXd m = lag_cross_cov(scores, h);
    // Column-major flattening of M equals the lagged Kronecker moment
    // vector (1/N) sum_n x_n (x) x_{n+h}.
    const Eigen::Map<const Eigen::VectorXd> v(m.data(), p * p);
    q += v.dot(big * v);
  }
  return n * q;
}

double statistic_fast(const ScoreMatrix& scores, const PooledCovariance& pooled,
                      int h_max) {
  check_lag_budget(scores, h_max);
  const double n = static_cast<double>(scores.replicate_count());
  double q = 0.0;
  for (int h = 1; h <= h_max; ++h) {
    const Eigen::MatrixXd m = lag_cross_cov(scores, h);
    // vec(M)^T (A (x) A) vec(M) = <M, A M A>_F for symmetric A; this keeps
    // everything p x p.
    q += (m.cwiseProduct(pooled.inverse * m * pooled.inverse)).sum();
  }
  return n * q;
}

NormalizedStat normalize_and_pvalue(double q_stat, int dim, int h_max, int n,
                                    double alpha) {
  if (dim < 1) {
    throw std::invalid_argument("normalization dimension must be at least 1");
  }
  if (h_max < 1) {
    throw std::invalid_argument("maximum lag must be at least 1");
  }
  if (n <= h_max + 1) {
    throw InsufficientDataError("normalization needs more than " +
                                std::to_string(h_max + 1) +
                                " replicates, got " + std::to_string(n));
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("significance level must lie in (0, 1), got " +
                                std::to_string(alpha));
  }
  const double q = static_cast<double>(dim);
  const double h = static_cast<double>(h_max);
  // Finite-sample mean correction: the exact mean of the summed squared
  // sample autocorrelations is (N - h) / N per lag; averaging over lags
  // 1..H gives the factor below.
  const double c = 1.0 - (h + 1.0) / (2.0 * n);
  NormalizedStat out;
  out.z = (q_stat - q * q * h * c) / (q * std::sqrt(2.0 * h * c));
  // 1 - Phi(z) evaluated as Phi(-z) keeps upper-tail p-values accurate.
  out.p_value = normal_cdf(-out.z);
  out.reject = out.z > normal_quantile(1.0 - alpha);
  return out;
}

TestReport run_test(const FunctionalPanel& panel, const RunConfig& config) {
  config.validate();
  const int n = panel.replicate_count();
  if (n < config.h_max + 2) {
    throw InsufficientDataError("testing up to lag " + std::to_string(config.h_max) +
                                " needs at least " + std::to_string(config.h_max + 2) +
                                " replicates, got " + std::to_string(n));
  }

  const FunctionalPanel prepared =
      config.detrend ? linear_detrend(panel) : center_panel(panel).panel;

  std::vector<FpcaModel> models;
  models.reserve(static_cast<std::size_t>(prepared.series_count()));
  for (int i = 0; i < prepared.series_count(); ++i) {
    models.push_back(fit_fpca(prepared.series(i), prepared.grid(),
                              config.variance_threshold, config.strict_cutoff));
  }

  const ScoreMatrix scores = ScoreMatrix::from_models(models);
  const PooledCovariance pooled =
      pooled_covariance(scores, config.pooled_threshold, config.strict_cutoff);

  TestReport report;
  report.components_per_series = scores.block_sizes();
  report.total_dim = scores.total_dim();
  report.cutoff = pooled.cutoff;
  report.series_count = panel.series_count();
  report.replicate_count = n;
  report.alpha = config.alpha;
  report.detrended = config.detrend;
  report.series_labels = panel.labels();

  const GapDiagnostics gaps = gap_diagnostics(models);
  report.gap_gamma = gaps.gamma;
  report.gap_warning = gaps.has_nonpositive_gap;

  const int dim =
      config.normalize_with_total_dim ? report.total_dim : report.cutoff;

  // One pass over lags; the statistic at horizon H is the running sum of
  // per-lag contributions, so the whole table costs one lag sweep.
  report.horizons.reserve(static_cast<std::size_t>(config.h_max));
  double cumulative = 0.0;
  for (int h = 1; h <= config.h_max; ++h) {
    const Eigen::MatrixXd m = lag_cross_cov(scores, h);
    cumulative +=
        n * (m.cwiseProduct(pooled.inverse * m * pooled.inverse)).sum();
    const NormalizedStat ns =
        normalize_and_pvalue(cumulative, dim, h, n, config.alpha);
    report.horizons.push_back(LagResult{h, cumulative, ns.z, ns.p_value, ns.reject});
  }
  return report;
}

} // namespace fpanel
