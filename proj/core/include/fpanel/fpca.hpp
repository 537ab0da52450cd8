#ifndef FPANEL_FPCA_HPP
#define FPANEL_FPCA_HPP

#include <vector>

#include "fpanel/grid.hpp"

namespace fpanel {

// Empirical covariance kernel of one centered series: with rows x_n of the
// N x T matrix, K = (1/N) sum_n x_n x_n^T, returned as a symmetric T x T
// matrix of pointwise kernel values K(t_a, t_b).
Eigen::MatrixXd covariance_kernel(const Eigen::MatrixXd& centered);

struct EigenPairs {
  Eigen::VectorXd values;    // descending, clamped at zero, min(N, T) kept
  Eigen::MatrixXd functions; // T x m, column j sampled on the grid
};

// Solve the weighted eigenproblem for a covariance kernel on a grid. The
// returned eigenfunctions are orthonormal in the quadrature inner product
// (v_i^T W v_j = delta_ij) and sign-fixed so that each one is positive at
// its largest-magnitude coordinate, making decompositions reproducible
// across platforms. `max_rank` bounds how many pairs are kept, normally
// min(N, T) since the kernel cannot have higher rank.
EigenPairs eigen_decompose(const Eigen::MatrixXd& kernel, const Grid& grid,
                           Eigen::Index max_rank);

// Smallest k whose cumulative eigenvalue share reaches the threshold; the
// share denominator is the full trace, not the retained part. With
// `strict` the comparison is ">" instead of ">=". Throws
// DegenerateInputError when the spectrum sums to zero.
int select_num_components(const Eigen::VectorXd& eigenvalues, double threshold,
                          bool strict = false);

// Project each centered curve onto the first p eigenfunctions using the
// quadrature inner product: scores = centered * W * functions(:, 0..p).
Eigen::MatrixXd compute_scores(const Eigen::MatrixXd& centered, const Grid& grid,
                               const Eigen::MatrixXd& functions, int p);

// Everything the downstream test needs from one series' FPCA.
struct FpcaModel {
  GridPtr grid;
  Eigen::VectorXd eigenvalues;    // full retained spectrum, descending
  Eigen::MatrixXd eigenfunctions; // T x m
  int num_components = 0;         // p chosen by the variance threshold
  Eigen::MatrixXd scores;         // N x p

  GridCurve eigenfunction(int j) const;
};

// Fit the FPCA of one centered series end to end: kernel, eigenpairs,
// component count, scores.
FpcaModel fit_fpca(const Eigen::MatrixXd& centered, const GridPtr& grid,
                   double variance_threshold, bool strict = false);

// Spectral-gap health report across all fitted series. alpha(i, 1) is the
// gap between the top two eigenvalues; alpha(i, j), j >= 2, is the smaller
// of the gaps above and below eigenvalue j. The summary statistic
//
//   gamma = sum over series pairs (i, i') and retained components (j, j')
//           of (1/alpha(i, j) + 1/alpha(i', j'))^2
//
// grows quickly when retained eigenvalues crowd together, warning that
// estimated eigenfunctions are unstable. Non-positive gaps (ties) make it
// infinite and set the flag. Each model must carry at least p(i) + 1
// eigenvalues so the gap below the last retained one exists; fewer is a
// StructuralError.
struct GapDiagnostics {
  std::vector<Eigen::VectorXd> alphas; // per series, length p(i)
  double gamma = 0.0;
  bool has_nonpositive_gap = false;
};

GapDiagnostics gap_diagnostics(const std::vector<FpcaModel>& models);

} // namespace fpanel

#endif
