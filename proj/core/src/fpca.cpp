#include "fpanel/fpca.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fpanel/errors.hpp"

namespace fpanel {

Eigen::MatrixXd covariance_kernel(const Eigen::MatrixXd& centered) {
  const Eigen::Index n = centered.rows();
  if (n < 1) {
    throw InsufficientDataError("covariance kernel needs at least one curve");
  }
  Eigen::MatrixXd k = centered.transpose() * centered / static_cast<double>(n);
  // The product is symmetric only up to rounding; make it exact so the
  // symmetry check downstream never trips on our own output.
  return ((k + k.transpose()) / 2.0).eval();
}

EigenPairs eigen_decompose(const Eigen::MatrixXd& kernel, const Grid& grid,
                           Eigen::Index max_rank) {
  const Eigen::Index t = kernel.rows();
  if (kernel.cols() != t) {
    throw StructuralError("covariance kernel must be square, got " +
                          std::to_string(t) + "x" + std::to_string(kernel.cols()));
  }
  if (t != grid.size()) {
    throw StructuralError("kernel size " + std::to_string(t) +
                          " does not match grid size " + std::to_string(grid.size()));
  }
  const double scale = 1.0 + kernel.cwiseAbs().maxCoeff();
  if ((kernel - kernel.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw StructuralError("covariance kernel is not symmetric");
  }
  if (max_rank < 1) {
    throw std::invalid_argument("eigen decomposition needs max_rank >= 1");
  }

  // The integral operator x -> K W x is self-adjoint in the weighted inner
  // product but not as a plain matrix. Conjugating by W^(1/2) symmetrizes
  // it; eigenvectors map back through W^(-1/2) and come out orthonormal in
  // quadrature.
  const Eigen::ArrayXd sqrt_w = grid.weights().array().sqrt();
  Eigen::MatrixXd b = sqrt_w.matrix().asDiagonal() * kernel *
                      sqrt_w.matrix().asDiagonal();
  b = (b + b.transpose()) / 2.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  if (solver.info() != Eigen::Success) {
    throw DegenerateInputError("eigendecomposition of the covariance failed");
  }

  const Eigen::Index m = std::min(max_rank, t);
  EigenPairs out;
  out.values.resize(m);
  out.functions.resize(t, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    // Solver sorts ascending; we want descending.
    const Eigen::Index src = t - 1 - j;
    out.values[j] = std::max(solver.eigenvalues()[src], 0.0);
    Eigen::VectorXd v = solver.eigenvectors().col(src).array() / sqrt_w;
    // Deterministic sign: make the largest-magnitude coordinate positive.
    Eigen::Index argmax = 0;
    v.cwiseAbs().maxCoeff(&argmax);
    if (v[argmax] < 0.0) v = -v;
    out.functions.col(j) = v;
  }
  return out;
}

int select_num_components(const Eigen::VectorXd& eigenvalues, double threshold,
                          bool strict) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("variance threshold must lie in (0, 1), got " +
                                std::to_string(threshold));
  }
  const Eigen::Index m = eigenvalues.size();
  if (m < 1) {
    throw std::invalid_argument("component selection needs a nonempty spectrum");
  }
  const double total = eigenvalues.sum();
  if (!(total > 0.0)) {
    throw DegenerateInputError(
        "cannot select components: covariance spectrum sums to zero");
  }
  double cum = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    cum += eigenvalues[k];
    const double share = cum / total;
    if (strict ? (share > threshold) : (share >= threshold)) {
      return static_cast<int>(k + 1);
    }
  }
  // Rounding can leave the final share a hair below 1; everything is
  // retained in that case.
  return static_cast<int>(m);
}

Eigen::MatrixXd compute_scores(const Eigen::MatrixXd& centered, const Grid& grid,
                               const Eigen::MatrixXd& functions, int p) {
  if (centered.cols() != grid.size() || functions.rows() != grid.size()) {
    throw StructuralError("scores: curves, grid and eigenfunctions disagree on "
                          "the number of grid points");
  }
  if (p < 1 || p > functions.cols()) {
    throw std::invalid_argument("score dimension " + std::to_string(p) +
                                " out of range [1, " +
                                std::to_string(functions.cols()) + "]");
  }
  return centered * grid.weights().asDiagonal() * functions.leftCols(p);
}

GridCurve FpcaModel::eigenfunction(int j) const {
  if (j < 0 || j >= eigenfunctions.cols()) {
    throw std::invalid_argument("eigenfunction index " + std::to_string(j) +
                                " out of range");
  }
  return GridCurve(grid, eigenfunctions.col(j));
}

FpcaModel fit_fpca(const Eigen::MatrixXd& centered, const GridPtr& grid,
                   double variance_threshold, bool strict) {
  if (!grid) {
    throw StructuralError("FPCA fit needs a grid");
  }
  const Eigen::Index n = centered.rows();
  if (n < 2) {
    throw InsufficientDataError("FPCA needs at least 2 replicates, got " +
                                std::to_string(n));
  }
  FpcaModel model;
  model.grid = grid;
  const Eigen::MatrixXd kernel = covariance_kernel(centered);
  EigenPairs pairs =
      eigen_decompose(kernel, *grid, std::min<Eigen::Index>(n, grid->size()));
  model.eigenvalues = std::move(pairs.values);
  model.eigenfunctions = std::move(pairs.functions);
  model.num_components =
      select_num_components(model.eigenvalues, variance_threshold, strict);
  model.scores =
      compute_scores(centered, *grid, model.eigenfunctions, model.num_components);
  return model;
}

GapDiagnostics gap_diagnostics(const std::vector<FpcaModel>& models) {
  if (models.empty()) {
    throw std::invalid_argument("gap diagnostics need at least one model");
  }
  GapDiagnostics diag;
  diag.alphas.reserve(models.size());

  // Reciprocal gaps flattened over every (series, component) pair; the
  // quadratic sum expands to 2 P sum(r^2) + 2 (sum r)^2 over all ordered
  // pairs, so no double loop is needed.
  std::vector<double> recip;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& m = models[i];
    const Eigen::Index avail = m.eigenvalues.size();
    const int p = m.num_components;
    if (avail < p + 1) {
      throw StructuralError("gap diagnostics for series " + std::to_string(i) +
                            " need " + std::to_string(p + 1) +
                            " eigenvalues, only " + std::to_string(avail) +
                            " computed");
    }
    Eigen::VectorXd alpha(p);
    for (int j = 1; j <= p; ++j) {
      const double above = m.eigenvalues[j - 1] - m.eigenvalues[j];
      alpha[j - 1] =
          (j == 1) ? above
                   : std::min(m.eigenvalues[j - 2] - m.eigenvalues[j - 1], above);
      if (!(alpha[j - 1] > 0.0)) {
        diag.has_nonpositive_gap = true;
      } else {
        recip.push_back(1.0 / alpha[j - 1]);
      }
    }
    diag.alphas.push_back(std::move(alpha));
  }

  if (diag.has_nonpositive_gap) {
    diag.gamma = std::numeric_limits<double>::infinity();
    return diag;
  }
  double sum = 0.0, sum_sq = 0.0;
  for (double r : recip) {
    sum += r;
    sum_sq += r * r;
  }
  const double count = static_cast<double>(recip.size());
  diag.gamma = 2.0 * count * sum_sq + 2.0 * sum * sum;
  return diag;
}

} // namespace fpanel
