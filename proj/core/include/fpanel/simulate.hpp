#ifndef FPANEL_SIMULATE_HPP
#define FPANEL_SIMULATE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpanel/panel.hpp"

namespace fpanel {

// Synthetic-panel factory. A generator is a frozen recipe: per-series mean
// curves, K shared score components (per series an orthonormal system of K
// curves), and per-component I x I cross-sectional covariances that couple
// the series. Panels are produced by drawing iid standard normal score
// innovations, coloring them cross-sectionally with a factor of Sigma_k,
// optionally coloring them across replicates with a unit-variance AR
// factor, and expanding against the component curves:
//
//   X_i(n) = mu_i + sum_k zeta_k(n, i) v_{k,i}
//
// The null recipe leaves replicates independent; the alternative makes the
// scores an order-1 autoregression in n while preserving every marginal
// variance, so rejections measure serial dependence and nothing else.
class PanelGenerator {
public:
  PanelGenerator(GridPtr grid, std::vector<Eigen::VectorXd> means,
                 std::vector<Eigen::MatrixXd> components,
                 std::vector<Eigen::MatrixXd> sigma, int replicates,
                 std::vector<std::string> labels = {});

  int series_count() const { return static_cast<int>(means_.size()); }
  int component_count() const { return static_cast<int>(sigma_.size()); }
  int replicates() const { return replicates_; }
  const GridPtr& grid() const { return grid_; }
  const std::vector<Eigen::VectorXd>& means() const { return means_; }
  // components()[i] is T x K; column k is series i's k-th component curve.
  const std::vector<Eigen::MatrixXd>& components() const { return components_; }
  const std::vector<Eigen::MatrixXd>& sigma() const { return sigma_; }
  // factors()[k] satisfies F_k F_k^T = sigma()[k] (Cholesky, or eigen
  // square root when the covariance is singular).
  const std::vector<Eigen::MatrixXd>& factors() const { return factors_; }
  const std::vector<std::string>& labels() const { return labels_; }

  // Same recipe, different panel length.
  PanelGenerator with_replicates(int n) const;

private:
  GridPtr grid_;
  std::vector<Eigen::VectorXd> means_;
  std::vector<Eigen::MatrixXd> components_;
  std::vector<Eigen::MatrixXd> sigma_;
  std::vector<Eigen::MatrixXd> factors_;
  int replicates_;
  std::vector<std::string> labels_;
};

// Fit a generator to an observed panel: estimate means, take each series'
// first `num_components` principal component curves, and estimate the
// I x I score covariance per component across series (divisor N - 1,
// scores have exact zero mean). Asking for more components than a series
// has eigenpairs (min(N, T)) is a StructuralError; components with zero
// eigenvalue are allowed and simply contribute nothing.
PanelGenerator estimate_generator(const FunctionalPanel& panel,
                                  int num_components);

// A factor F with F F^T = sigma for a symmetric PSD matrix: the Cholesky
// factor when sigma is positive definite, otherwise the symmetric eigen
// square root with small negative eigenvalues clamped to zero.
Eigen::MatrixXd cross_sectional_factor(const Eigen::MatrixXd& sigma);

// Unit-variance AR(1) coloring across replicates. Dense form: the lower
// Cholesky triangle of the Toeplitz correlation matrix with entries
// rho^|a-b|, which is the rho-powers lower triangle with row n divided by
// sqrt(sum_{m=0}^{n-1} rho^(2m)). Every row has unit norm, so coloring
// preserves marginal variances exactly; rho = 0 reproduces the input
// bitwise. apply() runs the O(n) recurrence instead of the O(n^2) product.
class ArFactor {
public:
  // |rho| < 1; negative values are legal and give alternating dependence.
  ArFactor(double rho, int n);

  double rho() const { return rho_; }
  int size() const { return n_; }

  Eigen::MatrixXd dense() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& z) const;
  // Column-wise apply for a matrix of independent streams.
  Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& z) const;

private:
  double rho_;
  int n_;
  Eigen::VectorXd inv_row_norms_; // 1 / sqrt(cumulative rho^2 powers)
};

// Draw one panel with serially independent scores (the null recipe).
FunctionalPanel generate_h0_panel(const PanelGenerator& gen, std::uint64_t seed);

// Draw one panel whose scores follow the unit-variance AR(1) coloring with
// the same rho for every component. rho = 0 reproduces the null panel for
// the same seed bit for bit.
FunctionalPanel generate_ar_panel(const PanelGenerator& gen, double rho,
                                  std::uint64_t seed);

// Per-component rho values (size component_count). Zeros leave those
// components serially independent.
FunctionalPanel generate_ar_panel(const PanelGenerator& gen,
                                  std::span<const double> rho_per_component,
                                  std::uint64_t seed);

// A recipe as stored on disk: the generator plus an optional default AR
// coefficient that simulation commands may fall back on.
struct GeneratorConfig {
  PanelGenerator generator;
  std::optional<double> rho;
};

// JSON (de)serialization of a recipe, for handing generators between the
// CLI commands. String forms are exposed for testing; file forms wrap them.
std::string generator_to_json(const PanelGenerator& gen,
                              std::optional<double> rho = std::nullopt);
GeneratorConfig generator_from_json(const std::string& text);
void save_generator(const PanelGenerator& gen, const std::string& path,
                    std::optional<double> rho = std::nullopt);
GeneratorConfig load_generator(const std::string& path);

} // namespace fpanel

#endif
