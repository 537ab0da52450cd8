#include "fpanel/simulate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>

#include "fpanel/errors.hpp"
#include "fpanel/fpca.hpp"
#include "fpanel/panel.hpp"
#include "fpanel/rng.hpp"

namespace fpanel {

namespace {

void check_symmetric(const Eigen::MatrixXd& s, const std::string& what) {
  if (s.rows() != s.cols()) {
    throw StructuralError(what + " must be square, got " +
                          std::to_string(s.rows()) + "x" + std::to_string(s.cols()));
  }
  const double scale = 1.0 + s.cwiseAbs().maxCoeff();
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw StructuralError(what + " is not symmetric");
  }
}

} // namespace

PanelGenerator::PanelGenerator(GridPtr grid, std::vector<Eigen::VectorXd> means,
                               std::vector<Eigen::MatrixXd> components,
                               std::vector<Eigen::MatrixXd> sigma, int replicates,
                               std::vector<std::string> labels)
    : grid_(std::move(grid)),
      means_(std::move(means)),
      components_(std::move(components)),
      sigma_(std::move(sigma)),
      replicates_(replicates),
      labels_(std::move(labels)) {
  if (!grid_) {
    throw StructuralError("generator needs a grid");
  }
  const Eigen::Index t = grid_->size();
  const std::size_t i_count = means_.size();
  if (i_count == 0) {
    throw StructuralError("generator needs at least one series");
  }
  if (components_.size() != i_count) {
    throw StructuralError("generator has " + std::to_string(components_.size()) +
                          " component sets for " + std::to_string(i_count) +
                          " series");
  }
  if (sigma_.empty()) {
    throw StructuralError("generator needs at least one score component");
  }
  const Eigen::Index k_count = static_cast<Eigen::Index>(sigma_.size());
  for (std::size_t i = 0; i < i_count; ++i) {
    if (means_[i].size() != t) {
      throw StructuralError("mean curve of series " + std::to_string(i) +
                            " has wrong length");
    }
    if (components_[i].rows() != t || components_[i].cols() != k_count) {
      throw StructuralError("component curves of series " + std::to_string(i) +
                            " must form a " + std::to_string(t) + "x" +
                            std::to_string(k_count) + " matrix");
    }
    if (!means_[i].allFinite() || !components_[i].allFinite()) {
      throw StructuralError("generator curves for series " + std::to_string(i) +
                            " contain non-finite values");
    }
  }
  factors_.reserve(sigma_.size());
  for (std::size_t k = 0; k < sigma_.size(); ++k) {
    if (sigma_[k].rows() != static_cast<Eigen::Index>(i_count)) {
      throw StructuralError("score covariance " + std::to_string(k) +
                            " does not match the series count");
    }
    factors_.push_back(cross_sectional_factor(sigma_[k]));
  }
  if (replicates_ < 1) {
    throw std::invalid_argument("generator needs at least 1 replicate, got " +
                                std::to_string(replicates_));
  }
  if (labels_.empty()) {
    labels_.reserve(i_count);
    for (std::size_t i = 0; i < i_count; ++i) {
      labels_.push_back("series_" + std::to_string(i));
    }
  } else if (labels_.size() != i_count) {
    throw StructuralError("generator label count does not match series count");
  }
}

PanelGenerator PanelGenerator::with_replicates(int n) const {
  return PanelGenerator(grid_, means_, components_, sigma_, n, labels_);
}

PanelGenerator estimate_generator(const FunctionalPanel& panel,
                                  int num_components) {
  if (num_components < 1) {
    throw std::invalid_argument("generator needs at least 1 component, got " +
                                std::to_string(num_components));
  }
  const int n = panel.replicate_count();
  if (n < 2) {
    throw InsufficientDataError(
        "estimating a generator needs at least 2 replicates");
  }
  const Eigen::Index available =
      std::min<Eigen::Index>(n, panel.grid_size());
  if (num_components > available) {
    throw StructuralError("requested " + std::to_string(num_components) +
                          " components but only " + std::to_string(available) +
                          " eigenpairs exist per series");
  }

  const CenteredPanel centered = center_panel(panel);
  const int i_count = panel.series_count();

  std::vector<Eigen::MatrixXd> components;
  components.reserve(static_cast<std::size_t>(i_count));
  // score_cols[i] is N x K: the first K score columns of series i.
  std::vector<Eigen::MatrixXd> score_cols;
  score_cols.reserve(static_cast<std::size_t>(i_count));
  for (int i = 0; i < i_count; ++i) {
    const Eigen::MatrixXd& xc = centered.panel.series(i);
    EigenPairs pairs = eigen_decompose(covariance_kernel(xc), *panel.grid(),
                                       available);
    components.push_back(pairs.functions.leftCols(num_components));
    score_cols.push_back(
        compute_scores(xc, *panel.grid(), pairs.functions, num_components));
  }

  // Per component k, the I x I covariance of scores across series with
  // divisor N - 1 (scores have exact zero mean by construction).
  std::vector<Eigen::MatrixXd> sigma;
  sigma.reserve(static_cast<std::size_t>(num_components));
  for (int k = 0; k < num_components; ++k) {
    Eigen::MatrixXd s(i_count, n);
    for (int i = 0; i < i_count; ++i) {
      s.row(i) = score_cols[static_cast<std::size_t>(i)].col(k).transpose();
    }
    Eigen::MatrixXd cov = s * s.transpose() / static_cast<double>(n - 1);
    sigma.push_back(((cov + cov.transpose()) / 2.0).eval());
  }

  return PanelGenerator(panel.grid(), std::move(centered.means),
                        std::move(components), std::move(sigma), n,
                        panel.labels());
}

Eigen::MatrixXd cross_sectional_factor(const Eigen::MatrixXd& sigma) {
  check_symmetric(sigma, "score covariance");
  const Eigen::Index i_count = sigma.rows();

  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }

  // Singular (or barely indefinite from rounding) covariances get the
  // symmetric eigenvalue square root instead of failing; estimated score
  // covariances are rank-deficient whenever I exceeds the effective rank.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma);
  if (solver.info() != Eigen::Success) {
    throw DegenerateInputError("covariance square root failed");
  }
  const double max_eig = std::max(solver.eigenvalues().maxCoeff(), 0.0);
  const double tol = 1e-8 * std::max(1.0, max_eig);
  Eigen::VectorXd clamped(i_count);
  for (Eigen::Index j = 0; j < i_count; ++j) {
    const double d = solver.eigenvalues()[j];
    if (d < -tol) {
      throw StructuralError("score covariance is indefinite beyond rounding "
                            "tolerance (eigenvalue " + std::to_string(d) + ")");
    }
    clamped[j] = std::max(d, 0.0);
  }
  return solver.eigenvectors() * clamped.cwiseSqrt().asDiagonal();
}

ArFactor::ArFactor(double rho, int n) : rho_(rho), n_(n) {
  if (!(std::abs(rho) < 1.0)) {
    throw std::invalid_argument("AR coefficient must satisfy |rho| < 1, got " +
                                std::to_string(rho));
  }
  if (n < 1) {
    throw std::invalid_argument("AR factor needs size >= 1, got " +
                                std::to_string(n));
  }
  // Row n is normalized by sqrt(1 + rho^2 + ... + rho^(2(n-1))), written
  // as a running sum so rho = 0 stays exactly 1 and nothing overflows.
  inv_row_norms_.resize(n);
  double geom = 1.0;
  inv_row_norms_[0] = 1.0;
  for (int r = 1; r < n; ++r) {
    geom = 1.0 + rho * rho * geom;
    inv_row_norms_[r] = 1.0 / std::sqrt(geom);
  }
}

Eigen::MatrixXd ArFactor::dense() const {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n_, n_);
  for (int b = 0; b < n_; ++b) {
    double power = 1.0;
    for (int a = b; a < n_; ++a) {
      l(a, b) = power * inv_row_norms_[a];
      power *= rho_;
    }
  }
  return l;
}

Eigen::VectorXd ArFactor::apply(const Eigen::VectorXd& z) const {
  if (z.size() != n_) {
    throw StructuralError("AR factor of size " + std::to_string(n_) +
                          " applied to vector of length " +
                          std::to_string(z.size()));
  }
  Eigen::VectorXd out(n_);
  double state = 0.0;
  for (int r = 0; r < n_; ++r) {
    state = rho_ * state + z[r];
    out[r] = state * inv_row_norms_[r];
  }
  return out;
}

Eigen::MatrixXd ArFactor::apply_columns(const Eigen::MatrixXd& z) const {
  if (z.rows() != n_) {
    throw StructuralError("AR factor of size " + std::to_string(n_) +
                          " applied to matrix with " + std::to_string(z.rows()) +
                          " rows");
  }
  Eigen::MatrixXd out(n_, z.cols());
  Eigen::RowVectorXd state = Eigen::RowVectorXd::Zero(z.cols());
  for (int r = 0; r < n_; ++r) {
    state = rho_ * state + z.row(r);
    out.row(r) = state * inv_row_norms_[r];
  }
  return out;
}

namespace {

// Shared draw path: one stream per component so output is independent of
// scheduling, AR coloring first (identity at rho = 0, bit for bit), then
// the cross-sectional factor, then expansion against the component curves.
FunctionalPanel generate_panel(const PanelGenerator& gen,
                               std::span<const double> rho, std::uint64_t seed) {
  const int n = gen.replicates();
  const int i_count = gen.series_count();
  const int k_count = gen.component_count();
  if (static_cast<int>(rho.size()) != k_count) {
    throw std::invalid_argument("expected " + std::to_string(k_count) +
                                " AR coefficients, got " +
                                std::to_string(rho.size()));
  }

  std::vector<Eigen::MatrixXd> series;
  series.reserve(static_cast<std::size_t>(i_count));
  for (int i = 0; i < i_count; ++i) {
    series.push_back(Eigen::VectorXd::Ones(n) *
                     gen.means()[static_cast<std::size_t>(i)].transpose());
  }

  for (int k = 0; k < k_count; ++k) {
    CounterRng rng(seed, static_cast<std::uint64_t>(k));
    Eigen::MatrixXd z(n, i_count);
    for (int r = 0; r < n; ++r) {
      for (int i = 0; i < i_count; ++i) {
        z(r, i) = rng.next_normal();
      }
    }
    if (rho[static_cast<std::size_t>(k)] != 0.0) {
      z = ArFactor(rho[static_cast<std::size_t>(k)], n).apply_columns(z);
    }
    const Eigen::MatrixXd zeta =
        z * gen.factors()[static_cast<std::size_t>(k)].transpose();
    for (int i = 0; i < i_count; ++i) {
      series[static_cast<std::size_t>(i)] +=
          zeta.col(i) *
          gen.components()[static_cast<std::size_t>(i)].col(k).transpose();
    }
  }
  return FunctionalPanel(gen.grid(), std::move(series), gen.labels());
}

} // namespace

FunctionalPanel generate_h0_panel(const PanelGenerator& gen, std::uint64_t seed) {
  const std::vector<double> zeros(static_cast<std::size_t>(gen.component_count()),
                                  0.0);
  return generate_panel(gen, zeros, seed);
}

FunctionalPanel generate_ar_panel(const PanelGenerator& gen, double rho,
                                  std::uint64_t seed) {
  const std::vector<double> rhos(static_cast<std::size_t>(gen.component_count()),
                                 rho);
  return generate_panel(gen, rhos, seed);
}

FunctionalPanel generate_ar_panel(const PanelGenerator& gen,
                                  std::span<const double> rho_per_component,
                                  std::uint64_t seed) {
  return generate_panel(gen, rho_per_component, seed);
}

namespace {

using nlohmann::ordered_json;

ordered_json vector_to_json(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXd vector_from_json(const ordered_json& j, const std::string& what) {
  if (!j.is_array()) {
    throw StructuralError("generator JSON: " + what + " must be an array");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& e : j) {
    if (!e.is_number()) {
      throw StructuralError("generator JSON: " + what + " must hold numbers");
    }
    v[i++] = e.get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    throw StructuralError("generator JSON: " + what +
                          " must be a nonempty array of rows");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Eigen::MatrixXd m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::VectorXd row = vector_from_json(j[static_cast<std::size_t>(r)],
                                                 what + " row");
    if (cols < 0) {
      cols = row.size();
      m.resize(rows, cols);
    } else if (row.size() != cols) {
      throw StructuralError("generator JSON: " + what + " rows have ragged widths");
    }
    m.row(r) = row.transpose();
  }
  return m;
}

} // namespace

std::string generator_to_json(const PanelGenerator& gen,
                              std::optional<double> rho) {
  ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "panel_generator";
  j["replicates"] = gen.replicates();
  j["grid"] = {{"points", vector_to_json(gen.grid()->points())},
               {"weights", vector_to_json(gen.grid()->weights())}};
  ordered_json series = ordered_json::array();
  for (int i = 0; i < gen.series_count(); ++i) {
    ordered_json s;
    s["label"] = gen.labels()[static_cast<std::size_t>(i)];
    s["mean"] = vector_to_json(gen.means()[static_cast<std::size_t>(i)]);
    // One row per component curve, each sampled on the grid.
    s["components"] =
        matrix_to_json(gen.components()[static_cast<std::size_t>(i)].transpose());
    series.push_back(std::move(s));
  }
  j["series"] = std::move(series);
  ordered_json sig = ordered_json::array();
  for (const auto& s : gen.sigma()) sig.push_back(matrix_to_json(s));
  j["sigma"] = std::move(sig);
  if (rho) j["rho"] = *rho;
  return j.dump(2) + "\n";
}

GeneratorConfig generator_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("generator JSON parse error: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || j["kind"] != "panel_generator") {
    throw StructuralError("generator JSON: missing kind \"panel_generator\"");
  }
  if (!j.contains("grid") || !j["grid"].is_object() ||
      !j["grid"].contains("points")) {
    throw StructuralError("generator JSON: missing grid.points");
  }
  const Eigen::VectorXd points =
      vector_from_json(j["grid"]["points"], "grid.points");
  GridPtr grid;
  if (j["grid"].contains("weights")) {
    grid = std::make_shared<Grid>(points,
                                  vector_from_json(j["grid"]["weights"],
                                                   "grid.weights"));
  } else {
    grid = std::make_shared<Grid>(points);
  }

  if (!j.contains("series") || !j["series"].is_array() || j["series"].empty()) {
    throw StructuralError("generator JSON: missing series array");
  }
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> components;
  std::vector<std::string> labels;
  for (const auto& s : j["series"]) {
    if (!s.is_object() || !s.contains("mean") || !s.contains("components")) {
      throw StructuralError("generator JSON: each series needs mean and components");
    }
    labels.push_back(s.contains("label") ? s["label"].get<std::string>()
                                         : "series_" + std::to_string(means.size()));
    means.push_back(vector_from_json(s["mean"], "series mean"));
    components.push_back(matrix_from_json(s["components"], "series components")
                             .transpose());
  }

  if (!j.contains("sigma") || !j["sigma"].is_array() || j["sigma"].empty()) {
    throw StructuralError("generator JSON: missing sigma array");
  }
  std::vector<Eigen::MatrixXd> sigma;
  for (const auto& s : j["sigma"]) {
    sigma.push_back(matrix_from_json(s, "sigma"));
  }

  if (!j.contains("replicates") || !j["replicates"].is_number_integer()) {
    throw StructuralError("generator JSON: missing integer replicates");
  }

  GeneratorConfig out{PanelGenerator(std::move(grid), std::move(means),
                                     std::move(components), std::move(sigma),
                                     j["replicates"].get<int>(),
                                     std::move(labels)),
                      std::nullopt};
  if (j.contains("rho")) {
    if (!j["rho"].is_number()) {
      throw StructuralError("generator JSON: rho must be a number");
    }
    out.rho = j["rho"].get<double>();
  }
  return out;
}

void save_generator(const PanelGenerator& gen, const std::string& path,
                    std::optional<double> rho) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open " + path + " for writing");
  }
  out << generator_to_json(gen, rho);
  if (!out) {
    throw Error("failed writing " + path);
  }
}

GeneratorConfig load_generator(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return generator_from_json(buf.str());
}

} // namespace fpanel
