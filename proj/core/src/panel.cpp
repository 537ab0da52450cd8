#include "fpanel/panel.hpp"

#include <string>
#include <utility>

#include "fpanel/errors.hpp"

namespace fpanel {

FunctionalPanel::FunctionalPanel(GridPtr grid, std::vector<Eigen::MatrixXd> series,
                                 std::vector<std::string> labels)
    : grid_(std::move(grid)), series_(std::move(series)), labels_(std::move(labels)) {
  if (!grid_) {
    throw StructuralError("panel constructed without a grid");
  }
  if (series_.empty()) {
    throw StructuralError("panel needs at least one series");
  }
  const Eigen::Index n = series_.front().rows();
  const Eigen::Index t = grid_->size();
  if (n < 1) {
    throw InsufficientDataError("panel series have no replicates");
  }
  for (std::size_t i = 0; i < series_.size(); ++i) {
    const auto& s = series_[i];
    if (s.rows() != n) {
      throw StructuralError("series " + std::to_string(i) + " has " +
                            std::to_string(s.rows()) + " replicates, expected " +
                            std::to_string(n));
    }
    if (s.cols() != t) {
      throw StructuralError("series " + std::to_string(i) + " has " +
                            std::to_string(s.cols()) + " grid values, expected " +
                            std::to_string(t));
    }
    if (!s.allFinite()) {
      throw StructuralError("series " + std::to_string(i) +
                            " contains non-finite values");
    }
  }
  if (labels_.empty()) {
    labels_.reserve(series_.size());
    for (std::size_t i = 0; i < series_.size(); ++i) {
      labels_.push_back("series_" + std::to_string(i));
    }
  } else if (labels_.size() != series_.size()) {
    throw StructuralError("label count " + std::to_string(labels_.size()) +
                          " does not match series count " +
                          std::to_string(series_.size()));
  }
}

const Eigen::MatrixXd& FunctionalPanel::series(int i) const {
  if (i < 0 || i >= series_count()) {
    throw std::invalid_argument("series index " + std::to_string(i) +
                                " out of range [0, " +
                                std::to_string(series_count()) + ")");
  }
  return series_[static_cast<std::size_t>(i)];
}

GridCurve FunctionalPanel::curve(int i, int n) const {
  const Eigen::MatrixXd& s = series(i);
  if (n < 0 || n >= replicate_count()) {
    throw std::invalid_argument("replicate index " + std::to_string(n) +
                                " out of range [0, " +
                                std::to_string(replicate_count()) + ")");
  }
  return GridCurve(grid_, s.row(n).transpose());
}

CenteredPanel center_panel(const FunctionalPanel& panel) {
  std::vector<Eigen::MatrixXd> centered;
  std::vector<Eigen::VectorXd> means;
  centered.reserve(static_cast<std::size_t>(panel.series_count()));
  means.reserve(static_cast<std::size_t>(panel.series_count()));
  for (int i = 0; i < panel.series_count(); ++i) {
    const Eigen::MatrixXd& s = panel.series(i);
    Eigen::VectorXd mean = s.colwise().mean();
    centered.push_back(s.rowwise() - mean.transpose());
    means.push_back(std::move(mean));
  }
  return CenteredPanel{
      FunctionalPanel(panel.grid(), std::move(centered), panel.labels()),
      std::move(means)};
}

FunctionalPanel linear_detrend(const FunctionalPanel& panel) {
  const int n = panel.replicate_count();
  if (n < 2) {
    throw InsufficientDataError("detrending needs at least 2 replicates, got " +
                                std::to_string(n));
  }
  // Regress each grid column on the centered replicate index. With
  // u_n = n - (N-1)/2 the slope is sum(u_n y_n) / sum(u_n^2) and the fitted
  // line is ybar + slope * u_n; subtracting it removes both the trend and
  // the mean, every column at once.
  Eigen::VectorXd u(n);
  for (int k = 0; k < n; ++k) {
    u[k] = k - (n - 1) / 2.0;
  }
  const double uu = u.squaredNorm();
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(panel.series_count()));
  for (int i = 0; i < panel.series_count(); ++i) {
    const Eigen::MatrixXd& s = panel.series(i);
    Eigen::RowVectorXd mean = s.colwise().mean();
    Eigen::RowVectorXd slope = (u.transpose() * s) / uu;
    out.push_back(s - u * slope - Eigen::VectorXd::Ones(n) * mean);
  }
  return FunctionalPanel(panel.grid(), std::move(out), panel.labels());
}

} // namespace fpanel
