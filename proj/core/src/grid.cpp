#include "fpanel/grid.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "fpanel/errors.hpp"

namespace fpanel {

namespace {

void check_points(const Eigen::VectorXd& points) {
  if (points.size() < 2) {
    throw StructuralError("grid needs at least 2 points, got " +
                          std::to_string(points.size()));
  }
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i])) {
      throw StructuralError("grid point " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && points[i] <= points[i - 1]) {
      throw StructuralError("grid points must be strictly increasing; point " +
                            std::to_string(i) + " (" + std::to_string(points[i]) +
                            ") does not exceed its predecessor");
    }
  }
}

Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& points) {
  const Eigen::Index t = points.size();
  Eigen::VectorXd w(t);
  w[0] = (points[1] - points[0]) / 2.0;
  w[t - 1] = (points[t - 1] - points[t - 2]) / 2.0;
  for (Eigen::Index j = 1; j < t - 1; ++j) {
    w[j] = (points[j + 1] - points[j - 1]) / 2.0;
  }
  return w;
}

} // namespace

Grid::Grid(Eigen::VectorXd points) : points_(std::move(points)) {
  check_points(points_);
  weights_ = trapezoid_weights(points_);
}

Grid::Grid(Eigen::VectorXd points, Eigen::VectorXd weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  check_points(points_);
  if (weights_.size() != points_.size()) {
    throw StructuralError("weight count " + std::to_string(weights_.size()) +
                          " does not match point count " +
                          std::to_string(points_.size()));
  }
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || weights_[i] <= 0.0) {
      throw StructuralError("quadrature weight " + std::to_string(i) +
                            " must be finite and positive");
    }
  }
}

bool Grid::same_as(const Grid& other) const {
  return points_.size() == other.points_.size() && points_ == other.points_ &&
         weights_ == other.weights_;
}

GridPtr make_uniform_grid(Eigen::Index size, double lo, double hi) {
  return std::make_shared<Grid>(Eigen::VectorXd::LinSpaced(size, lo, hi));
}

GridCurve::GridCurve(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) {
    throw StructuralError("curve constructed without a grid");
  }
  if (values_.size() != grid_->size()) {
    throw StructuralError("curve has " + std::to_string(values_.size()) +
                          " values on a grid of " + std::to_string(grid_->size()) +
                          " points");
  }
  if (!values_.allFinite()) {
    throw StructuralError("curve contains non-finite values");
  }
}

double inner_product(const GridCurve& a, const GridCurve& b) {
  const Grid& ga = *a.grid();
  const Grid& gb = *b.grid();
  // Pointer equality is the fast path; shared grids are the norm.
  if (a.grid() != b.grid() && !ga.same_as(gb)) {
    throw StructuralError("inner product between curves on different grids");
  }
  return (a.values().array() * ga.weights().array() * b.values().array()).sum();
}

double l2_norm(const GridCurve& a) { return std::sqrt(inner_product(a, a)); }

} // namespace fpanel
