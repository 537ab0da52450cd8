#ifndef FPANEL_GRID_HPP
#define FPANEL_GRID_HPP

#include <Eigen/Core>
#include <memory>

namespace fpanel {

// A shared evaluation grid on a closed interval together with quadrature
// weights that turn pointwise products into L2 inner products. The default
// weights are trapezoid-rule weights, so they sum to the grid span and
// handle non-uniform spacing correctly.
//
// Grids are immutable and typically shared between many curves via
// shared_ptr, so curves can cheaply assert "same grid" by pointer or by
// value comparison.
class Grid {
public:
  // Build a grid with trapezoid weights. Points must be finite and
  // strictly increasing, with at least two of them.
  explicit Grid(Eigen::VectorXd points);

  // Build a grid with caller-supplied weights (same length, all positive).
  Grid(Eigen::VectorXd points, Eigen::VectorXd weights);

  Eigen::Index size() const { return points_.size(); }
  const Eigen::VectorXd& points() const { return points_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  // Value equality: same length, identical points and weights.
  bool same_as(const Grid& other) const;

private:
  Eigen::VectorXd points_;
  Eigen::VectorXd weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

// Convenience: a uniform grid of `size` points spanning [lo, hi].
GridPtr make_uniform_grid(Eigen::Index size, double lo = 0.0, double hi = 1.0);

// One curve sampled on a grid. Values are stored densely, one per grid
// point, and validated to be finite on construction.
class GridCurve {
public:
  GridCurve(GridPtr grid, Eigen::VectorXd values);

  const GridPtr& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }

private:
  GridPtr grid_;
  Eigen::VectorXd values_;
};

// Quadrature approximation of the L2 inner product. Both curves must live
// on the same grid (by value).
double inner_product(const GridCurve& a, const GridCurve& b);

// sqrt(inner_product(a, a))
double l2_norm(const GridCurve& a);

} // namespace fpanel

#endif
