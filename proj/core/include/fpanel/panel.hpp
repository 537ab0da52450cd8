#ifndef FPANEL_PANEL_HPP
#define FPANEL_PANEL_HPP

#include <string>
#include <vector>

#include "fpanel/grid.hpp"

namespace fpanel {

// A functional panel: I series, each observed N times on the same grid of
// T points. Series i is stored as an N x T matrix whose rows are curves.
// All series share one grid and one replicate count; the constructor
// enforces this and the object is immutable afterwards.
class FunctionalPanel {
public:
  FunctionalPanel(GridPtr grid, std::vector<Eigen::MatrixXd> series,
                  std::vector<std::string> labels = {});

  int series_count() const { return static_cast<int>(series_.size()); }
  int replicate_count() const { return static_cast<int>(series_.front().rows()); }
  int grid_size() const { return static_cast<int>(grid_->size()); }

  const GridPtr& grid() const { return grid_; }
  const Eigen::MatrixXd& series(int i) const;
  const std::vector<std::string>& labels() const { return labels_; }

  // Row n of series i as a curve (copies the row).
  GridCurve curve(int i, int n) const;

private:
  GridPtr grid_;
  std::vector<Eigen::MatrixXd> series_;
  std::vector<std::string> labels_;
};

// A panel whose series have been centered, plus the subtracted means so the
// original can be reconstructed and the means reused (e.g. by simulators).
struct CenteredPanel {
  FunctionalPanel panel;
  std::vector<Eigen::VectorXd> means; // one length-T mean per series
};

// Subtract each series' pointwise sample mean across replicates.
CenteredPanel center_panel(const FunctionalPanel& panel);

// Remove a least-squares straight line in the replicate index from every
// grid column of every series. Intended for data with a deterministic
// drift; centering alone is the common case.
FunctionalPanel linear_detrend(const FunctionalPanel& panel);

} // namespace fpanel

#endif
