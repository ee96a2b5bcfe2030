#pragma once

#include "ramp/types.hpp"

#include <vector>

namespace ramp {

/// Regular grid over a box in a low-dimensional projection of the state.
struct GridSpec {
  Vec lo;
  Vec hi;
  int resolution = 50;  // cells per axis

  static GridSpec square(double lo, double hi, int resolution, int dims = 2);
  std::size_t num_cells() const;
  /// Flat cell index; coordinates outside the box clamp to edge cells.
  std::size_t cell_of(const Vec& p) const;
};

/// Visited-cell matrix; cells only ever flip from unvisited to visited.
class CoverageGrid {
 public:
  explicit CoverageGrid(GridSpec spec);

  void update(const Vec& projected_state);
  /// 100 * visited / total.
  double value() const;
  std::size_t visited_cells() const { return visited_count_; }
  const GridSpec& spec() const { return spec_; }

 private:
  GridSpec spec_;
  std::vector<bool> visited_;
  std::size_t visited_count_ = 0;
};

/// Shannon entropy (nats) of the normalized cell-count histogram of the
/// columns of `states`. Throws on an empty sample.
double histogram_entropy(const Mat& states, const GridSpec& grid);
double histogram_entropy(const std::vector<Vec>& states, const GridSpec& grid);

}  // namespace ramp
