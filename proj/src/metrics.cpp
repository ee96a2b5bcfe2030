#include "ramp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ramp {

GridSpec GridSpec::square(double lo, double hi, int resolution, int dims) {
  return {Vec::Constant(dims, lo), Vec::Constant(dims, hi), resolution};
}

std::size_t GridSpec::num_cells() const {
  std::size_t n = 1;
  for (Eigen::Index d = 0; d < lo.size(); ++d) n *= static_cast<std::size_t>(resolution);
  return n;
}

std::size_t GridSpec::cell_of(const Vec& p) const {
  if (p.size() != lo.size()) throw std::invalid_argument("GridSpec: projection dimension mismatch");
  std::size_t index = 0;
  for (Eigen::Index d = 0; d < lo.size(); ++d) {
    const double rel = (p(d) - lo(d)) / (hi(d) - lo(d));
    const double scaled = std::floor(rel * resolution);
    const int cell = std::isfinite(scaled) ? static_cast<int>(std::clamp(scaled, 0.0, resolution - 1.0)) : 0;
    index = index * static_cast<std::size_t>(resolution) + static_cast<std::size_t>(cell);
  }
  return index;
}

CoverageGrid::CoverageGrid(GridSpec spec) : spec_(std::move(spec)) {
  if (spec_.resolution < 1) throw std::invalid_argument("CoverageGrid: resolution must be >= 1");
  if (spec_.lo.size() != spec_.hi.size() || spec_.lo.size() == 0)
    throw std::invalid_argument("CoverageGrid: bounds dimension mismatch");
  visited_.assign(spec_.num_cells(), false);
}

void CoverageGrid::update(const Vec& projected_state) {
  const std::size_t cell = spec_.cell_of(projected_state);
  if (!visited_[cell]) {
    visited_[cell] = true;
    ++visited_count_;
  }
}

double CoverageGrid::value() const {
  return 100.0 * static_cast<double>(visited_count_) / static_cast<double>(visited_.size());
}

namespace {

double entropy_of_counts(const std::vector<std::size_t>& counts, std::size_t total) {
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return std::max(h, 0.0);
}

}  // namespace

double histogram_entropy(const Mat& states, const GridSpec& grid) {
  if (states.cols() == 0) throw std::invalid_argument("histogram_entropy: empty sample");
  std::vector<std::size_t> counts(grid.num_cells(), 0);
  for (Eigen::Index j = 0; j < states.cols(); ++j) ++counts[grid.cell_of(states.col(j))];
  return entropy_of_counts(counts, static_cast<std::size_t>(states.cols()));
}

double histogram_entropy(const std::vector<Vec>& states, const GridSpec& grid) {
  if (states.empty()) throw std::invalid_argument("histogram_entropy: empty sample");
  std::vector<std::size_t> counts(grid.num_cells(), 0);
  for (const auto& s : states) ++counts[grid.cell_of(s)];
  return entropy_of_counts(counts, states.size());
}

}  // namespace ramp
