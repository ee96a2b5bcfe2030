#include "ramp/metrics.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace ramp;

namespace {

Vec pt(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

}  // namespace

TEST_CASE("fresh grid has zero coverage") {
  CoverageGrid g(GridSpec::square(-1, 1, 50));
  CHECK(g.value() == 0.0);
  CHECK(g.spec().num_cells() == 2500);
}

TEST_CASE("one state flips exactly one cell, idempotently") {
  CoverageGrid g(GridSpec::square(-1, 1, 50));
  g.update(pt(0.0, 0.0));
  CHECK(g.visited_cells() == 1);
  CHECK(g.value() == doctest::Approx(0.04).epsilon(1e-15));
  g.update(pt(0.0, 0.0));
  CHECK(g.visited_cells() == 1);
}

TEST_CASE("sweeping all cell centers covers the grid") {
  const GridSpec spec = GridSpec::square(-1, 1, 50);
  CoverageGrid g(spec);
  double prev = 0.0;
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) {
      g.update(pt(-1 + (i + 0.5) * 0.04, -1 + (j + 0.5) * 0.04));
      CHECK(g.value() >= prev);
      prev = g.value();
    }
  CHECK(g.value() == 100.0);
}

TEST_CASE("cell indexing and clamping") {
  const GridSpec spec = GridSpec::square(-1, 1, 10);
  CHECK(spec.cell_of(pt(-1, -1)) == spec.cell_of(pt(-5, -3)));
  CHECK(spec.cell_of(pt(1, 1)) == spec.cell_of(pt(2, 9)));
  CHECK(spec.cell_of(pt(1, 1)) == 99);
  CHECK(spec.cell_of(pt(-1, -1)) == 0);
  CHECK(spec.cell_of(pt(-0.95, -0.95)) != spec.cell_of(pt(-0.75, -0.95)));
  const GridSpec line = GridSpec::square(0, 1, 4, 1);
  CHECK(line.num_cells() == 4);
  CHECK(line.cell_of(Vec::Constant(1, 0.6)) == 2);
}

TEST_CASE("histogram entropy examples") {
  const GridSpec spec = GridSpec::square(-1, 1, 10);
  Mat one(2, 5);
  one.colwise() = pt(0.31, 0.32);
  CHECK(histogram_entropy(one, spec) == 0.0);

  std::vector<Vec> spread;
  for (int k = 0; k < 7; ++k)
    for (int rep = 0; rep < 3; ++rep) spread.push_back(pt(-0.95 + 0.2 * k, 0.05));
  CHECK(histogram_entropy(spread, spec) == doctest::Approx(std::log(7.0)).epsilon(1e-14));
  CHECK_THROWS(histogram_entropy(Mat(2, 0), spec));
}

TEST_CASE("plug-in entropy of uniform samples is close to log(cells)") {
  Rng rng(1);
  const Mat x = test::uniform_mat(2, 100000, -1, 1, rng);
  CHECK(std::abs(histogram_entropy(x, GridSpec::square(-1, 1, 10)) - std::log(100.0)) <= 0.02);
}

TEST_CASE("histogram entropy stays within [0, log cells]") {
  Rng rng(2);
  const GridSpec spec = GridSpec::square(-1, 1, 6);
  std::uniform_int_distribution<int> n(1, 400);
  std::uniform_real_distribution<double> w(0.01, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat x = test::uniform_mat(2, n(rng), -w(rng), w(rng), rng);
    const double h = histogram_entropy(x, spec);
    CHECK(h >= 0.0);
    CHECK(h <= std::log(36.0) + 1e-12);
  }
}
