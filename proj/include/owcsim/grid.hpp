#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "owcsim/geometry.hpp"
#include "owcsim/scenario.hpp"

namespace owcsim::harness {

// Uniform candidate-location lattice over the communication plane, centered
// so the margins on each axis are equal. The default spacing equals the
// localization resolution and yields 378 points in the reference room.
struct GridSpec {
  double spacing_m = 0.3;
};

inline std::vector<Vec2> generate_grid(const Scenario& scn, const GridSpec& spec) {
  if (spec.spacing_m + 1e-12 < scn.resolution_m)
    throw std::invalid_argument("grid: spacing below the localization resolution");
  auto axis = [&](double dim) {
    const auto steps = static_cast<std::size_t>(std::floor(dim / spec.spacing_m + 1e-9));
    const double margin = (dim - static_cast<double>(steps) * spec.spacing_m) / 2.0;
    std::vector<double> pts(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i)
      pts[i] = margin + static_cast<double>(i) * spec.spacing_m;
    return pts;
  };
  const auto xs = axis(scn.room_x);
  const auto ys = axis(scn.room_y);
  std::vector<Vec2> grid;
  grid.reserve(xs.size() * ys.size());
  for (double y : ys)
    for (double x : xs) grid.push_back({x, y});
  return grid;
}

}  // namespace owcsim::harness
