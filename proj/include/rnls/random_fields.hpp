#pragma once

#include <random>

#include "rnls/grid.hpp"

namespace rnls {

// Smooth seeded radial test fields: finite mixtures of Gaussian bumps,
// evenly reflected so the profile is smooth through the origin.
struct RandomFieldOptions {
    int n_bumps = 3;
    double max_amp = 1.0;
    double min_width = 0.3; // Gaussian exponent b in e^{-b (r -+ c)^2}
    double max_width = 2.0;
    double max_center = 5.0;
};

std::vector<cplx> random_radial_field(const RadialGrid& grid, std::mt19937_64& rng,
                                      const RandomFieldOptions& opts = {});

// Mixed-sign u, mixed-sign v.
FieldPair random_radial_pair(std::shared_ptr<const RadialGrid> grid, std::mt19937_64& rng,
                             const RandomFieldOptions& opts = {});

// Real mixed-sign u with positive v, so P = \int v u^2 > 0 (projectable).
FieldPair random_projectable_pair(std::shared_ptr<const RadialGrid> grid, std::mt19937_64& rng,
                                  const RandomFieldOptions& opts = {});

} // namespace rnls
