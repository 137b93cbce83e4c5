#include "rnls/random_fields.hpp"

#include <cmath>

namespace rnls {

namespace {

std::vector<double> bump_mixture(const RadialGrid& grid, std::mt19937_64& rng,
                                 const RandomFieldOptions& opts, bool positive) {
    std::uniform_real_distribution<double> uamp(positive ? 0.1 : -1.0, 1.0);
    std::uniform_real_distribution<double> uwid(opts.min_width, opts.max_width);
    std::uniform_real_distribution<double> ucen(0.0, opts.max_center);
    std::vector<double> f(grid.n(), 0.0);
    for (int b = 0; b < opts.n_bumps; ++b) {
        double a = opts.max_amp * uamp(rng);
        double w = uwid(rng);
        double c = ucen(rng);
        for (int i = 0; i < grid.n(); ++i) {
            double r = grid.nodes()[i];
            f[i] += a * (std::exp(-w * (r - c) * (r - c)) + std::exp(-w * (r + c) * (r + c)));
        }
    }
    return f;
}

} // namespace

std::vector<cplx> random_radial_field(const RadialGrid& grid, std::mt19937_64& rng,
                                      const RandomFieldOptions& opts) {
    std::vector<double> f = bump_mixture(grid, rng, opts, false);
    std::vector<cplx> out(grid.n());
    for (int i = 0; i < grid.n(); ++i) out[i] = f[i];
    return out;
}

FieldPair random_radial_pair(std::shared_ptr<const RadialGrid> grid, std::mt19937_64& rng,
                             const RandomFieldOptions& opts) {
    FieldPair p = FieldPair::zero(grid);
    p.u = random_radial_field(*grid, rng, opts);
    p.v = random_radial_field(*grid, rng, opts);
    return p;
}

FieldPair random_projectable_pair(std::shared_ptr<const RadialGrid> grid, std::mt19937_64& rng,
                                  const RandomFieldOptions& opts) {
    FieldPair p = FieldPair::zero(grid);
    p.u = random_radial_field(*grid, rng, opts);
    std::vector<double> v = bump_mixture(*grid, rng, opts, true);
    for (int i = 0; i < grid->n(); ++i) p.v[i] = v[i];
    return p;
}

} // namespace rnls
