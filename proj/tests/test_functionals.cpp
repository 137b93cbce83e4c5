#include <doctest.h>

#include <cmath>
#include <random>

#include "rnls/functionals.hpp"
#include "rnls/random_fields.hpp"

using namespace rnls;

namespace {

std::shared_ptr<RadialGrid> test_grid() {
    static auto g = std::make_shared<RadialGrid>(1024, 30.0);
    return g;
}

FieldPair gaussian_pair(double au, double av, double wu = 1.0, double wv = 1.0) {
    auto g = test_grid();
    FieldPair p = FieldPair::zero(g);
    for (int i = 0; i < g->n(); ++i) {
        double r = g->nodes()[i];
        p.u[i] = au * std::exp(-wu * r * r);
        p.v[i] = av * std::exp(-wv * r * r);
    }
    return p;
}

} // namespace

TEST_CASE("zero pair evaluates to all-zero functionals") {
    FieldPair p = FieldPair::zero(test_grid());
    FunctionalReport rep = evaluate(p, 1.0);
    CHECK(rep.mass == 0.0);
    CHECK(rep.energy == 0.0);
    CHECK(rep.kinetic == 0.0);
    CHECK(rep.interaction == 0.0);
    CHECK(rep.k_20_8 == 0.0);
}

TEST_CASE("amplitude homogeneity: M, K ~ a^2 and P ~ a^3") {
    std::mt19937_64 rng(7);
    FieldPair p = random_radial_pair(test_grid(), rng);
    FunctionalReport r1 = evaluate(p, 1.0);
    FieldPair q = p;
    const double a = 1.7;
    for (auto& z : q.u) z *= a;
    for (auto& z : q.v) z *= a;
    FunctionalReport r2 = evaluate(q, 1.0);
    CHECK(r2.mass == doctest::Approx(a * a * r1.mass).epsilon(1e-12));
    CHECK(r2.kinetic == doctest::Approx(a * a * r1.kinetic).epsilon(1e-12));
    CHECK(r2.interaction == doctest::Approx(a * a * a * r1.interaction).epsilon(1e-12));
    CHECK(r2.energy == doctest::Approx(r2.kinetic - 2 * r2.interaction).epsilon(1e-14));
}

TEST_CASE("phase rotation (u,v) -> (e^{i t}u, e^{2 i t}v) leaves M, K, P unchanged") {
    std::mt19937_64 rng(11);
    FieldPair p = random_radial_pair(test_grid(), rng);
    FunctionalReport r1 = evaluate(p, 1.0);
    double th = 0.83;
    FieldPair q = p;
    for (auto& z : q.u) z *= std::exp(cplx(0, th));
    for (auto& z : q.v) z *= std::exp(cplx(0, 2 * th));
    FunctionalReport r2 = evaluate(q, 1.0);
    CHECK(r2.mass == doctest::Approx(r1.mass).epsilon(1e-12));
    CHECK(r2.kinetic == doctest::Approx(r1.kinetic).epsilon(1e-12));
    CHECK(r2.interaction == doctest::Approx(r1.interaction).epsilon(1e-12));
}

TEST_CASE("k_alpha_beta: (20,8) equals 8K - 20P; (0,0) vanishes") {
    std::mt19937_64 rng(3);
    FieldPair p = random_radial_pair(test_grid(), rng);
    FunctionalReport rep = evaluate(p, 2.0);
    double k = k_alpha_beta(p, 2.0, 20.0, 8.0);
    CHECK(k == doctest::Approx(8 * rep.kinetic - 20 * rep.interaction)
                   .epsilon(1e-12));
    CHECK(k_alpha_beta(p, 2.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("k_alpha_beta agrees with central differences of I_w under scaling") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> uab(-3.0, 3.0);
    auto grid = test_grid();
    int checked = 0;
    for (int trial = 0; trial < 10; ++trial) {
        FieldPair p = random_radial_pair(grid, rng, {3, 0.5, 0.5, 2.0, 4.0});
        double alpha = uab(rng), beta = uab(rng);
        double h = 1e-4;
        double ip = evaluate(scale_transform(p, alpha, beta, h), 1.0).i_omega;
        double im = evaluate(scale_transform(p, alpha, beta, -h), 1.0).i_omega;
        double fd = (ip - im) / (2 * h);
        double kab = k_alpha_beta(p, 1.0, alpha, beta);
        if (std::abs(kab) < 1e-6) continue;
        CHECK(fd == doctest::Approx(kab).epsilon(1e-5));
        ++checked;
    }
    CHECK(checked >= 7);
}

TEST_CASE("scale_transform: identity at lambda = 0 and exact norm scalings") {
    auto fine = std::make_shared<RadialGrid>(8192, 30.0);
    FieldPair p = FieldPair::zero(fine);
    for (int i = 0; i < fine->n(); ++i) {
        double r = fine->nodes()[i];
        p.u[i] = 1.2 * std::exp(-0.8 * r * r);
        p.v[i] = 0.7 * std::exp(-1.1 * r * r);
    }
    FieldPair q = scale_transform(p, 20.0, 8.0, 0.0);
    CHECK(q.u == p.u);

    double lam = 0.04;
    FieldPair s = scale_transform(p, 20.0, 8.0, lam);
    double m0 = fine->norm_sq(p.u);
    double m1 = fine->norm_sq(s.u);
    CHECK(m1 == doctest::Approx(std::exp((2 * 20.0 - 5 * 8.0) * lam) * m0).epsilon(1e-8));
    double p0 = interaction_of(p), p1 = interaction_of(s);
    CHECK(p1 == doctest::Approx(std::exp((3 * 20.0 - 5 * 8.0) * lam) * p0).epsilon(1e-8));
}

TEST_CASE("scale_transform flags off-grid support") {
    FieldPair p = gaussian_pair(1.0, 1.0, 0.05, 0.05); // wide profile
    CHECK_THROWS_AS(scale_transform(p, 0.0, 8.0, -0.5), ResolutionError);
}

TEST_CASE("nehari projection: closed form, sign and quality") {
    std::mt19937_64 rng(17);
    FieldPair p = random_projectable_pair(test_grid(), rng);
    double K = kinetic_of(p), P = interaction_of(p);
    REQUIRE(P > 0);
    double lam = nehari_projection_lambda(p);
    CHECK(lam == doctest::Approx(0.25 * std::log(2 * K / (5 * P))).epsilon(1e-14));

    NehariProjection proj = project_to_nehari(p);
    double Kp = kinetic_of(proj.pair), Pp = interaction_of(proj.pair);
    CHECK(std::abs(8 * Kp - 20 * Pp) <= 1e-9 * Kp);

    // A pair with K_w^{20,8} < 0 projects with negative lambda.
    FieldPair big = p;
    double a = std::pow(2.0 * (2.0 * K) / (5.0 * P), 1.0); // force 8K < 20 a P
    for (auto& z : big.u) z *= a;
    for (auto& z : big.v) z *= a;
    if (8 * kinetic_of(big) - 20 * interaction_of(big) < 0)
        CHECK(nehari_projection_lambda(big) < 0);

    // Amplitude doubling: lambda0 = -(1/4) log 2 relative to the projected state.
    FieldPair base = proj.pair;
    FieldPair twice = base;
    for (auto& z : twice.u) z *= 2.0;
    for (auto& z : twice.v) z *= 2.0;
    CHECK(nehari_projection_lambda(twice) ==
          doctest::Approx(-0.25 * std::log(2.0)).epsilon(1e-6));
    NehariProjection reproj = project_to_nehari(twice);
    double K2 = kinetic_of(reproj.pair);
    CHECK(std::abs(8 * K2 - 20 * interaction_of(reproj.pair)) <= 1e-9 * K2);

    FieldPair neg = p;
    for (auto& z : neg.v) z = -z;
    if (interaction_of(neg) <= 0)
        CHECK_THROWS_AS(nehari_projection_lambda(neg), NoProjectionError);
}

TEST_CASE("momentum: zero for radial and real data, plane-wave identity on cartesian") {
    std::mt19937_64 rng(23);
    FieldPair p = random_radial_pair(test_grid(), rng);
    auto mom = momentum_of(p);
    for (double c : mom) CHECK(c == 0.0);

    auto cg = std::make_shared<CartesianGrid>(8, 6.0);
    FieldPair c = FieldPair::zero(cg);
    double xi = cg->k_of(1);
    size_t idx = 0;
    for (int i0 = 0; i0 < 8; ++i0)
        for (int i1 = 0; i1 < 8; ++i1)
            for (int i2 = 0; i2 < 8; ++i2)
                for (int i3 = 0; i3 < 8; ++i3)
                    for (int i4 = 0; i4 < 8; ++i4, ++idx) {
                        double r2 = 0;
                        double xs[5] = {cg->x_of(i0), cg->x_of(i1), cg->x_of(i2), cg->x_of(i3),
                                        cg->x_of(i4)};
                        for (double x : xs) r2 += x * x;
                        double gaus = std::exp(-0.4 * r2);
                        c.u[idx] = gaus * std::exp(cplx(0, xi * xs[1]));
                        c.v[idx] = 0;
                    }
    auto pm = momentum_of(c);
    double g2 = cg->norm_sq(c.u);
    CHECK(pm[1] == doctest::Approx(xi * g2).epsilon(1e-6));
    CHECK(std::abs(pm[0]) <= 1e-9 * std::abs(pm[1]));

    // real pair has zero momentum (up to FFT roundoff of the k-weighted sum)
    for (auto& z : c.u) z = std::abs(z);
    auto pr = momentum_of(c);
    for (double q : pr) CHECK(std::abs(q) <= 1e-9 * g2);
}

TEST_CASE("galilean boost: identity, exact algebra, guards") {
    auto cg = std::make_shared<CartesianGrid>(8, 6.0);
    FieldPair p = FieldPair::zero(cg);
    size_t idx = 0;
    for (int i0 = 0; i0 < 8; ++i0)
        for (int i1 = 0; i1 < 8; ++i1)
            for (int i2 = 0; i2 < 8; ++i2)
                for (int i3 = 0; i3 < 8; ++i3)
                    for (int i4 = 0; i4 < 8; ++i4, ++idx) {
                        double r2 = 0;
                        double xs[5] = {cg->x_of(i0), cg->x_of(i1), cg->x_of(i2), cg->x_of(i3),
                                        cg->x_of(i4)};
                        for (double x : xs) r2 += x * x;
                        p.u[idx] = 0.8 * std::exp(-0.3 * r2);
                        p.v[idx] = 0.5 * std::exp(-0.35 * r2);
                    }
    std::array<double, 5> zero{};
    FieldPair same = galilean_boost(p, zero, 0.0);
    CHECK(same.u == p.u);

    std::array<double, 5> xi{cg->k_of(1), 0, 0, 0, 0};
    FieldPair b = galilean_boost(p, xi, 0.0);
    FunctionalReport r0 = evaluate(p, 1.0), r1 = evaluate(b, 1.0);
    double kexp = r0.kinetic + xi[0] * xi[0] * r0.mass + 2 * xi[0] * r0.momentum[0];
    CHECK(r1.mass == doctest::Approx(r0.mass).epsilon(1e-12));
    CHECK(r1.kinetic == doctest::Approx(kexp).epsilon(1e-6));
    CHECK(r1.interaction == doctest::Approx(r0.interaction).epsilon(1e-8));
    // I_w gains (1/2)(|xi|^2 M + 2 xi . P~)
    double ishift = 0.5 * (xi[0] * xi[0] * r0.mass + 2 * xi[0] * r0.momentum[0]);
    CHECK(r1.i_omega == doctest::Approx(r0.i_omega + ishift).epsilon(1e-6));

    std::array<double, 5> bad{cg->k_of(1) * 1.123, 0, 0, 0, 0}; // off-lattice
    CHECK_THROWS_AS(galilean_boost(p, bad, 0.0), ResolutionError);
    std::array<double, 5> coarse{M_PI / cg->spacing(), 0, 0, 0, 0}; // under-resolved phase
    CHECK_THROWS_AS(galilean_boost(p, coarse, 0.0), ResolutionError);
}

TEST_CASE("gn gap: nonnegative trivially for P <= 0, undefined for zero pair") {
    ThresholdSet thr;
    thr.c_gn = 0.0139726;
    thr.ground_mass = 366.5;
    thr.me_threshold = thr.ground_mass * thr.ground_mass;
    thr.mk_threshold = 5 * thr.me_threshold;
    FieldPair p = gaussian_pair(1.0, -0.5);
    REQUIRE(interaction_of(p) < 0);
    CHECK(gn_inequality_gap(p, thr) >= 0.0);
    FieldPair z = FieldPair::zero(test_grid());
    CHECK_THROWS_AS(gn_inequality_gap(z, thr), UndefinedGapError);
}

TEST_CASE("variance: gaussian closed form and reliability guard") {
    auto g = test_grid();
    FieldPair p = FieldPair::zero(g);
    for (int i = 0; i < g->n(); ++i) p.u[i] = std::exp(-g->nodes()[i] * g->nodes()[i]);
    auto raw = detail::variance_raw(p);
    double exact = 1.25 * std::pow(M_PI / 2.0, 2.5); // \int |x|^2 e^{-2 r^2} in d = 5
    CHECK(raw.reliable);
    CHECK(raw.value == doctest::Approx(exact).epsilon(1e-8));
}
