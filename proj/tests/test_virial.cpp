#include <doctest.h>

#include <cmath>
#include <random>

#include "rnls/random_fields.hpp"
#include "rnls/virial.hpp"

namespace {
// seam radii of the piecewise blowup cutoff at scale R (unit seams at
// s = 1, 1 + 2W, 2.64, 3 with W from the construction)
struct ShoulderSeams {
    double a, b, c, d;
    bool near(double r, double tol) const {
        for (double x : {a, b, c, d})
            if (std::abs(r - x) < tol) return true;
        return false;
    }
};
ShoulderSeams blowup_seams(double R) {
    // the interior seam positions are read off the profile's curvature jumps
    double W = 0;
    for (double s = 1.0; s < 3.0; s += 1e-4) {
        if (rnls::CutoffFamily::blowup_profile(s, 2) >= 2.0 - 1e-9 && s > 1.05) {
            W = s;
            break;
        }
    }
    return {R, W * R, 2.64 * R, 3.0 * R};
}
} // namespace

using namespace rnls;

namespace {

std::shared_ptr<RadialGrid> vgrid() {
    static auto g = std::make_shared<RadialGrid>(2048, 40.0);
    return g;
}

} // namespace

TEST_CASE("blowup cutoff: r^2 core, chi'' <= 2, support, derivative consistency") {
    auto g = vgrid();
    double R = 8.0;
    CutoffFamily f = CutoffFamily::blowup(*g, R);
    for (int i = 0; i < g->n(); ++i) {
        double r = g->nodes()[i];
        if (r <= R) {
            CHECK(f.chi[i] == doctest::Approx(r * r).epsilon(1e-14));
            CHECK(f.chi_pp[i] == 2.0);
        }
        if (r >= 3.0 * R) {
            CHECK(f.chi[i] == 0.0);
            CHECK(f.chi_p[i] == 0.0);
        }
        CHECK(f.chi_pp[i] <= 2.0 + 1e-12);
    }
    // chi and chi' continuous across the shoulder ends by construction.
    CHECK(CutoffFamily::blowup_profile(3.0 - 1e-13, 0) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(CutoffFamily::blowup_profile(3.0 - 1e-13, 1) == doctest::Approx(0.0).epsilon(1e-10));
    // Finite differences of the sampled chi reproduce chi' and chi''
    // (away from the piecewise seams, where a five-point stencil spans a
    // C^2 junction).
    double h = g->h();
    const ShoulderSeams seams = blowup_seams(R);
    for (int i = 2; i + 2 < g->n(); i += 23) {
        double r = g->nodes()[i];
        if (seams.near(r, 6 * h)) continue;
        double fd1 = (f.chi[i - 2] - 8 * f.chi[i - 1] + 8 * f.chi[i + 1] - f.chi[i + 2]) / (12 * h);
        CHECK(std::abs(fd1 - f.chi_p[i]) <= 1e-8 * std::max(1.0, std::abs(f.chi_p[i])));
        double fd2 =
            (-f.chi[i - 2] + 16 * f.chi[i - 1] - 30 * f.chi[i] + 16 * f.chi[i + 1] - f.chi[i + 2]) /
            (12 * h * h);
        CHECK(std::abs(fd2 - f.chi_pp[i]) <= 2e-7 * std::max(1.0, std::abs(f.chi_pp[i])));
    }
}

TEST_CASE("mass cutoff: values in [0,1], slope bound 4/R") {
    auto g = vgrid();
    double R = 6.0;
    CutoffFamily f = CutoffFamily::mass(*g, R);
    for (int i = 0; i < g->n(); ++i) {
        double r = g->nodes()[i];
        CHECK(f.chi[i] >= 0.0);
        CHECK(f.chi[i] <= 1.0);
        CHECK(f.chi_p[i] <= 4.0 / R + 1e-12);
        if (r <= 0.5 * R) CHECK(f.chi[i] == 0.0);
        if (r >= R) CHECK(f.chi[i] == 1.0);
    }
}

TEST_CASE("variance: zero pair, gaussian moment, reliability error") {
    auto g = vgrid();
    FieldPair z = FieldPair::zero(g);
    CHECK(variance_of(z) == 0.0);

    FieldPair p = FieldPair::zero(g);
    for (int i = 0; i < g->n(); ++i) p.u[i] = std::exp(-g->nodes()[i] * g->nodes()[i]);
    double exact = 1.25 * std::pow(M_PI / 2.0, 2.5);
    CHECK(variance_of(p) == doctest::Approx(exact).epsilon(1e-8));
    CHECK(variance_of(p) > 0.0);

    FieldPair tail = FieldPair::zero(g);
    for (int i = 0; i < g->n(); ++i) {
        double r = g->nodes()[i];
        tail.u[i] = std::exp(-0.5 * (r - 39.0) * (r - 39.0)); // bump at the boundary
    }
    CHECK_THROWS_AS(variance_of(tail), UnreliableVarianceError);
}

TEST_CASE("virial_rhs equals 8K - 20P and both algebraic routes agree") {
    std::mt19937_64 rng(31);
    FieldPair p = random_radial_pair(vgrid(), rng);
    FunctionalReport rep = evaluate(p, 1.0);
    double rhs = virial_rhs(p);
    CHECK(rhs == doctest::Approx(8 * rep.kinetic - 20 * rep.interaction).epsilon(1e-12));
    CHECK(rhs == doctest::Approx(10 * rep.energy - 2 * rep.kinetic).epsilon(1e-12));
    CHECK(virial_rhs(FieldPair::zero(vgrid())) == 0.0);
}

TEST_CASE("localized virial: wide cutoff recovers 8K - 20P, compact support kills remainders") {
    auto g = vgrid();
    FieldPair p = FieldPair::zero(g);
    for (int i = 0; i < g->n(); ++i) {
        double r = g->nodes()[i];
        p.u[i] = 1.3 * std::exp(-r * r);
        p.v[i] = 0.9 * std::exp(-1.2 * r * r);
    }
    // data radius ~ 2; R = 10 = 5x data radius
    CutoffFamily fam = CutoffFamily::blowup(*g, 10.0);
    VirialReading rd = localized_virial(p, fam);
    double k208 = virial_rhs(p);
    CHECK(rd.I_double_prime == doctest::Approx(k208).epsilon(1e-4));
    CHECK(std::abs(rd.R1) + std::abs(rd.R2) + std::abs(rd.R3) <= 1e-10 * std::abs(k208));
    CHECK(rd.I > 0.0); // nonnegative weight

    CutoffFamily close = CutoffFamily::blowup(*g, 2.0);
    VirialReading rc = localized_virial(p, close);
    CHECK(std::abs(rc.I_double_prime - (k208 + rc.R1 + rc.R2 + rc.R3)) <=
          1e-9 * (std::abs(k208) + 1.0));
}

TEST_CASE("localized virial: linear weight reproduces momentum structure") {
    std::mt19937_64 rng(37);
    FieldPair p = random_radial_pair(vgrid(), rng);
    CutoffFamily lin = CutoffFamily::linear(2);
    VirialReading rd = localized_virial(p, lin);
    CHECK(rd.I == 0.0);      // radial symmetry
    CHECK(rd.I_prime == 0.0); // 2 x momentum component
    CHECK(rd.I_double_prime == 0.0);

    auto cg = std::make_shared<CartesianGrid>(8, 6.0);
    FieldPair c = FieldPair::zero(cg);
    size_t idx = 0;
    double xi = cg->k_of(1);
    for (int i0 = 0; i0 < 8; ++i0)
        for (int i1 = 0; i1 < 8; ++i1)
            for (int i2 = 0; i2 < 8; ++i2)
                for (int i3 = 0; i3 < 8; ++i3)
                    for (int i4 = 0; i4 < 8; ++i4, ++idx) {
                        double r2 = 0;
                        double xs[5] = {cg->x_of(i0), cg->x_of(i1), cg->x_of(i2), cg->x_of(i3),
                                        cg->x_of(i4)};
                        for (double x : xs) r2 += x * x;
                        c.u[idx] = std::exp(-0.4 * r2) * std::exp(cplx(0, xi * xs[2]));
                    }
    VirialReading rc = localized_virial(c, lin);
    CHECK(rc.I_prime == doctest::Approx(2.0 * momentum_of(c)[2]).epsilon(1e-12));
    CHECK(rc.I_double_prime == 0.0);
}

TEST_CASE("sign bound check: scaled ground-state algebra both sides") {
    // Synthetic exact algebra: a state with K = 5M, P = 2M scaled by a has
    // I_1(a) = (3a^2 - 2a^3) M and K208(a) = 40 a^2 (1 - a) M. Use gaussian
    // stand-ins normalized to those relations via a projected pair.
    std::mt19937_64 rng(41);
    FieldPair p = random_projectable_pair(vgrid(), rng);
    NehariProjection proj = [&] {
        for (;;) {
            try {
                return project_to_nehari(p);
            } catch (const ResolutionError&) {
                p = random_projectable_pair(vgrid(), rng);
            }
        }
    }();
    FunctionalReport rep = evaluate(proj.pair, 1.0);
    double gs_action = rep.i_omega * 1.02; // pretend action slightly above this pair's
    // On the constraint set K208 = 0: the equality case is excluded.
    CHECK_THROWS_AS(sign_bound_check(proj.pair, 1.0, gs_action), NotApplicableError);
    // I_omega above the reference action: not applicable either.
    CHECK_THROWS_AS(sign_bound_check(proj.pair, 1.0, rep.i_omega * 0.5), NotApplicableError);

    FieldPair small = proj.pair;
    for (auto& z : small.u) z *= 0.8;
    for (auto& z : small.v) z *= 0.8;
    FunctionalReport rs = evaluate(small, 1.0);
    if (rs.i_omega < gs_action) {
        SignBoundReport r = sign_bound_check(small, 1.0, gs_action);
        CHECK(r.sign == 1);
        CHECK(r.bound_holds);
    }
    FieldPair big = proj.pair;
    for (auto& z : big.u) z *= 1.2;
    for (auto& z : big.v) z *= 1.2;
    FunctionalReport rb = evaluate(big, 1.0);
    if (rb.i_omega < gs_action) {
        SignBoundReport r = sign_bound_check(big, 1.0, gs_action);
        CHECK(r.sign == -1);
        CHECK(r.bound_holds);
    }
}

TEST_CASE("radial sobolev: zero field, gaussian uniformity, bump margin") {
    auto g = vgrid();
    std::vector<cplx> z(g->n(), cplx(0));
    auto rz = radial_sobolev_check(z, *g, {1.0, 2.0, 5.0, 10.0});
    for (double q : rz.ratios) CHECK(q == 0.0);

    std::vector<cplx> f(g->n());
    for (int i = 0; i < g->n(); ++i) f[i] = std::exp(-0.5 * g->nodes()[i] * g->nodes()[i]);
    auto rg = radial_sobolev_check(f, *g, {1.0, 2.0, 5.0, 10.0});
    CHECK(rg.uniform);
    for (double q : rg.ratios) CHECK(q <= rg.c_bound);

    // bump at radius 2R: the inequality holds with strict margin under the
    // gaussian-calibrated constant
    std::vector<cplx> bump(g->n());
    for (int i = 0; i < g->n(); ++i) {
        double r = g->nodes()[i];
        bump[i] = std::exp(-2.0 * (r - 4.0) * (r - 4.0));
    }
    auto rb = radial_sobolev_check(bump, *g, {2.0}, rg.c_bound * 10.0);
    CHECK(rb.uniform);
    CHECK(rb.ratios[0] < rb.c_bound);
}
