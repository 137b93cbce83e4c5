#include "rnls/groundstate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rnls/banded.hpp"
#include "rnls/field_io.hpp"
#include "rnls/spline.hpp"

namespace rnls {

using nlohmann::json;

const char* method_name(SolveMethod m) {
    switch (m) {
        case SolveMethod::gradient_flow: return "gradient_flow";
        case SolveMethod::petviashvili: return "petviashvili";
        case SolveMethod::shooting: return "shooting";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Discrete variational pieces shared by the grid solvers.
//
// With c_i = |S^4| w_i r_i^4 and A = |S^4| h R^2 (-T) R^2 (both symmetric),
//   I_w = (w/2) sum c (phi^2 + 2 psi^2) + (1/2)<phi,A phi> + (1/4)<psi,A psi>
//         - sum c psi phi^2,
// so the exact discrete gradients are
//   dI/dphi = w C phi + A phi - 2 C psi phi,
//   dI/dpsi = 2 w C psi + (1/2) A psi - C phi^2,
// and every Pohozaev-type identity below holds at the discrete critical
// point to machine precision.
// ---------------------------------------------------------------------------

namespace {

struct GridForms {
    std::shared_ptr<const RadialGrid> grid;
    std::vector<double> c; // mass quadrature coefficients

    explicit GridForms(std::shared_ptr<const RadialGrid> g) : grid(std::move(g)) {
        const auto& r = grid->nodes();
        const auto& w = grid->quad_weights();
        c.resize(grid->n());
        for (int i = 0; i < grid->n(); ++i) c[i] = kS4Area * w[i] * std::pow(r[i], 4);
    }

    // A phi = |S^4| h r^2 (-T)(r^2 phi).
    void apply_A(const std::vector<double>& phi, std::vector<double>& out) const {
        const int n = grid->n();
        const auto& r = grid->nodes();
        std::vector<double> g(n), tg(n);
        for (int i = 0; i < n; ++i) g[i] = phi[i] * r[i] * r[i];
        grid->apply_T(g, tg);
        out.resize(n);
        const double s = kS4Area * grid->h();
        for (int i = 0; i < n; ++i) out[i] = -s * r[i] * r[i] * tg[i];
    }

    double quad_A(const std::vector<double>& phi) const {
        std::vector<double> ap;
        apply_A(phi, ap);
        double acc = 0;
        for (size_t i = 0; i < phi.size(); ++i) acc += phi[i] * ap[i];
        return acc;
    }

    // Factor H = A + mu C (SPD pentadiagonal).
    BandedLUd factor_H(double mu) const {
        const int n = grid->n();
        const auto& r = grid->nodes();
        const double s = kS4Area * grid->h();
        BandedLUd lu(n, 2, 2);
        const auto& d0 = grid->T_diag();
        const double d1 = grid->T_off1(), d2 = grid->T_off2();
        for (int i = 0; i < n; ++i) {
            double ri2 = r[i] * r[i];
            lu.at(i, i) = -s * ri2 * d0[i] * ri2 + mu * c[i];
            if (i + 1 < n) {
                double off = -s * ri2 * d1 * (r[i + 1] * r[i + 1]);
                lu.at(i, i + 1) = off;
                lu.at(i + 1, i) = off;
            }
            if (i + 2 < n) {
                double off = -s * ri2 * d2 * (r[i + 2] * r[i + 2]);
                lu.at(i, i + 2) = off;
                lu.at(i + 2, i) = off;
            }
        }
        lu.factor();
        return lu;
    }

    FieldPair to_pair(const std::vector<double>& phi, const std::vector<double>& psi) const {
        FieldPair p = FieldPair::zero(grid);
        for (int i = 0; i < grid->n(); ++i) {
            p.u[i] = phi[i];
            p.v[i] = psi[i];
        }
        return p;
    }

    double mass(const std::vector<double>& phi, const std::vector<double>& psi) const {
        double acc = 0;
        for (size_t i = 0; i < phi.size(); ++i)
            acc += c[i] * (phi[i] * phi[i] + 2.0 * psi[i] * psi[i]);
        return acc;
    }

    double interaction(const std::vector<double>& phi, const std::vector<double>& psi) const {
        double acc = 0;
        for (size_t i = 0; i < phi.size(); ++i) acc += c[i] * psi[i] * phi[i] * phi[i];
        return acc;
    }

    double kinetic(const std::vector<double>& phi, const std::vector<double>& psi) const {
        return quad_A(phi) + 0.5 * quad_A(psi);
    }

    double action(double omega, const std::vector<double>& phi,
                  const std::vector<double>& psi) const {
        return 0.5 * omega * mass(phi, psi) + 0.5 * kinetic(phi, psi) - interaction(phi, psi);
    }
};

std::vector<double> gaussian_seed(const RadialGrid& grid, double omega, double amplitude) {
    std::vector<double> f(grid.n());
    for (int i = 0; i < grid.n(); ++i) {
        double r = grid.nodes()[i];
        f[i] = amplitude * std::exp(-0.5 * omega * r * r);
    }
    return f;
}

// Nehari re-projection used inside the descent loop. The constraint
// K_w^{20,8} = 8K - 20P = 0 is re-entered by the amplitude map
// (phi, psi) -> a (phi, psi) with a = 2K/(5P): K scales by a^2, P by a^3,
// so the rescaled pair sits on the constraint to machine precision without
// any interpolation (the spline-based (20,8) orbit projection injects
// O(h^2) resampling bias that stalls the descent well above tol_res).
void project_nehari_real(const GridForms& forms, std::vector<double>& phi,
                         std::vector<double>& psi) {
    double K = forms.kinetic(phi, psi);
    double P = forms.interaction(phi, psi);
    if (!(P > 0)) throw NoProjectionError("ground-state projection: P <= 0");
    double a = 2.0 * K / (5.0 * P);
    for (double& x : phi) x *= a;
    for (double& x : psi) x *= a;
}

// Newton polish on the discrete (gNLS) collocation system; interleaved
// (phi_i, psi_i) unknowns give a band Jacobian of width 4. The descent
// output is within O(h^4) of this zero, so two or three steps reach the
// residual floor.
void newton_polish(const GridForms& forms, double omega, std::vector<double>& phi,
                   std::vector<double>& psi, int max_steps = 8) {
    const RadialGrid& g = *forms.grid;
    const int n = g.n();
    const auto& r = g.nodes();
    const double s = kS4Area * g.h();
    const auto& d0 = g.T_diag();
    const double d1 = g.T_off1(), d2 = g.T_off2();
    auto a_band = [&](int i, int j) {
        double ri2 = r[i] * r[i], rj2 = r[j] * r[j];
        if (i == j) return -s * ri2 * d0[i] * ri2;
        if (std::abs(i - j) == 1) return -s * ri2 * d1 * rj2;
        if (std::abs(i - j) == 2) return -s * ri2 * d2 * rj2;
        return 0.0;
    };
    std::vector<double> aphi(n), apsi(n), F(2 * n);
    for (int step = 0; step < max_steps; ++step) {
        forms.apply_A(phi, aphi);
        forms.apply_A(psi, apsi);
        double fmax = 0;
        for (int i = 0; i < n; ++i) {
            F[2 * i] = omega * forms.c[i] * phi[i] + aphi[i] - 2.0 * forms.c[i] * psi[i] * phi[i];
            F[2 * i + 1] = 2.0 * omega * forms.c[i] * psi[i] + 0.5 * apsi[i] -
                           forms.c[i] * phi[i] * phi[i];
            fmax = std::max({fmax, std::abs(F[2 * i] / forms.c[i]),
                             std::abs(F[2 * i + 1] / forms.c[i])});
        }
        if (fmax < 1e-13) return;
        BandedLU<double> jac(2 * n, 4, 4);
        for (int i = 0; i < n; ++i) {
            for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j) {
                double aij = a_band(i, j);
                if (i == j) {
                    jac.at(2 * i, 2 * j) = omega * forms.c[i] + aij - 2.0 * forms.c[i] * psi[i];
                    jac.at(2 * i + 1, 2 * j + 1) = 2.0 * omega * forms.c[i] + 0.5 * aij;
                } else {
                    jac.at(2 * i, 2 * j) = aij;
                    jac.at(2 * i + 1, 2 * j + 1) = 0.5 * aij;
                }
            }
            jac.at(2 * i, 2 * i + 1) = -2.0 * forms.c[i] * phi[i];
            jac.at(2 * i + 1, 2 * i) = -2.0 * forms.c[i] * phi[i];
        }
        jac.factor();
        jac.solve(F);
        for (int i = 0; i < n; ++i) {
            phi[i] -= F[2 * i];
            psi[i] -= F[2 * i + 1];
        }
    }
}

double collocation_residual(const GridForms& forms, double omega, const std::vector<double>& phi,
                            const std::vector<double>& psi) {
    const int n = forms.grid->n();
    std::vector<double> aphi, apsi;
    forms.apply_A(phi, aphi);
    forms.apply_A(psi, apsi);
    double sup = 0;
    for (int i = 0; i < n; ++i) sup = std::max({sup, std::abs(phi[i]), std::abs(psi[i])});
    if (sup == 0) return 0;
    double res = 0;
    for (int i = 0; i < n; ++i) {
        double g1 = omega * forms.c[i] * phi[i] + aphi[i] - 2.0 * forms.c[i] * psi[i] * phi[i];
        double g2 = 2.0 * omega * forms.c[i] * psi[i] + 0.5 * apsi[i] - forms.c[i] * phi[i] * phi[i];
        res = std::max({res, std::abs(g1 / forms.c[i]), std::abs(g2 / forms.c[i])});
    }
    return res / sup;
}

GroundState finish_grid_solve(const GridForms& forms, double omega,
                              const std::vector<double>& phi, const std::vector<double>& psi,
                              SolveMethod method, int iterations) {
    GroundState gs;
    gs.omega = omega;
    gs.pair = forms.to_pair(phi, psi);
    gs.report = evaluate(gs.pair, omega);
    gs.method = method;
    gs.iterations = iterations;
    gs.residual = collocation_residual(forms, omega, phi, psi);
    return gs;
}

} // namespace

// ---------------------------------------------------------------------------
// Gradient flow
// ---------------------------------------------------------------------------

GroundState solve_ground_state(double omega, std::shared_ptr<const RadialGrid> grid,
                               const SolverConfig& config) {
    if (!(omega > 0)) throw ConfigError("solve_ground_state: omega must be positive");
    double scale = 1.0 / std::sqrt(omega);
    if (grid->h() > scale / 20.0)
        throw ConfigError("solve_ground_state: grid does not resolve omega^{-1/2} "
                          "(need >= 20 nodes per unit length scale)");
    GridForms forms(grid);
    double amp = config.seed_amplitude > 0 ? config.seed_amplitude : 2.0 * omega;
    std::vector<double> phi = gaussian_seed(*grid, omega, amp);
    std::vector<double> psi = phi;
    project_nehari_real(forms, phi, psi);

    BandedLUd h_phi = forms.factor_H(omega);
    BandedLUd h_psi = forms.factor_H(4.0 * omega); // (1/2)A + 2wC = (1/2)(A + 4wC)

    double I_cur = forms.action(omega, phi, psi);
    double step = config.step0;
    int stalled = 0;
    double res = collocation_residual(forms, omega, phi, psi);

    const int n = grid->n();
    std::vector<double> gphi(n), gpsi(n), aphi(n), apsi(n), tphi(n), tpsi(n);
    int iter = 0;
    for (; iter < config.max_iters; ++iter) {
        if (forms.mass(phi, psi) < 1e-10)
            throw SolverError("solve_ground_state: seed collapsed to zero");
        forms.apply_A(phi, aphi);
        forms.apply_A(psi, apsi);
        for (int i = 0; i < n; ++i) {
            gphi[i] = omega * forms.c[i] * phi[i] + aphi[i] - 2.0 * forms.c[i] * psi[i] * phi[i];
            gpsi[i] = 2.0 * omega * forms.c[i] * psi[i] + 0.5 * apsi[i] -
                      forms.c[i] * phi[i] * phi[i];
        }
        std::vector<double> dphi = gphi, dpsi = gpsi;
        h_phi.solve(dphi);
        for (double& x : dpsi) x *= 2.0; // ((1/2)(A + 4wC))^{-1} = 2 (A + 4wC)^{-1}
        h_psi.solve(dpsi);

        bool accepted = false;
        double I_trial = I_cur;
        for (int back = 0; back < 40; ++back) {
            for (int i = 0; i < n; ++i) {
                tphi[i] = phi[i] - step * dphi[i];
                tpsi[i] = psi[i] - step * dpsi[i];
            }
            try {
                project_nehari_real(forms, tphi, tpsi);
            } catch (const NoProjectionError&) {
                step *= 0.5;
                continue;
            }
            I_trial = forms.action(omega, tphi, tpsi);
            // Allow a noise-floor worth of increase: near the plateau the
            // genuine descent sits below the evaluation noise.
            if (I_trial <= I_cur + 1e-12 * std::abs(I_cur)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            throw ConvergenceError("solve_ground_state: backtracking exhausted", res);
        double rel_drop = (I_cur - I_trial) / std::max(std::abs(I_trial), 1e-300);
        phi.swap(tphi);
        psi.swap(tpsi);
        I_cur = I_trial;
        step = std::min(step * 1.5, 1.0);
        stalled = rel_drop < config.tol_action ? stalled + 1 : 0;
        if (stalled >= config.action_patience) break; // descent exhausted
    }
    // The projected descent parks within O(h^4) of the discrete (gNLS)
    // solution but its residual floor is the constraint-manifold Lagrange
    // gap; a short Newton polish on the collocation system removes it.
    newton_polish(forms, omega, phi, psi);
    res = collocation_residual(forms, omega, phi, psi);
    if (res > config.tol_res)
        throw ConvergenceError("solve_ground_state: no convergence within max_iters", res);
    return finish_grid_solve(forms, omega, phi, psi, SolveMethod::gradient_flow, iter);
}

// ---------------------------------------------------------------------------
// Petviashvili
// ---------------------------------------------------------------------------

GroundState solve_petviashvili(double omega, std::shared_ptr<const RadialGrid> grid,
                               const SolverConfig& config) {
    if (!(omega > 0)) throw ConfigError("solve_petviashvili: omega must be positive");
    GridForms forms(grid);
    double amp = config.seed_amplitude > 0 ? config.seed_amplitude : 2.0 * omega;
    std::vector<double> phi = gaussian_seed(*grid, omega, amp);
    std::vector<double> psi = phi;

    BandedLUd h_phi = forms.factor_H(omega);
    BandedLUd h_psi = forms.factor_H(4.0 * omega);

    const int n = grid->n();
    const double th = config.relax;
    std::vector<double> rhs1(n), rhs2(n);
    int iter = 0;
    double change = 1.0;
    for (; iter < config.max_iters; ++iter) {
        double lin = omega * forms.mass(phi, psi) + forms.kinetic(phi, psi); // K_w
        double nl = 3.0 * forms.interaction(phi, psi);
        if (!(nl > 0) || !std::isfinite(lin))
            throw SolverError("solve_petviashvili: degenerate iterate");
        double gamma = lin / nl;
        if (!(gamma > 0.2 && gamma < 5.0) || !std::isfinite(gamma))
            throw SolverError("solve_petviashvili: stabilizing factor drifted to " +
                              std::to_string(gamma));
        double g2 = gamma * gamma;
        for (int i = 0; i < n; ++i) {
            rhs1[i] = 2.0 * forms.c[i] * psi[i] * phi[i];
            rhs2[i] = 2.0 * forms.c[i] * phi[i] * phi[i]; // (1/2)^{-1} folded in
        }
        h_phi.solve(rhs1);
        h_psi.solve(rhs2);
        double num = 0, den = 0;
        for (int i = 0; i < n; ++i) {
            double nphi = (1.0 - th) * phi[i] + th * g2 * rhs1[i];
            double npsi = (1.0 - th) * psi[i] + th * g2 * rhs2[i];
            num += forms.c[i] * ((nphi - phi[i]) * (nphi - phi[i]) +
                                 (npsi - psi[i]) * (npsi - psi[i]));
            den += forms.c[i] * (nphi * nphi + npsi * npsi);
            phi[i] = nphi;
            psi[i] = npsi;
        }
        change = std::sqrt(num / std::max(den, 1e-300));
        if (change < 1e-11) break;
    }
    if (change >= 1e-11)
        throw ConvergenceError("solve_petviashvili: no fixed point within max_iters", change);
    // The weighted-change stop is blind to a slowly contracting first-node
    // mode (its quadrature weight is ~r^4); polish it out. The collocation
    // zero is exactly the gamma = 1 fixed point of the iteration.
    newton_polish(forms, omega, phi, psi);
    return finish_grid_solve(forms, omega, phi, psi, SolveMethod::petviashvili, iter);
}

// ---------------------------------------------------------------------------
// Shooting
// ---------------------------------------------------------------------------

namespace {

struct OdeTrajectory {
    std::vector<double> r, phi, psi, dphi, dpsi;
    int first_fail = -1;   // step index of the first failure event
    int fail_code = 0;     // 1 phi under, 2 phi over, 3 psi under, 4 psi over
    double fail_r = 0;
    bool entered = false;  // reached the decay corridor max(phi, 2 psi) < 0.5 w
    // Smallest max(phi, 2 psi) before failure: the measure of how deep the
    // trajectory dives toward the origin.
    double min_depth = std::numeric_limits<double>::infinity();
};

// RK4 on phi'' = -(4/r) phi' + w phi - 2 psi phi, psi'' = -(4/r) psi' + 4w psi - 2 phi^2.
OdeTrajectory integrate_ode(double omega, double a, double b, double r_end, double h,
                            double bound, bool record) {
    OdeTrajectory tr;
    auto deriv = [omega](double r, const std::array<double, 4>& y) {
        std::array<double, 4> d;
        d[0] = y[1];
        d[1] = -(4.0 / r) * y[1] + omega * y[0] - 2.0 * y[2] * y[0];
        d[2] = y[3];
        d[3] = -(4.0 / r) * y[3] + 4.0 * omega * y[2] - 2.0 * y[0] * y[0];
        return d;
    };
    double r0 = h;
    double phi2 = a * (omega - 2.0 * b) / 5.0;
    double psi2 = (4.0 * omega * b - 2.0 * a * a) / 5.0;
    std::array<double, 4> y{a + 0.5 * phi2 * r0 * r0, phi2 * r0, b + 0.5 * psi2 * r0 * r0,
                            psi2 * r0};
    double r = r0;
    int step = 0;
    const int nsteps = static_cast<int>(std::ceil((r_end - r0) / h));
    if (record) {
        size_t cap = static_cast<size_t>(nsteps) + 2;
        tr.r.reserve(cap);
        tr.phi.reserve(cap);
        tr.psi.reserve(cap);
        tr.dphi.reserve(cap);
        tr.dpsi.reserve(cap);
    }
    auto push = [&](double rr, const std::array<double, 4>& yy) {
        if (!record) return;
        tr.r.push_back(rr);
        tr.phi.push_back(yy[0]);
        tr.psi.push_back(yy[2]);
        tr.dphi.push_back(yy[1]);
        tr.dpsi.push_back(yy[3]);
    };
    push(r, y);
    // The far field has a spurious constant solution (phi, psi) = (w, w/2);
    // trajectories can hover near it and fake long survival. Survival only
    // counts once the state enters the decay corridor below that plateau,
    // and regrowth inside the corridor is a failure event.
    const double corridor = 0.5 * omega;
    const double regrow = 0.6 * omega;
    for (; step < nsteps; ++step) {
        auto k1 = deriv(r, y);
        std::array<double, 4> y2, y3, y4;
        for (int j = 0; j < 4; ++j) y2[j] = y[j] + 0.5 * h * k1[j];
        auto k2 = deriv(r + 0.5 * h, y2);
        for (int j = 0; j < 4; ++j) y3[j] = y[j] + 0.5 * h * k2[j];
        auto k3 = deriv(r + 0.5 * h, y3);
        for (int j = 0; j < 4; ++j) y4[j] = y[j] + h * k3[j];
        auto k4 = deriv(r + h, y4);
        for (int j = 0; j < 4; ++j)
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        r += h;
        push(r, y);
        if (!tr.entered && std::max(y[0], 2.0 * y[2]) < corridor) tr.entered = true;
        int code = 0;
        if (y[0] < 0) code = 1;
        else if (y[0] > (tr.entered ? regrow : bound)) code = 2;
        else if (y[2] < 0) code = 3;
        else if (2.0 * y[2] > (tr.entered ? regrow : 2.0 * bound)) code = 4;
        if (code != 0) {
            tr.first_fail = step + 1;
            tr.fail_code = code;
            tr.fail_r = r;
            break;
        }
        tr.min_depth = std::min(tr.min_depth, std::max(y[0], 2.0 * y[2]));
    }
    return tr;
}

// Failure classification for the inner bisection. Near the solution curve
// the relevant failure modes are zero crossings and corridor regrowth; the
// sign separates "phi-channel undershoots" (a too small) from "psi-channel
// fails" (a too large). Returns the corridor-gated survival radius through
// `survival`: plateau-hovering trajectories that never dip below the
// far-field constant solution (w, w/2) score zero.
int fail_sign_in_a(double omega, double a, double b, double r_end, double h, double* depth) {
    double bound = 2.2 * std::max(a, b);
    OdeTrajectory tr = integrate_ode(omega, a, b, r_end, h, bound, false);
    if (depth) *depth = tr.min_depth;
    if (tr.first_fail < 0) return 0; // clean decay to r_end
    switch (tr.fail_code) {
        case 1: return -1;
        case 2: return -1;
        case 3: return +1;
        case 4: return +1;
        default: return 0;
    }
}

// Bisect a at fixed b onto the transition curve a*(b); reports the threaded
// trajectory's dive depth (evaluated at the pinned-down midpoint).
std::optional<double> bisect_a(double omega, double b, double a_lo, double a_hi, double r_end,
                               double h, double* depth) {
    int slo = fail_sign_in_a(omega, a_lo, b, r_end, h, nullptr);
    int shi = fail_sign_in_a(omega, a_hi, b, r_end, h, nullptr);
    int expand = 0;
    while (slo * shi >= 0 && expand < 16) {
        double w = a_hi - a_lo;
        a_lo = std::max(1e-9, a_lo - 0.5 * w);
        a_hi += 0.5 * w;
        slo = fail_sign_in_a(omega, a_lo, b, r_end, h, nullptr);
        shi = fail_sign_in_a(omega, a_hi, b, r_end, h, nullptr);
        ++expand;
    }
    if (slo >= 0 || shi <= 0) return std::nullopt;
    double mid = a_lo;
    for (int it = 0; it < 90; ++it) {
        mid = 0.5 * (a_lo + a_hi);
        if (mid == a_lo || mid == a_hi) break; // double precision exhausted
        int sm = fail_sign_in_a(omega, mid, b, r_end, h, nullptr);
        if (sm == 0) break;
        if (sm < 0)
            a_lo = mid;
        else
            a_hi = mid;
    }
    fail_sign_in_a(omega, mid, b, r_end, h, depth);
    return mid;
}

// Growing-mode projections at the matching radius: both vanish on the
// connection to the origin. The parameter sensitivity of the projections
// grows like e^{2 sqrt(w) r_m} while their asymptotic-form bias is only
// O(1/r_m^2) relative, so Newton on (G1, G2) with a staged r_m resolves
// (phi(0), psi(0)) essentially to machine precision.
struct MatchState {
    std::array<double, 4> y{};    // (phi, phi', psi, psi')
    std::array<double, 4> ta{};   // d y / d phi(0)
    std::array<double, 4> tb{};   // d y / d psi(0)
    bool finite = true;
};

// Integrates the state together with the two tangent (variational) vectors,
// so the matching Jacobian is exact; finite differences are useless here
// because the tangent growth e^{2 sqrt(w) r} leaves any fixed bump size
// either outside the linear regime or under the roundoff floor.
MatchState integrate_with_tangents(double omega, double a, double b, double r_m, double h) {
    auto deriv = [omega](double r, const std::array<double, 12>& z) {
        std::array<double, 12> d;
        const double* y = z.data();
        d[0] = y[1];
        d[1] = -(4.0 / r) * y[1] + omega * y[0] - 2.0 * y[2] * y[0];
        d[2] = y[3];
        d[3] = -(4.0 / r) * y[3] + 4.0 * omega * y[2] - 2.0 * y[0] * y[0];
        // Tangent blocks share the linearized RHS:
        //   d(dphi)  = dphi'
        //   d(dphi') = -(4/r) dphi' + (w - 2 psi) dphi - 2 phi dpsi
        //   d(dpsi)  = dpsi'
        //   d(dpsi') = -(4/r) dpsi' + 4 w dpsi - 4 phi dphi
        for (int t = 0; t < 2; ++t) {
            const double* v = z.data() + 4 + 4 * t;
            double* dv = d.data() + 4 + 4 * t;
            dv[0] = v[1];
            dv[1] = -(4.0 / r) * v[1] + (omega - 2.0 * y[2]) * v[0] - 2.0 * y[0] * v[2];
            dv[2] = v[3];
            dv[3] = -(4.0 / r) * v[3] + 4.0 * omega * v[2] - 4.0 * y[0] * v[0];
        }
        return d;
    };
    const double r0 = h;
    const double phi2 = a * (omega - 2.0 * b) / 5.0;
    const double psi2 = (4.0 * omega * b - 2.0 * a * a) / 5.0;
    std::array<double, 12> z{};
    z[0] = a + 0.5 * phi2 * r0 * r0;
    z[1] = phi2 * r0;
    z[2] = b + 0.5 * psi2 * r0 * r0;
    z[3] = psi2 * r0;
    // d phi2/da = (w - 2b)/5, d phi2/db = -2a/5,
    // d psi2/da = -4a/5,      d psi2/db = 4w/5.
    z[4] = 1.0 + 0.5 * (omega - 2.0 * b) / 5.0 * r0 * r0;
    z[5] = (omega - 2.0 * b) / 5.0 * r0;
    z[6] = 0.5 * (-4.0 * a / 5.0) * r0 * r0;
    z[7] = (-4.0 * a / 5.0) * r0;
    z[8] = 0.5 * (-2.0 * a / 5.0) * r0 * r0;
    z[9] = (-2.0 * a / 5.0) * r0;
    z[10] = 1.0 + 0.5 * (4.0 * omega / 5.0) * r0 * r0;
    z[11] = (4.0 * omega / 5.0) * r0;

    MatchState st;
    double r = r0;
    const int nsteps = static_cast<int>(std::ceil((r_m - r0) / h));
    for (int sstep = 0; sstep < nsteps; ++sstep) {
        auto k1 = deriv(r, z);
        std::array<double, 12> z2, z3, z4;
        for (int j = 0; j < 12; ++j) z2[j] = z[j] + 0.5 * h * k1[j];
        auto k2 = deriv(r + 0.5 * h, z2);
        for (int j = 0; j < 12; ++j) z3[j] = z[j] + 0.5 * h * k2[j];
        auto k3 = deriv(r + 0.5 * h, z3);
        for (int j = 0; j < 12; ++j) z4[j] = z[j] + h * k3[j];
        auto k4 = deriv(r + h, z4);
        for (int j = 0; j < 12; ++j)
            z[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        r += h;
        if (std::abs(z[0]) > 1e8 || std::abs(z[2]) > 1e8) {
            st.finite = false;
            return st;
        }
    }
    std::copy(z.begin(), z.begin() + 4, st.y.begin());
    std::copy(z.begin() + 4, z.begin() + 8, st.ta.begin());
    std::copy(z.begin() + 8, z.end(), st.tb.begin());
    return st;
}

// Damped Newton on the growing-mode matching defect
//   G1 = phi' + (sqrt(w) + 2/r) phi,  G2 = psi' + (2 sqrt(w) + 2/r) psi
// with the exact variational Jacobian.
bool newton_match(double omega, double& a, double& b, double r_m, double h, int max_steps) {
    const double sw = std::sqrt(omega);
    auto defect_state = [&](const MatchState& st) -> std::array<double, 2> {
        return {st.y[1] + (sw + 2.0 / r_m) * st.y[0],
                st.y[3] + (2.0 * sw + 2.0 / r_m) * st.y[2]};
    };
    for (int it = 0; it < max_steps; ++it) {
        MatchState st = integrate_with_tangents(omega, a, b, r_m, h);
        if (!st.finite) return false;
        auto g = defect_state(st);
        double gn = std::hypot(g[0], g[1]);
        double j00 = st.ta[1] + (sw + 2.0 / r_m) * st.ta[0];
        double j01 = st.tb[1] + (sw + 2.0 / r_m) * st.tb[0];
        double j10 = st.ta[3] + (2.0 * sw + 2.0 / r_m) * st.ta[2];
        double j11 = st.tb[3] + (2.0 * sw + 2.0 / r_m) * st.tb[2];
        double det = j00 * j11 - j01 * j10;
        if (det == 0 || !std::isfinite(det)) return false;
        double da = (g[0] * j11 - g[1] * j01) / det;
        double db = (j00 * g[1] - j10 * g[0]) / det;
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls) {
            MatchState ts = integrate_with_tangents(omega, a - step * da, b - step * db, r_m, h);
            if (ts.finite) {
                auto gt = defect_state(ts);
                if (std::hypot(gt[0], gt[1]) < gn) {
                    a -= step * da;
                    b -= step * db;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!moved) return it > 0; // at the noise floor
        if (std::abs(da) * step <= 4e-16 * (1.0 + std::abs(a)) &&
            std::abs(db) * step <= 4e-16 * (1.0 + std::abs(b)))
            return true;
    }
    return true;
}

double simpson_weight(int i, int n) {
    if (i == 0 || i == n) return 1.0 / 3.0;
    return (i % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0;
}

} // namespace

GroundState solve_shooting(double omega, const OdeConfig& config,
                           std::shared_ptr<const RadialGrid> grid) {
    if (!(omega > 0)) throw ConfigError("solve_shooting: omega must be positive");
    const double h = config.r_step;
    // The psi-channel's unstable mode grows like e^{2 sqrt(w) r}, so double
    // precision in (phi(0), psi(0)) sustains a clean profile to roughly
    // 16 / sqrt(w); beyond the clip radius both components are < 1e-8 sup.
    const double r_end = config.r_end > 0 ? config.r_end : 16.0 / std::sqrt(omega);

    // Seeding: bisect phi(0) onto the failure-transition curve a*(b) for a
    // ladder of psi(0) values and keep the (a, b) whose threaded trajectory
    // dives deepest toward the origin. Plateau-hovering families stall at
    // O(w) depth, while profiles near the ground state plunge orders of magnitude
    // deeper, so the seed lands in the Newton basin of the matching map.
    double b_seed = 0, a_seed = 0;
    double best_depth = std::numeric_limits<double>::infinity();
    for (int tries = 0; tries < 2 && !(best_depth < 0.2 * omega); ++tries) {
        int nb = tries == 0 ? 64 : 256;
        double lo = std::max(1e-3, config.bracket_lo * omega);
        double hi = config.bracket_hi * omega;
        double spacing = (hi - lo) / nb;
        for (int ib = 0; ib < nb; ++ib) {
            double b = lo + (ib + 0.5) * spacing;
            double depth = 0;
            auto a = bisect_a(omega, b, std::max(1e-9, b - 4.0 * omega), b + 6.0 * omega, r_end,
                              4.0 * h, &depth);
            if (a && depth < best_depth) {
                best_depth = depth;
                b_seed = b;
                a_seed = *a;
            }
        }
    }
    if (!(best_depth < 0.2 * omega))
        throw SolverError("solve_shooting: no sign-change bracketing found (no trajectory "
                          "approaches the origin in the search box)");

    // Staged Newton on the growing-mode matching defect.
    double a = a_seed, b = b_seed;
    int sweeps = 0;
    for (double stage : {3.0, 4.0, 6.0, 8.0, 10.0, 12.0}) {
        double r_m = std::min(stage / std::sqrt(omega), r_end - 1.0);
        if (!newton_match(omega, a, b, r_m, h, 30))
            throw SolverError("solve_shooting: matching Newton failed at r_m = " +
                              std::to_string(r_m));
        ++sweeps;
    }

    // Final trajectory assembly. The psi-channel's relative contamination
    // grows like e^{4 sqrt(w) r} and the phi-channel's like e^{2 sqrt(w) r},
    // so each channel is continued analytically from its own graft radius.
    // The psi tail needs two terms: the homogeneous decay e^{-2sr}(1+1/(2sr))/r^2
    // plus the resonantly forced response to phi^2 (the forcing decays at
    // exactly the homogeneous rate ... the mass-resonance structure),
    // psi_p = -A^2 e^{-2sr}/(2s r^3) with A the phi tail amplitude. phi is
    // integrated onward against the modeled psi and grafted at rg_phi; the
    // reported residual is phi's log-derivative mismatch there.
    const double sw = std::sqrt(omega);
    const double rg_psi = 5.0 / sw;
    const double rg_phi = 8.2 / sw;
    auto dlog_phi = [&](double r) { return -sw - 2.0 / r - 1.0 / (r * (sw * r + 1.0)); };
    auto hom_psi = [&](double r) {
        return std::exp(-2.0 * sw * r) * (1.0 + 1.0 / (2.0 * sw * r)) / (r * r);
    };
    auto hom_phi = [&](double r) {
        return std::exp(-sw * r) * (1.0 + 1.0 / (sw * r)) / (r * r);
    };
    OdeTrajectory tr = integrate_ode(omega, a, b, rg_psi, h, 2.2 * std::max(a, b), true);
    if (tr.first_fail >= 0)
        throw SolverError("solve_shooting: matched trajectory lost before the psi graft");
    // Tail model coefficients from the state at rg_psi.
    const double r_gp = tr.r.back();
    const double A_phi = tr.phi.back() / hom_phi(r_gp);
    auto part_psi = [&](double r) {
        return -A_phi * A_phi * std::exp(-2.0 * sw * r) / (2.0 * sw * r * r * r);
    };
    auto dpart_psi = [&](double r) { return part_psi(r) * (-2.0 * sw - 3.0 / r); };
    const double C_psi = (tr.psi.back() - part_psi(r_gp)) / hom_psi(r_gp);
    auto model_psi = [&](double r) { return C_psi * hom_psi(r) + part_psi(r); };
    auto dmodel_psi = [&](double r) {
        double dh = hom_psi(r) * (-2.0 * sw - 2.0 / r - 1.0 / (r * (2.0 * sw * r + 1.0)));
        return C_psi * dh + dpart_psi(r);
    };
    double mis_psi = std::abs(tr.dpsi.back() - dmodel_psi(r_gp)) /
                     (2.0 * sw * std::abs(tr.psi.back()) + 1e-300);
    // Continue phi against the modeled psi up to its own graft radius.
    {
        auto deriv2 = [&](double r, const std::array<double, 2>& y) {
            return std::array<double, 2>{
                y[1], -(4.0 / r) * y[1] + omega * y[0] - 2.0 * model_psi(r) * y[0]};
        };
        std::array<double, 2> y{tr.phi.back(), tr.dphi.back()};
        double r = r_gp;
        while (r < rg_phi - 0.5 * h) {
            auto k1 = deriv2(r, y);
            std::array<double, 2> y2{y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]};
            auto k2 = deriv2(r + 0.5 * h, y2);
            std::array<double, 2> y3{y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]};
            auto k3 = deriv2(r + 0.5 * h, y3);
            std::array<double, 2> y4{y[0] + h * k3[0], y[1] + h * k3[1]};
            auto k4 = deriv2(r + h, y4);
            y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            r += h;
            tr.r.push_back(r);
            tr.phi.push_back(y[0]);
            tr.dphi.push_back(y[1]);
            tr.psi.push_back(model_psi(r));
            tr.dpsi.push_back(dmodel_psi(r));
        }
    }
    const double r_gf = tr.r.back();
    double mis_phi = std::abs(tr.dphi.back() - tr.phi.back() * dlog_phi(r_gf)) /
                     (sw * std::abs(tr.phi.back()) + 1e-300);
    // Analytic tails out to r_end for the quadratures.
    {
        const double A2 = tr.phi.back() / hom_phi(r_gf);
        double r = r_gf;
        while (r < r_end - 0.5 * h) {
            r += h;
            tr.r.push_back(r);
            tr.phi.push_back(A2 * hom_phi(r));
            tr.dphi.push_back(tr.phi.back() * dlog_phi(r));
            tr.psi.push_back(model_psi(r));
            tr.dpsi.push_back(dmodel_psi(r));
        }
    }

    GroundState gs;
    gs.omega = omega;
    gs.method = SolveMethod::shooting;
    gs.iterations = sweeps;
    gs.residual = mis_phi;
    (void)mis_psi; // construction diagnostic; the psi tail is resonantly forced

    // Functionals on the fine ODE grid (Simpson), fully independent of the
    // RadialGrid quadrature.
    {
        size_t n = tr.r.size() - 1;
        if (n % 2 == 1) --n;
        double M = 0, K = 0, P = 0;
        for (size_t i = 0; i <= n; ++i) {
            double wq = simpson_weight(static_cast<int>(i), static_cast<int>(n)) * h;
            double r4 = std::pow(tr.r[i], 4);
            M += wq * (tr.phi[i] * tr.phi[i] + 2.0 * tr.psi[i] * tr.psi[i]) * r4;
            K += wq * (tr.dphi[i] * tr.dphi[i] + 0.5 * tr.dpsi[i] * tr.dpsi[i]) * r4;
            P += wq * (tr.psi[i] * tr.phi[i] * tr.phi[i]) * r4;
        }
        M *= kS4Area;
        K *= kS4Area;
        P *= kS4Area;
        FunctionalReport rep;
        rep.omega = omega;
        rep.mass = M;
        rep.kinetic = K;
        rep.interaction = P;
        rep.energy = K - 2.0 * P;
        rep.k_omega = K + omega * M;
        rep.l_omega = 0.5 * omega * M + 0.1 * K;
        rep.i_omega = 0.5 * omega * M + 0.5 * rep.energy;
        rep.k_20_8 = 8.0 * K - 20.0 * P;
        gs.report = rep;
    }

    // Resample onto the requested grid; the assembled trajectory reaches
    // r_end and the analytic tails extend it beyond.
    {
        std::vector<double> xr(tr.r.begin(), tr.r.end());
        std::vector<double> yphi(tr.phi.begin(), tr.phi.end());
        std::vector<double> ypsi(tr.psi.begin(), tr.psi.end());
        xr.insert(xr.begin(), 0.0);
        yphi.insert(yphi.begin(), a);
        ypsi.insert(ypsi.begin(), b);
        CubicSplineD sphi(xr, yphi), spsi(xr, ypsi);
        const double rb = xr.back();
        const double A2 = tr.phi.back() / hom_phi(rb);
        gs.pair = FieldPair::zero(grid);
        for (int i = 0; i < grid->n(); ++i) {
            double r = grid->nodes()[i];
            gs.pair.u[i] = r <= rb ? sphi(r) : A2 * hom_phi(r);
            gs.pair.v[i] = r <= rb ? spsi(r) : model_psi(r);
        }
    }
    return gs;
}

// ---------------------------------------------------------------------------
// Verification, thresholds, cache
// ---------------------------------------------------------------------------

void GroundState::verify() const {
    auto fail = [](const std::string& what) { throw VerificationError("ground state: " + what); };
    const auto& u = pair.u;
    const auto& v = pair.v;
    double sup = 0;
    for (size_t i = 0; i < u.size(); ++i)
        sup = std::max({sup, std::abs(u[i].real()), std::abs(v[i].real())});
    if (sup == 0) fail("zero state");
    for (size_t i = 0; i < u.size(); ++i) {
        if (std::abs(u[i].imag()) > 1e-12 * sup || std::abs(v[i].imag()) > 1e-12 * sup)
            fail("nonreal component");
        if (u[i].real() < -1e-8 * sup || v[i].real() < -1e-8 * sup) fail("negative component");
    }
    for (size_t i = 0; i + 1 < u.size(); ++i) {
        if (u[i + 1].real() > u[i].real() + 1e-8 * sup ||
            v[i + 1].real() > v[i].real() + 1e-8 * sup)
            fail("profile not radially nonincreasing");
    }
    double M = report.mass, K = report.kinetic, P = report.interaction, I = report.i_omega;
    if (std::abs(2.0 * K - 5.0 * P) > 1e-6 * K) fail("Pohozaev 2K = 5P violated");
    if (std::abs(2.0 * omega * M - P) > 1e-6 * P) fail("Pohozaev 2wM = P violated");
    if (std::abs(I - omega * M) > 1e-6 * omega * M) fail("action identity I_w = wM violated");
    // The grid solvers certify the collocation residual to 1e-7. The
    // shooting oracle's pointwise defect is amplified by e^{2 sqrt(w) dr}
    // roundoff transport along the forward integration, so its decay-matching
    // defect carries a method-appropriate 1e-4 gate (its parameters and
    // functionals are far more accurate, as the cross-solver check shows).
    double res_gate = method == SolveMethod::shooting ? 1e-4 : 1e-7;
    if (residual > res_gate) fail("residual above the method gate");
}

json GroundState::meta_json() const {
    json j;
    j["omega"] = omega;
    j["method"] = method_name(method);
    j["residual"] = residual;
    j["iterations"] = iterations;
    j["report"] = report.to_json();
    return j;
}

ThresholdSet thresholds_from_ground_state(const GroundState& gs1) {
    if (std::abs(gs1.omega - 1.0) > 1e-12)
        throw ConfigError("thresholds_from_ground_state: needs the omega = 1 ground state");
    gs1.verify();
    double M = gs1.report.mass, E = gs1.report.energy, K = gs1.report.kinetic,
           P = gs1.report.interaction;
    ThresholdSet t;
    t.ground_mass = M;
    t.me_threshold = M * E;
    t.mk_threshold = M * K;
    t.c_gn = P / (std::pow(M, 0.25) * std::pow(K, 1.25));
    return t;
}

std::filesystem::path default_cache_root() {
    if (const char* env = std::getenv("RNLS_CACHE")) return std::filesystem::path(env);
    return std::filesystem::path("rnls_cache");
}

std::shared_ptr<RadialGrid> default_ground_state_grid(double omega) {
    if (!(omega > 0)) throw ConfigError("default_ground_state_grid: omega must be positive");
    return std::make_shared<RadialGrid>(8192, 50.0 / std::sqrt(omega));
}

GroundStateCache::GroundStateCache(std::filesystem::path root)
    : root_(root.empty() ? default_cache_root() : std::move(root)) {}

static std::string format_double(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

std::filesystem::path GroundStateCache::entry_dir(double omega, const RadialGrid& grid,
                                                  SolveMethod method,
                                                  const SolverConfig& config) const {
    std::filesystem::path p = root_ / "gs" / ("omega=" + format_double(omega)) /
                              ("n=" + std::to_string(grid.n())) /
                              ("rmax=" + format_double(grid.r_max())) /
                              (std::string(method_name(method)) + "-res" +
                               format_double(config.tol_res) + "-act" +
                               format_double(config.tol_action));
    return p;
}

GroundState GroundStateCache::get_or_solve(double omega, std::shared_ptr<const RadialGrid> grid,
                                           SolveMethod method, const SolverConfig& config) {
    namespace fs = std::filesystem;
    fs::path dir = entry_dir(omega, *grid, method, config);
    fs::path field_path = dir / "field.bin";
    fs::path meta_path = dir / "meta.json";
    if (fs::exists(field_path) && fs::exists(meta_path)) {
        GroundState gs;
        gs.pair = load_field_pair(field_path);
        std::ifstream in(meta_path);
        json meta = json::parse(in);
        gs.omega = meta.at("omega").get<double>();
        gs.residual = meta.at("residual").get<double>();
        gs.iterations = meta.at("iterations").get<int>();
        gs.method = method;
        if (method == SolveMethod::shooting) {
            // The stored report is the independent ODE-grid evaluation.
            const json& r = meta.at("report");
            gs.report.omega = r.at("omega").get<double>();
            gs.report.mass = r.at("mass").get<double>();
            gs.report.energy = r.at("energy").get<double>();
            gs.report.kinetic = r.at("kinetic").get<double>();
            gs.report.interaction = r.at("interaction").get<double>();
            gs.report.k_omega = r.at("k_omega").get<double>();
            gs.report.l_omega = r.at("l_omega").get<double>();
            gs.report.i_omega = r.at("i_omega").get<double>();
            gs.report.k_20_8 = r.at("k_20_8").get<double>();
        } else {
            gs.report = evaluate(gs.pair, omega);
        }
        gs.verify(); // cache hits re-verify before use
        return gs;
    }
    GroundState gs;
    switch (method) {
        case SolveMethod::gradient_flow: gs = solve_ground_state(omega, grid, config); break;
        case SolveMethod::petviashvili: gs = solve_petviashvili(omega, grid, config); break;
        case SolveMethod::shooting: gs = solve_shooting(omega, OdeConfig{}, grid); break;
    }
    gs.verify();
    fs::create_directories(dir);
    fs::path tmp_field = dir / "field.bin.tmp";
    fs::path tmp_meta = dir / "meta.json.tmp";
    save_field_pair(gs.pair, tmp_field);
    {
        std::ofstream out(tmp_meta);
        out << gs.meta_json().dump(2) << "\n";
    }
    fs::rename(tmp_field, field_path); // atomic publish of a verified entry
    fs::rename(tmp_meta, meta_path);
    return gs;
}

} // namespace rnls
