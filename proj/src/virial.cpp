#include "rnls/virial.hpp"

#include <algorithm>
#include <cmath>

namespace rnls {

// ---------------------------------------------------------------------------
// Shoulder construction.
//
// On the unit scale the shoulder lives on s in [1,3], parametrized by
// sigma = (s-1)/2 in [0,1]. chi'' is the polynomial
//     w(sigma) = 2 - 2 S - b [4S(1-S)]^2 - c (1-sigma) [4S(1-S)]^2
// with S the quintic smoothstep; b, c are fixed by the two moment conditions
// chi'(3) = 0 and chi(3) = 0 (exact polynomial integrals). chi'' starts at 2,
// ends at 0, and stays <= 2 (verified in the constructor); chi and chi' come
// from analytic antiderivatives, so the junction values are exact.
// ---------------------------------------------------------------------------

namespace {

using Poly = std::vector<double>; // coefficients, ascending powers

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly c(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

Poly poly_axpy(Poly a, double s, const Poly& b) {
    if (b.size() > a.size()) a.resize(b.size(), 0.0);
    for (size_t i = 0; i < b.size(); ++i) a[i] += s * b[i];
    return a;
}

Poly poly_antideriv(const Poly& a) {
    Poly c(a.size() + 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i) c[i + 1] = a[i] / static_cast<double>(i + 1);
    return c;
}

Poly poly_deriv(const Poly& a) {
    if (a.size() <= 1) return Poly{0.0};
    Poly c(a.size() - 1, 0.0);
    for (size_t i = 1; i < a.size(); ++i) c[i - 1] = a[i] * static_cast<double>(i);
    return c;
}

double poly_eval(const Poly& a, double x) {
    double acc = 0.0;
    for (size_t i = a.size(); i-- > 0;) acc = acc * x + a[i];
    return acc;
}

double poly_int01(const Poly& a) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] / static_cast<double>(i + 1);
    return acc;
}

// Piecewise shoulder: chi''(1 + 2 sigma) = w(sigma) with
//   w = 2 - A * bump(sigma / W)        on [0, W)      (early well)
//   w = 2                              on [W, 1 - eps) (the cap value)
//   w = 2 - 2 Q((sigma - 1 + eps)/eps) on [1 - eps, 1] (cliff to zero)
// where Q is the quintic smoothstep and bump = [4 Q (1 - Q)]^2. Writing
// v = 2 - w >= 0, the constraints chi'(3) = 0 and chi(3) = 0 become
// mass(v) = 3 and first moment 3/4; with the cliff width eps fixed, both
// are solved in closed form: W = 2 (3/4 - m1_cliff) / (3 - eps) and
// A = (3 - eps) / (W m0_bump). chi'' <= 2 holds identically since A > 0.
struct ShoulderPieces {
    double W, eps, A;
    Poly bump, bump_d1, bump_d2;   // local variable t = sigma / W
    Poly cliff, cliff_d1, cliff_d2; // local t = (sigma - 1 + eps)/eps
    // cumulative integrals: chi'(1 + 2 s) = 2 + 2 * I(s), I piecewise
    Poly bump_I;   // int_0^t bump
    Poly cliff_I;  // int_0^t 2Q
    // second cumulative for chi itself handled in the evaluator
    double I_W = 0, I2_W = 0, I_c0 = 0, I2_c0 = 0; // carried constants
    Poly bump_I2, cliff_I2;
};

const ShoulderPieces& shoulder() {
    static const ShoulderPieces sp = [] {
        ShoulderPieces out;
        out.eps = 0.18;
        Poly Q = {0, 0, 0, 10, -15, 6};
        Poly QmQ2 = poly_axpy(Q, -1.0, poly_mul(Q, Q));
        Poly bump = poly_mul(QmQ2, QmQ2);
        for (double& c : bump) c *= 16.0;
        double m0 = poly_int01(bump); // unit bump mass (center is exactly 1/2)
        double m1_cliff = out.eps * (1.0 - out.eps) + 5.0 * out.eps * out.eps / 7.0;
        out.W = 2.0 * (0.75 - m1_cliff) / (3.0 - out.eps);
        out.A = (3.0 - out.eps) / (out.W * m0);
        out.bump = bump;
        out.bump_d1 = poly_deriv(bump);
        out.bump_d2 = poly_deriv(out.bump_d1);
        Poly cliff; // 2 Q(t)
        cliff = Q;
        for (double& c : cliff) c *= 2.0;
        out.cliff = cliff;
        out.cliff_d1 = poly_deriv(cliff);
        out.cliff_d2 = poly_deriv(out.cliff_d1);
        out.bump_I = poly_antideriv(bump);
        out.bump_I2 = poly_antideriv(out.bump_I);
        out.cliff_I = poly_antideriv(cliff);
        out.cliff_I2 = poly_antideriv(out.cliff_I);
        return out;
    }();
    return sp;
}

// I(s) = int_0^s w(sigma) d sigma and J(s) = int_0^s I, piecewise closed
// forms with carried constants.
void shoulder_cumulatives(double s, double& I, double& J) {
    const ShoulderPieces& sp = shoulder();
    const double W = sp.W, eps = sp.eps, A = sp.A;
    const double s_c = 1.0 - eps;
    // piece boundary values
    static const double IW = 2.0 * W - A * W * poly_int01(sp.bump);
    static const double JW = W * W - A * W * W * poly_int01(sp.bump_I);
    if (s < W) {
        double t = s / W;
        I = 2.0 * s - A * W * poly_eval(sp.bump_I, t);
        J = s * s - A * W * W * poly_eval(sp.bump_I2, t);
        return;
    }
    if (s < s_c) {
        I = IW + 2.0 * (s - W);
        J = JW + IW * (s - W) + (s - W) * (s - W);
        return;
    }
    static const double Ic = IW + 2.0 * (s_c - W);
    static const double Jc = JW + IW * (s_c - W) + (s_c - W) * (s_c - W);
    double t = std::min((s - s_c) / eps, 1.0);
    double seg = std::min(s, 1.0) - s_c;
    I = Ic + 2.0 * seg - eps * poly_eval(sp.cliff_I, t);
    J = Jc + Ic * seg + seg * seg - eps * eps * poly_eval(sp.cliff_I2, t);
}

// Quintic smoothstep and derivatives for the mass cutoff.
double smoothstep(double x, int deriv) {
    if (x <= 0) return deriv == 0 ? 0.0 : 0.0;
    if (x >= 1) return deriv == 0 ? 1.0 : 0.0;
    switch (deriv) {
        case 0: return ((6 * x - 15) * x + 10) * x * x * x;
        case 1: return ((30 * x - 60) * x + 30) * x * x;
        case 2: return ((120 * x - 180) * x + 60) * x;
        case 3: return (360 * x - 360) * x + 60;
        case 4: return 720 * x - 360;
        default: return 0.0;
    }
}

} // namespace

double CutoffFamily::blowup_profile(double s, int deriv) {
    if (s <= 1.0) {
        switch (deriv) {
            case 0: return s * s;
            case 1: return 2.0 * s;
            case 2: return 2.0;
            default: return 0.0;
        }
    }
    if (s >= 3.0) return 0.0;
    const ShoulderPieces& sp = shoulder();
    double sig = 0.5 * (s - 1.0);
    if (deriv >= 2) {
        const double s_c = 1.0 - sp.eps;
        double w, w1, w2;
        if (sig < sp.W) {
            double t = sig / sp.W;
            w = 2.0 - sp.A * poly_eval(sp.bump, t);
            w1 = -sp.A * poly_eval(sp.bump_d1, t) / sp.W;
            w2 = -sp.A * poly_eval(sp.bump_d2, t) / (sp.W * sp.W);
        } else if (sig < s_c) {
            w = 2.0;
            w1 = 0.0;
            w2 = 0.0;
        } else {
            double t = (sig - s_c) / sp.eps;
            w = 2.0 - poly_eval(sp.cliff, t);
            w1 = -poly_eval(sp.cliff_d1, t) / sp.eps;
            w2 = -poly_eval(sp.cliff_d2, t) / (sp.eps * sp.eps);
        }
        switch (deriv) {
            case 2: return w;
            case 3: return 0.5 * w1;  // d sigma / d s = 1/2
            case 4: return 0.25 * w2;
            default: return 0.0;
        }
    }
    double I, J;
    shoulder_cumulatives(sig, I, J);
    if (deriv == 1) return 2.0 + 2.0 * I;
    return 1.0 + 4.0 * sig + 4.0 * J;
}

double CutoffFamily::mass_profile(double s, int deriv) {
    // m(s) = S(2s - 1) on [1/2, 1]; 0 below, 1 above.
    double x = 2.0 * s - 1.0;
    double scale = std::pow(2.0, deriv);
    double val = smoothstep(x, deriv);
    return deriv == 0 ? val : scale * val;
}

CutoffFamily CutoffFamily::blowup(const RadialGrid& grid, double R) {
    if (!(R > 0)) throw ConfigError("cutoff: R must be positive");
    CutoffFamily f;
    f.kind = CutoffKind::blowup_chi;
    f.R = R;
    f.shoulder_lo = R;
    f.shoulder_hi = 3.0 * R;
    const int n = grid.n();
    f.chi.resize(n);
    f.chi_p.resize(n);
    f.chi_pp.resize(n);
    f.chi_p3.resize(n);
    f.chi_p4.resize(n);
    for (int i = 0; i < n; ++i) {
        double s = grid.nodes()[i] / R;
        f.chi[i] = R * R * blowup_profile(s, 0);
        f.chi_p[i] = R * blowup_profile(s, 1);
        f.chi_pp[i] = blowup_profile(s, 2);
        f.chi_p3[i] = blowup_profile(s, 3) / R;
        f.chi_p4[i] = blowup_profile(s, 4) / (R * R);
    }
    return f;
}

CutoffFamily CutoffFamily::mass(const RadialGrid& grid, double R) {
    if (!(R > 0)) throw ConfigError("cutoff: R must be positive");
    CutoffFamily f;
    f.kind = CutoffKind::mass_chi;
    f.R = R;
    f.shoulder_lo = 0.5 * R;
    f.shoulder_hi = R;
    const int n = grid.n();
    f.chi.resize(n);
    f.chi_p.resize(n);
    f.chi_pp.resize(n);
    f.chi_p3.resize(n);
    f.chi_p4.resize(n);
    for (int i = 0; i < n; ++i) {
        double s = grid.nodes()[i] / R;
        f.chi[i] = mass_profile(s, 0);
        f.chi_p[i] = mass_profile(s, 1) / R;
        f.chi_pp[i] = mass_profile(s, 2) / (R * R);
        f.chi_p3[i] = mass_profile(s, 3) / (R * R * R);
        f.chi_p4[i] = mass_profile(s, 4) / (R * R * R * R);
    }
    return f;
}

CutoffFamily CutoffFamily::linear(int axis) {
    if (axis < 0 || axis > 4) throw ConfigError("cutoff: axis must be 0..4");
    CutoffFamily f;
    f.kind = CutoffKind::linear_chi;
    f.axis = axis;
    return f;
}

// ---------------------------------------------------------------------------
// Virial functionals
// ---------------------------------------------------------------------------

double variance_of(const FieldPair& pair) {
    auto raw = detail::variance_raw(pair);
    if (!raw.reliable)
        throw UnreliableVarianceError(
            "variance: " + std::to_string(100.0 * raw.tail_fraction) +
            "% of the variance integrand sits at the grid boundary");
    return raw.value;
}

double virial_rhs(const FieldPair& pair) {
    NormPieces np = norm_pieces(pair);
    double K = np.gu_sq + 0.5 * np.gv_sq;
    double P = np.p_re;
    double E = K - 2.0 * P;
    double a = 8.0 * K - 20.0 * P;
    double b = 10.0 * E - 2.0 * K;
    double scale = std::abs(8.0 * K) + std::abs(20.0 * P) + 1.0;
    if (std::abs(a - b) > 1e-12 * scale)
        throw SolverError("virial_rhs: 8K-20P and 10E-2K route disagreement");
    return a;
}

VirialReading localized_virial(const FieldPair& pair, const CutoffFamily& family) {
    VirialReading out;
    out.R = family.R;
    if (family.kind == CutoffKind::linear_chi) {
        if (pair.is_radial()) return out; // all three vanish by symmetry
        const CartesianGrid& g = *pair.cgrid;
        const int n = g.n();
        double I = 0;
        size_t idx = 0;
        std::array<int, 5> m{};
        for (m[0] = 0; m[0] < n; ++m[0])
            for (m[1] = 0; m[1] < n; ++m[1])
                for (m[2] = 0; m[2] < n; ++m[2])
                    for (m[3] = 0; m[3] < n; ++m[3])
                        for (m[4] = 0; m[4] < n; ++m[4], ++idx) {
                            double dens = std::norm(pair.u[idx]) + 2.0 * std::norm(pair.v[idx]);
                            I += g.x_of(m[family.axis]) * dens;
                        }
        out.I = I * g.cell_volume();
        out.I_prime = 2.0 * momentum_of(pair)[family.axis];
        out.I_double_prime = 0.0; // chi_jk = 0, Delta chi = 0, Delta^2 chi = 0
        return out;
    }
    if (!pair.is_radial())
        throw ConfigError("localized_virial: radial cutoff families need the radial backend");

    const RadialGrid& g = *pair.rgrid;
    const int n = g.n();
    const auto& r = g.nodes();
    const auto& w = g.quad_weights();
    std::vector<cplx> up = g.radial_derivative(pair.u);
    std::vector<cplx> vp = g.radial_derivative(pair.v);

    const bool blowup = family.kind == CutoffKind::blowup_chi;
    double I = 0, Ip = 0;
    double t_r1a = 0, t_r1b = 0, t_r2 = 0, t_r3 = 0; // shoulder-region braces
    double K_fd = 0, P_re = 0;
    for (int i = 0; i < n; ++i) {
        double r1 = r[i], r2 = r1 * r1, r4 = r2 * r2;
        double wi = w[i] * r4;
        double dens = std::norm(pair.u[i]) + 2.0 * std::norm(pair.v[i]);
        double dens_half = std::norm(pair.u[i]) + 0.5 * std::norm(pair.v[i]);
        double grad4 = 4.0 * std::norm(up[i]) + 2.0 * std::norm(vp[i]);
        double pq = (pair.v[i] * std::conj(pair.u[i]) * std::conj(pair.u[i])).real();
        I += wi * family.chi[i] * dens;
        Ip += wi * family.chi_p[i] *
              ((up[i] * std::conj(pair.u[i])).imag() + (vp[i] * std::conj(pair.v[i])).imag());
        K_fd += wi * (std::norm(up[i]) + 0.5 * std::norm(vp[i]));
        P_re += wi * pq;
        bool in_shoulder =
            blowup ? (r1 > family.shoulder_lo * (1.0 - 1e-12) && r1 < family.shoulder_hi)
                   : true;
        if (!in_shoulder) continue; // braces vanish identically off the shoulder
        double b1 = family.chi_pp[i] / r2 - family.chi_p[i] / (r2 * r1);
        double b2 = family.chi_p[i] / r1 - (blowup ? 2.0 : 0.0);
        double b3 = family.chi_p4[i] + 8.0 * family.chi_p3[i] / r1 + 8.0 * family.chi_pp[i] / r2 -
                    8.0 * family.chi_p[i] / (r2 * r1);
        double b4 = family.chi_pp[i] + 4.0 * family.chi_p[i] / r1 - (blowup ? 10.0 : 0.0);
        t_r1a += wi * b1 * r2 * grad4;
        t_r1b += wi * b2 * grad4;
        t_r2 += wi * b3 * dens_half;
        t_r3 += wi * b4 * pq;
    }
    out.I = kS4Area * I;
    out.I_prime = 2.0 * kS4Area * Ip;
    K_fd *= kS4Area;
    P_re *= kS4Area;
    if (blowup) {
        out.R1 = kS4Area * (t_r1a + t_r1b);
        out.R2 = -kS4Area * t_r2;
        out.R3 = -2.0 * kS4Area * t_r3;
        double k208 = 8.0 * K_fd - 20.0 * P_re;
        out.I_double_prime = k208 + out.R1 + out.R2 + out.R3;
    } else {
        // Direct Eq. (55) sums; the braces above already carry the full
        // chi-derivative combinations for non-blowup families.
        out.I_double_prime =
            kS4Area * (t_r1a + t_r1b) - kS4Area * t_r2 - 2.0 * kS4Area * t_r3;
    }
    return out;
}

SignBoundReport sign_bound_check(const FieldPair& pair, double omega, double gs_action,
                                 double rel_slack) {
    FunctionalReport rep = evaluate(pair, omega);
    if (!(rep.i_omega < gs_action))
        throw NotApplicableError("sign_bound_check: I_omega is not below the ground-state action");
    SignBoundReport out;
    out.k208 = rep.k_20_8;
    double tol = 1e-9 * std::max(rep.kinetic, omega * rep.mass);
    if (std::abs(rep.k_20_8) <= tol)
        throw NotApplicableError("sign_bound_check: K_w^{20,8} at the equality case");
    if (rep.k_20_8 > 0) {
        out.sign = 1;
        out.bound = std::min(gs_action - rep.i_omega, rep.kinetic);
        out.margin = rep.k_20_8 - out.bound;
        out.bound_holds = rep.k_20_8 >= out.bound * (1.0 - rel_slack);
    } else {
        out.sign = -1;
        out.bound = 16.0 * (rep.i_omega - gs_action);
        out.margin = out.bound - rep.k_20_8;
        out.bound_holds = rep.k_20_8 <= out.bound + rel_slack * std::abs(out.bound);
    }
    return out;
}

RadialSobolevReport radial_sobolev_check(const std::vector<cplx>& f, const RadialGrid& grid,
                                         const std::vector<double>& radii, double c_calibrated) {
    RadialSobolevReport out;
    out.radii = radii;
    std::vector<cplx> fp = grid.radial_derivative(f);
    const auto& r = grid.nodes();
    const auto& w = grid.quad_weights();
    for (double R : radii) {
        double l3 = 0, l2 = 0, gd = 0;
        for (int i = 0; i < grid.n(); ++i) {
            if (r[i] <= R) continue;
            double r4 = std::pow(r[i], 4);
            double a = std::abs(f[i]);
            l3 += w[i] * a * a * a * r4;
            l2 += w[i] * a * a * r4;
            gd += w[i] * std::norm(fp[i]) * r4;
        }
        l3 = std::cbrt(kS4Area * l3);
        l2 = std::sqrt(kS4Area * l2);
        gd = std::sqrt(kS4Area * gd);
        double rhs0 = std::pow(R, -2.0 / 3.0) * std::pow(l2, 5.0 / 6.0) * std::pow(gd, 1.0 / 6.0);
        out.ratios.push_back(rhs0 > 0 ? l3 / rhs0 : 0.0);
    }
    double peak = 0;
    for (double q : out.ratios) peak = std::max(peak, q);
    out.c_bound = c_calibrated > 0 ? c_calibrated : 1.05 * peak;
    out.uniform = true;
    for (double q : out.ratios)
        if (q > out.c_bound) out.uniform = false;
    return out;
}

} // namespace rnls
