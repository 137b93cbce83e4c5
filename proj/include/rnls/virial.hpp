#pragma once

#include <vector>

#include "rnls/functionals.hpp"
#include "rnls/grid.hpp"

namespace rnls {

// Radial cutoff families for the localized virial identity.
//
// blowup_chi: chi(s) = s^2 on [0,1], a C^2 piecewise-polynomial shoulder on
// [1,3] with chi'' <= 2 everywhere and chi = chi' = 0 from s = 3 on; the
// family samples chi_R(r) = R^2 chi(r/R) and its first four derivatives.
// mass_chi: 0 on [0, R/2], smoothstep, 1 from R on, chi' <= 4/R.
// linear_chi: chi(x) = x_axis (Cartesian momentum weight).
enum class CutoffKind { blowup_chi, mass_chi, linear_chi };

struct CutoffFamily {
    CutoffKind kind = CutoffKind::blowup_chi;
    double R = 1.0;
    int axis = 0; // linear_chi only
    // Samples on the radial grid nodes (empty for linear_chi).
    std::vector<double> chi, chi_p, chi_pp, chi_p3, chi_p4;
    double shoulder_lo = 0, shoulder_hi = 0; // support of the nontrivial braces

    static CutoffFamily blowup(const RadialGrid& grid, double R);
    static CutoffFamily mass(const RadialGrid& grid, double R);
    static CutoffFamily linear(int axis);

    // Unit-scale profile evaluators (deriv = 0..4), exposed for the
    // constraint tests.
    static double blowup_profile(double s, int deriv);
    static double mass_profile(double s, int deriv);
};

struct VirialReading {
    double I = 0;
    double I_prime = 0;
    double I_double_prime = 0;
    double R1 = 0, R2 = 0, R3 = 0; // blowup_chi remainder integrals
    double R = 0;
};

// V = ||x u||^2 + 2 ||x v||^2; throws UnreliableVarianceError when more than
// 1% of the variance integrand sits beyond 0.9 r_max (or outside the central
// half-box on the Cartesian backend).
double variance_of(const FieldPair& pair);

// d^2 V / dt^2 = 8K - 20P, cross-checked against 10E - 2K on every call.
double virial_rhs(const FieldPair& pair);

// I, I' and I'' of I(t) = \int chi (|u|^2 + 2|v|^2) dx from the spatial
// integrals of the current state; for blowup_chi additionally the
// decomposition I'' = K_w^{20,8} + R1 + R2 + R3.
VirialReading localized_virial(const FieldPair& pair, const CutoffFamily& family);

struct SignBoundReport {
    int sign = 0;           // sign of K_w^{20,8}
    bool bound_holds = false;
    double k208 = 0;
    double bound = 0;       // min{I_gs - I, K} or 16 (I - I_gs)
    double margin = 0;      // signed distance to the bound, >= 0 when it holds
};

// Quantitative sign bounds for K_w^{20,8} below the ground-state action.
// Throws NotApplicableError when I_w >= gs_action (or at equality of K208).
SignBoundReport sign_bound_check(const FieldPair& pair, double omega, double gs_action,
                                 double rel_slack = 1e-9);

struct RadialSobolevReport {
    std::vector<double> radii;
    std::vector<double> ratios; // LHS / (RHS without the constant)
    double c_bound = 0;         // calibrated constant the ratios stay under
    bool uniform = false;
};

// ||f||_{L^3(r>R)} vs R^{-2/3} ||f||_{L^2(r>R)}^{5/6} ||f'||_{L^2(r>R)}^{1/6}
// across the given radii; when c_calibrated <= 0 the bound is calibrated from
// this field alone.
RadialSobolevReport radial_sobolev_check(const std::vector<cplx>& f, const RadialGrid& grid,
                                         const std::vector<double>& radii,
                                         double c_calibrated = 0.0);

} // namespace rnls
