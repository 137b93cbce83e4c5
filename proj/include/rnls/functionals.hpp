#pragma once

#include <array>
#include <optional>

#include <nlohmann/json.hpp>

#include "rnls/grid.hpp"

namespace rnls {

// Scalar functionals of a state (u, v):
//   M = ||u||^2 + 2||v||^2              E = K - 2P
//   K = ||grad u||^2 + (1/2)||grad v||^2   P = Re (v, u^2) = Re \int v conj(u)^2
//   K_w = K + w M        L_w = (w/2) M + K/10       I_w = (w/2) M + E/2
//   K_w^{a,b} = (w/2)(2a-5b) M + (1/2)(2a-3b) K - (3a-5b) P;  K_w^{20,8} = 8K - 20P
struct FunctionalReport {
    double mass = 0, energy = 0, kinetic = 0, interaction = 0;
    double k_omega = 0, l_omega = 0, i_omega = 0, k_20_8 = 0;
    std::array<double, 5> momentum{};
    std::optional<double> variance;
    double omega = 1.0;
    double interaction_im_residual = 0; // |Im (v,u^2)|, should be ~0 for consistent states

    nlohmann::json to_json() const;
};

// Raw norm pieces used by several formulas.
struct NormPieces {
    double u_sq = 0, v_sq = 0;       // ||u||^2, ||v||^2
    double gu_sq = 0, gv_sq = 0;     // ||grad u||^2, ||grad v||^2
    double p_re = 0, p_im = 0;       // Re/Im (v, u^2)
};
NormPieces norm_pieces(const FieldPair& pair);

FunctionalReport evaluate(const FieldPair& pair, double omega);

double mass_of(const FieldPair& pair);
double kinetic_of(const FieldPair& pair);
double interaction_of(const FieldPair& pair);

// d/d lambda of I_w along the scaling orbit at lambda = 0.
double k_alpha_beta(const FieldPair& pair, double omega, double alpha, double beta);

// (u, v) -> (e^{a l} u(e^{b l} .), e^{a l} v(e^{b l} .)).
FieldPair scale_transform(const FieldPair& pair, double alpha, double beta, double lambda);

// lambda0 = (1/4) log(2K / 5P); requires P > 0.
double nehari_projection_lambda(const FieldPair& pair);

// Iterated (lambda, scale) steps until |K_w^{20,8}| <= 1e-9 * K; returns the
// projected pair and the accumulated lambda.
struct NehariProjection {
    FieldPair pair;
    double lambda_total;
};
NehariProjection project_to_nehari(const FieldPair& pair, int max_rounds = 6);

// P~ = Im \int (grad u conj(u) + grad v conj(v)) dx; zero on the radial
// backend by symmetry.
std::array<double, 5> momentum_of(const FieldPair& pair);

// (u, v) -> (e^{i x.xi0} e^{-i t |xi0|^2} u(x - 2 xi0 t), e^{2 i x.xi0} e^{-2 i t |xi0|^2} v(x - 2 xi0 t)).
// Cartesian backend; xi0 components must be box wavenumbers (multiples of pi/L).
FieldPair galilean_boost(const FieldPair& pair, const std::array<double, 5>& xi0, double t);

struct ThresholdSet {
    double me_threshold = 0; // M1 * E1 = M1^2
    double mk_threshold = 0; // M1 * K1 = 5 M1^2
    double c_gn = 0;         // P1 / (M1^{1/4} K1^{5/4})
    double ground_mass = 0;  // M1

    nlohmann::json to_json() const;
};

// C_GN M^{1/4} K^{5/4} - P; >= 0 up to quadrature noise for every pair.
double gn_inequality_gap(const FieldPair& pair, const ThresholdSet& thresholds);

namespace detail {
// ||x u||^2 + 2 ||x v||^2 with a boundary-tail reliability estimate.
struct VarianceRaw {
    double value = 0;
    double tail_fraction = 0;
    bool reliable = false;
};
VarianceRaw variance_raw(const FieldPair& pair);
} // namespace detail

} // namespace rnls
