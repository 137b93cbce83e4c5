#include "rnls/functionals.hpp"

#include <cmath>

#include "rnls/spline.hpp"

namespace rnls {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Norm pieces
// ---------------------------------------------------------------------------

NormPieces norm_pieces(const FieldPair& pair) {
    pair.require_finite("norm_pieces");
    NormPieces np;
    if (pair.is_radial()) {
        const RadialGrid& g = *pair.rgrid;
        np.u_sq = g.norm_sq(pair.u);
        np.v_sq = g.norm_sq(pair.v);
        np.gu_sq = g.grad_norm_sq(pair.u);
        np.gv_sq = g.grad_norm_sq(pair.v);
        double pre = 0, pim = 0;
        const auto& r = g.nodes();
        const auto& w = g.quad_weights();
        for (int i = 0; i < g.n(); ++i) {
            cplx q = pair.v[i] * std::conj(pair.u[i]) * std::conj(pair.u[i]);
            double r4 = r[i] * r[i] * r[i] * r[i];
            pre += w[i] * q.real() * r4;
            pim += w[i] * q.imag() * r4;
        }
        np.p_re = kS4Area * pre;
        np.p_im = kS4Area * pim;
    } else {
        const CartesianGrid& g = *pair.cgrid;
        np.u_sq = g.norm_sq(pair.u);
        np.v_sq = g.norm_sq(pair.v);
        const double vol = g.cell_volume();
        const size_t npts = g.npts();
        // Spectral gradients via Parseval.
        std::vector<cplx> uh = pair.u, vh = pair.v;
        g.fft5(uh, false);
        g.fft5(vh, false);
        const int n = g.n();
        std::vector<double> k2(n);
        for (int j = 0; j < n; ++j) k2[j] = g.k_of(j) * g.k_of(j);
        double gu = 0, gv = 0;
        size_t idx = 0;
        std::array<int, 5> m{};
        for (m[0] = 0; m[0] < n; ++m[0])
            for (m[1] = 0; m[1] < n; ++m[1])
                for (m[2] = 0; m[2] < n; ++m[2])
                    for (m[3] = 0; m[3] < n; ++m[3]) {
                        double base = k2[m[0]] + k2[m[1]] + k2[m[2]] + k2[m[3]];
                        for (m[4] = 0; m[4] < n; ++m[4], ++idx) {
                            double ks = base + k2[m[4]];
                            gu += ks * std::norm(uh[idx]);
                            gv += ks * std::norm(vh[idx]);
                        }
                    }
        double parseval = vol / static_cast<double>(npts);
        np.gu_sq = gu * parseval;
        np.gv_sq = gv * parseval;
        double pre = 0, pim = 0;
        for (size_t i = 0; i < npts; ++i) {
            cplx q = pair.v[i] * std::conj(pair.u[i]) * std::conj(pair.u[i]);
            pre += q.real();
            pim += q.imag();
        }
        np.p_re = pre * vol;
        np.p_im = pim * vol;
    }
    return np;
}

double mass_of(const FieldPair& pair) {
    if (pair.is_radial())
        return pair.rgrid->norm_sq(pair.u) + 2.0 * pair.rgrid->norm_sq(pair.v);
    return pair.cgrid->norm_sq(pair.u) + 2.0 * pair.cgrid->norm_sq(pair.v);
}

double kinetic_of(const FieldPair& pair) {
    if (pair.is_radial())
        return pair.rgrid->grad_norm_sq(pair.u) + 0.5 * pair.rgrid->grad_norm_sq(pair.v);
    NormPieces np = norm_pieces(pair);
    return np.gu_sq + 0.5 * np.gv_sq;
}

double interaction_of(const FieldPair& pair) {
    NormPieces np = norm_pieces(pair);
    return np.p_re;
}

namespace detail {

VarianceRaw variance_raw(const FieldPair& pair) {
    VarianceRaw out;
    if (pair.is_radial()) {
        const RadialGrid& g = *pair.rgrid;
        const auto& r = g.nodes();
        const auto& w = g.quad_weights();
        double total = 0, tail = 0;
        double cut = 0.9 * g.r_max();
        for (int i = 0; i < g.n(); ++i) {
            double dens = std::norm(pair.u[i]) + 2.0 * std::norm(pair.v[i]);
            double r6 = std::pow(r[i], 6);
            double c = w[i] * dens * r6;
            total += c;
            if (r[i] > cut) tail += c;
        }
        out.value = kS4Area * total;
        out.tail_fraction = (total > 0) ? tail / total : 0.0;
        out.reliable = out.tail_fraction <= 0.01;
    } else {
        const CartesianGrid& g = *pair.cgrid;
        const int n = g.n();
        double total = 0, outside = 0;
        size_t idx = 0;
        std::array<int, 5> m{};
        for (m[0] = 0; m[0] < n; ++m[0])
            for (m[1] = 0; m[1] < n; ++m[1])
                for (m[2] = 0; m[2] < n; ++m[2])
                    for (m[3] = 0; m[3] < n; ++m[3])
                        for (m[4] = 0; m[4] < n; ++m[4], ++idx) {
                            double x2 = 0;
                            bool central = true;
                            for (int a = 0; a < 5; ++a) {
                                double x = g.x_of(m[a]);
                                x2 += x * x;
                                if (std::abs(x) > 0.5 * g.L()) central = false;
                            }
                            double dens = std::norm(pair.u[idx]) + 2.0 * std::norm(pair.v[idx]);
                            total += x2 * dens;
                            if (!central) outside += x2 * dens;
                        }
        out.value = total * g.cell_volume();
        out.tail_fraction = (total > 0) ? outside / total : 0.0;
        out.reliable = out.tail_fraction <= 0.01;
    }
    return out;
}

} // namespace detail

FunctionalReport evaluate(const FieldPair& pair, double omega) {
    if (!(omega > 0)) throw ConfigError("evaluate: omega must be positive");
    pair.require_finite("evaluate");
    NormPieces np = norm_pieces(pair);
    FunctionalReport rep;
    rep.omega = omega;
    rep.mass = np.u_sq + 2.0 * np.v_sq;
    rep.kinetic = np.gu_sq + 0.5 * np.gv_sq;
    rep.interaction = np.p_re;
    rep.interaction_im_residual = std::abs(np.p_im);
    rep.energy = rep.kinetic - 2.0 * rep.interaction;
    rep.k_omega = rep.kinetic + omega * rep.mass;
    rep.l_omega = 0.5 * omega * rep.mass + 0.1 * rep.kinetic;
    rep.i_omega = 0.5 * omega * rep.mass + 0.5 * rep.energy;
    rep.k_20_8 = 8.0 * rep.kinetic - 20.0 * rep.interaction;
    rep.momentum = momentum_of(pair);
    auto var = detail::variance_raw(pair);
    if (var.reliable) rep.variance = var.value;
    return rep;
}

json FunctionalReport::to_json() const {
    json j;
    j["mass"] = mass;
    j["energy"] = energy;
    j["kinetic"] = kinetic;
    j["interaction"] = interaction;
    j["k_omega"] = k_omega;
    j["l_omega"] = l_omega;
    j["i_omega"] = i_omega;
    j["k_20_8"] = k_20_8;
    j["momentum"] = momentum;
    if (variance)
        j["variance"] = *variance;
    else
        j["variance"] = nullptr;
    j["omega"] = omega;
    return j;
}

json ThresholdSet::to_json() const {
    return json{{"me_threshold", me_threshold},
                {"mk_threshold", mk_threshold},
                {"c_gn", c_gn},
                {"ground_mass", ground_mass}};
}

// ---------------------------------------------------------------------------
// Scaling family
// ---------------------------------------------------------------------------

double k_alpha_beta(const FieldPair& pair, double omega, double alpha, double beta) {
    if (!(omega > 0)) throw ConfigError("k_alpha_beta: omega must be positive");
    NormPieces np = norm_pieces(pair);
    double c_m = 2.0 * alpha - 5.0 * beta;
    double c_k = 2.0 * alpha - 3.0 * beta;
    double c_p = 3.0 * alpha - 5.0 * beta;
    return 0.5 * omega * c_m * np.u_sq + omega * c_m * np.v_sq + 0.5 * c_k * np.gu_sq +
           0.25 * c_k * np.gv_sq - c_p * np.p_re;
}

FieldPair scale_transform(const FieldPair& pair, double alpha, double beta, double lambda) {
    if (lambda == 0.0) return pair;
    const double amp = std::exp(alpha * lambda);
    const double dil = std::exp(beta * lambda);
    FieldPair out;
    if (pair.is_radial()) {
        const RadialGrid& g = *pair.rgrid;
        out = FieldPair::zero(pair.rgrid);
        auto resample = [&](const std::vector<cplx>& f, std::vector<cplx>& dst) {
            const int n = g.n();
            std::vector<double> x(n + 2);
            std::vector<cplx> y(n + 2);
            x[0] = 0.0;
            y[0] = 1.5 * f[0] - 0.6 * f[1] + 0.1 * f[2];
            for (int i = 0; i < n; ++i) {
                x[i + 1] = g.nodes()[i];
                y[i + 1] = f[i];
            }
            x[n + 1] = g.r_max();
            y[n + 1] = cplx(0);
            CubicSplineC s(std::move(x), std::move(y));
            for (int i = 0; i < n; ++i) dst[i] = amp * s(dil * g.nodes()[i]);
        };
        resample(pair.u, out.u);
        resample(pair.v, out.v);
    } else {
        const CartesianGrid& g = *pair.cgrid;
        out = FieldPair::zero(pair.cgrid);
        // Spectral resampling: evaluate the trig interpolant at the dilated
        // coordinates, separable axis by axis. eval[j][k] = (1/n) e^{i k (y_j + L)}
        // with y_j = e^{b l} x_j, matching the forward-DFT phase origin.
        const int n = g.n();
        std::vector<cplx> eval(static_cast<size_t>(n) * n);
        for (int j = 0; j < n; ++j) {
            double y = dil * g.x_of(j);
            for (int m = 0; m < n; ++m) {
                double ph = g.k_of(m) * (y + g.L());
                eval[static_cast<size_t>(j) * n + m] =
                    cplx(std::cos(ph), std::sin(ph)) / static_cast<double>(n);
            }
        }
        auto resample_axis = [&](std::vector<cplx>& a, int axis) {
            const size_t N = g.npts();
            size_t stride = 1;
            for (int ax = 4; ax > axis; --ax) stride *= static_cast<size_t>(n);
            size_t block = stride * static_cast<size_t>(n);
            std::vector<cplx> line(n), hat(n);
            for (size_t base = 0; base < N; base += block) {
                for (size_t off = 0; off < stride; ++off) {
                    cplx* p = &a[base + off];
                    for (int m = 0; m < n; ++m) line[m] = p[static_cast<size_t>(m) * stride];
                    // 1-D forward DFT of the line.
                    for (int k = 0; k < n; ++k) {
                        cplx acc(0);
                        for (int m = 0; m < n; ++m) {
                            double ph = -2.0 * M_PI * k * m / n;
                            acc += line[m] * cplx(std::cos(ph), std::sin(ph));
                        }
                        hat[k] = acc;
                    }
                    for (int j = 0; j < n; ++j) {
                        cplx acc(0);
                        for (int k = 0; k < n; ++k)
                            acc += hat[k] * eval[static_cast<size_t>(j) * n + k];
                        p[static_cast<size_t>(j) * stride] = acc;
                    }
                }
            }
        };
        out.u = pair.u;
        out.v = pair.v;
        for (int axis = 0; axis < 5; ++axis) {
            resample_axis(out.u, axis);
            resample_axis(out.v, axis);
        }
        for (auto& z : out.u) z *= amp;
        for (auto& z : out.v) z *= amp;
    }
    // Support check: the scaled mass must match the exact scaling law.
    double expected = std::exp((2.0 * alpha - 5.0 * beta) * lambda) * mass_of(pair);
    double actual = mass_of(out);
    if (expected > 0 && std::abs(actual - expected) > 1e-6 * expected)
        throw ResolutionError("scale_transform: support pushed off-grid (mass deviates by " +
                              std::to_string(std::abs(actual - expected) / expected) + ")");
    return out;
}

double nehari_projection_lambda(const FieldPair& pair) {
    double K = kinetic_of(pair);
    double P = interaction_of(pair);
    if (!(P > 0))
        throw NoProjectionError("nehari projection: P <= 0, the ray misses the constraint set");
    return 0.25 * std::log(2.0 * K / (5.0 * P));
}

NehariProjection project_to_nehari(const FieldPair& pair, int max_rounds) {
    FieldPair cur = pair;
    double total = 0.0;
    for (int round = 0; round < max_rounds; ++round) {
        double K = kinetic_of(cur);
        double P = interaction_of(cur);
        if (!(P > 0))
            throw NoProjectionError("nehari projection: P <= 0 during projection");
        double k208 = 8.0 * K - 20.0 * P;
        if (std::abs(k208) <= 1e-9 * K) return {cur, total};
        double lam = 0.25 * std::log(2.0 * K / (5.0 * P));
        cur = scale_transform(cur, 20.0, 8.0, lam);
        total += lam;
    }
    double K = kinetic_of(cur);
    double P = interaction_of(cur);
    if (std::abs(8.0 * K - 20.0 * P) > 1e-9 * K)
        throw SolverError("nehari projection did not reach |K_w^{20,8}| <= 1e-9 K");
    return {cur, total};
}

// ---------------------------------------------------------------------------
// Momentum and Galilean boost
// ---------------------------------------------------------------------------

std::array<double, 5> momentum_of(const FieldPair& pair) {
    std::array<double, 5> p{};
    if (pair.is_radial()) return p; // zero by angular symmetry
    const CartesianGrid& g = *pair.cgrid;
    std::vector<cplx> uh = pair.u, vh = pair.v;
    g.fft5(uh, false);
    g.fft5(vh, false);
    const int n = g.n();
    const double parseval = g.cell_volume() / static_cast<double>(g.npts());
    size_t idx = 0;
    std::array<int, 5> m{};
    for (m[0] = 0; m[0] < n; ++m[0])
        for (m[1] = 0; m[1] < n; ++m[1])
            for (m[2] = 0; m[2] < n; ++m[2])
                for (m[3] = 0; m[3] < n; ++m[3])
                    for (m[4] = 0; m[4] < n; ++m[4], ++idx) {
                        double wgt = std::norm(uh[idx]) + std::norm(vh[idx]);
                        if (wgt == 0.0) continue;
                        for (int a = 0; a < 5; ++a) p[a] += g.k_of(m[a]) * wgt;
                    }
    for (int a = 0; a < 5; ++a) p[a] *= parseval;
    return p;
}

FieldPair galilean_boost(const FieldPair& pair, const std::array<double, 5>& xi0, double t) {
    bool zero = true;
    for (double x : xi0)
        if (x != 0.0) zero = false;
    if (zero && t == 0.0) return pair;
    if (pair.is_radial()) {
        if (zero) return pair;
        throw ConfigError("galilean_boost: cartesian backend required for nonzero xi0");
    }
    const CartesianGrid& g = *pair.cgrid;
    const double kq = M_PI / g.L();
    double xi_sq = 0;
    for (int a = 0; a < 5; ++a) {
        double ratio = xi0[a] / kq;
        if (std::abs(ratio - std::round(ratio)) > 1e-9)
            throw ResolutionError("galilean_boost: xi0 must be a box wavenumber (multiple of pi/L)");
        if (std::abs(xi0[a]) * g.spacing() > 0.5 * M_PI)
            throw ResolutionError("galilean_boost: phase under-resolved (|xi0| h > pi/2)");
        xi_sq += xi0[a] * xi0[a];
    }
    FieldPair out = FieldPair::zero(pair.cgrid);
    const int n = g.n();
    auto boost_field = [&](const std::vector<cplx>& f, std::vector<cplx>& dst, double mod_mult,
                           double phase_mult) {
        std::vector<cplx> a = f;
        // Exact periodic translation by s = 2 xi0 t in Fourier space.
        if (t != 0.0) {
            g.fft5(a, false);
            size_t idx = 0;
            std::array<int, 5> m{};
            for (m[0] = 0; m[0] < n; ++m[0])
                for (m[1] = 0; m[1] < n; ++m[1])
                    for (m[2] = 0; m[2] < n; ++m[2])
                        for (m[3] = 0; m[3] < n; ++m[3])
                            for (m[4] = 0; m[4] < n; ++m[4], ++idx) {
                                double ph = 0;
                                for (int ax = 0; ax < 5; ++ax)
                                    ph -= g.k_of(m[ax]) * 2.0 * xi0[ax] * t;
                                a[idx] *= cplx(std::cos(ph), std::sin(ph));
                            }
            g.fft5(a, true);
        }
        // Modulation e^{i mod_mult x.xi0} and the global phase.
        double gph = -phase_mult * t * xi_sq;
        cplx global(std::cos(gph), std::sin(gph));
        size_t idx = 0;
        std::array<int, 5> m{};
        for (m[0] = 0; m[0] < n; ++m[0])
            for (m[1] = 0; m[1] < n; ++m[1])
                for (m[2] = 0; m[2] < n; ++m[2])
                    for (m[3] = 0; m[3] < n; ++m[3])
                        for (m[4] = 0; m[4] < n; ++m[4], ++idx) {
                            double ph = 0;
                            for (int ax = 0; ax < 5; ++ax) ph += mod_mult * xi0[ax] * g.x_of(m[ax]);
                            dst[idx] = a[idx] * cplx(std::cos(ph), std::sin(ph)) * global;
                        }
    };
    boost_field(pair.u, out.u, 1.0, 1.0);
    boost_field(pair.v, out.v, 2.0, 2.0);
    return out;
}

double gn_inequality_gap(const FieldPair& pair, const ThresholdSet& thresholds) {
    double M = mass_of(pair);
    if (M <= 0.0) throw UndefinedGapError("gn_inequality_gap: zero pair");
    double K = kinetic_of(pair);
    double P = interaction_of(pair);
    return thresholds.c_gn * std::pow(M, 0.25) * std::pow(K, 1.25) - P;
}

} // namespace rnls
