#include "rnls/grid.hpp"

#include <algorithm>
#include <cstring>

#include "rnls/spline.hpp"

namespace rnls {

// ---------------------------------------------------------------------------
// RadialGrid
// ---------------------------------------------------------------------------

RadialGrid::RadialGrid(int n_points, double r_max) : n_(n_points), r_max_(r_max) {
    if (n_points < 16) throw ConfigError("radial grid: n_points must be >= 16");
    if (!(r_max > 0.0)) throw ConfigError("radial grid: r_max must be positive");
    h_ = r_max_ / (n_ + 1);
    r_.resize(n_);
    for (int i = 0; i < n_; ++i) r_[i] = (i + 1) * h_;

    // Trapezoid weights; the Euler-Maclaurin defect of the r^4 moment is
    // folded into the last node so that f == 1 integrates to the exact ball
    // volume. Fields of interest decay, so the correction is inert for them.
    w_.assign(n_, h_);
    double moment = 0.0;
    for (int i = 0; i < n_; ++i) moment += r_[i] * r_[i] * r_[i] * r_[i];
    moment *= h_;
    double defect = std::pow(r_max_, 5) / 5.0 - moment;
    w_[n_ - 1] = h_ + defect / std::pow(r_[n_ - 1], 4);
    if (w_[n_ - 1] <= 0.0) throw ConfigError("radial grid: nonpositive corrected weight");
    wr4_.resize(n_);
    for (int i = 0; i < n_; ++i) wr4_[i] = w_[i] * r_[i] * r_[i] * r_[i] * r_[i];

    // T = D4 - 2/r^2 with D4 the 4th-order second-derivative stencil
    // (-1, 16, -30, 16, -1)/(12 h^2); even folding adds -1/(12h^2) at (0,0).
    const double s = 1.0 / (12.0 * h_ * h_);
    t_d1_ = 16.0 * s;
    t_d2_ = -1.0 * s;
    t_d0_.resize(n_);
    for (int i = 0; i < n_; ++i) t_d0_[i] = -30.0 * s - 2.0 / (r_[i] * r_[i]);
    t_d0_[0] -= 1.0 * s; // g(-h) = g(h)
}

double RadialGrid::integrate(const std::vector<double>& f) const {
    double acc = 0.0;
    for (int i = 0; i < n_; ++i) acc += wr4_[i] * f[i];
    return kS4Area * acc;
}

cplx RadialGrid::integrate(const std::vector<cplx>& f) const {
    cplx acc = 0.0;
    for (int i = 0; i < n_; ++i) acc += wr4_[i] * f[i];
    return kS4Area * acc;
}

double RadialGrid::norm_sq(const std::vector<cplx>& f) const {
    double acc = 0.0;
    for (int i = 0; i < n_; ++i) acc += wr4_[i] * std::norm(f[i]);
    return kS4Area * acc;
}

template <class T>
static void apply_T_impl(const std::vector<double>& d0, double d1, double d2,
                         const std::vector<T>& g, std::vector<T>& out) {
    const int n = static_cast<int>(g.size());
    out.resize(n);
    for (int i = 0; i < n; ++i) {
        T acc = d0[i] * g[i];
        if (i >= 1) acc += d1 * g[i - 1];
        if (i >= 2) acc += d2 * g[i - 2];
        if (i + 1 < n) acc += d1 * g[i + 1];
        if (i + 2 < n) acc += d2 * g[i + 2];
        out[i] = acc;
    }
}

void RadialGrid::apply_T(const std::vector<cplx>& g, std::vector<cplx>& out) const {
    apply_T_impl(t_d0_, t_d1_, t_d2_, g, out);
}

void RadialGrid::apply_T(const std::vector<double>& g, std::vector<double>& out) const {
    apply_T_impl(t_d0_, t_d1_, t_d2_, g, out);
}

std::vector<cplx> RadialGrid::to_conjugate(const std::vector<cplx>& f) const {
    std::vector<cplx> g(n_);
    for (int i = 0; i < n_; ++i) g[i] = f[i] * (r_[i] * r_[i]);
    return g;
}

std::vector<cplx> RadialGrid::from_conjugate(const std::vector<cplx>& g) const {
    std::vector<cplx> f(n_);
    for (int i = 0; i < n_; ++i) f[i] = g[i] / (r_[i] * r_[i]);
    return f;
}

double RadialGrid::grad_norm_sq(const std::vector<cplx>& f) const {
    // ||grad f||^2 = |S^4| \int (|g'|^2 + 2|g|^2/r^2) dr = |S^4| h <g, -T g>.
    std::vector<cplx> g = to_conjugate(f), tg;
    apply_T(g, tg);
    double acc = 0.0;
    for (int i = 0; i < n_; ++i)
        acc -= g[i].real() * tg[i].real() + g[i].imag() * tg[i].imag();
    return std::max(0.0, kS4Area * h_ * acc);
}

template <class T>
static std::vector<T> radial_derivative_impl(const RadialGrid& grid, const std::vector<T>& f) {
    // (f_{j-2} - 8 f_{j-1} + 8 f_{j+1} - f_{j+2}) / (12h); f is even about 0
    // (f(-r_i) = f(r_i), f(0) by even quartic extrapolation) and zero beyond
    // r_max.
    const int n = grid.n();
    const double inv = 1.0 / (12.0 * grid.h());
    // f(0) from the even quartic c0 + c1 r^2 + c2 r^4 through the first three
    // nodes (exact for even polynomials up to degree 4).
    T fz = 1.5 * f[0] - 0.6 * f[1] + 0.1 * f[2];
    std::vector<T> out(n);
    auto get = [&](int j) -> T {
        if (j >= 0 && j < n) return f[j];
        if (j == -1) return fz;      // r = 0
        if (j < -1) return f[-j - 2]; // r = -(j+1)h mirrors node -(j+2)
        return T(0);                  // beyond r_max
    };
    for (int j = 0; j < n; ++j)
        out[j] = (get(j - 2) - 8.0 * get(j - 1) + 8.0 * get(j + 1) - get(j + 2)) * inv;
    return out;
}

std::vector<cplx> RadialGrid::radial_derivative(const std::vector<cplx>& f) const {
    return radial_derivative_impl(*this, f);
}

std::vector<double> RadialGrid::radial_derivative(const std::vector<double>& f) const {
    return radial_derivative_impl(*this, f);
}

std::vector<cplx> laplacian_radial(const std::vector<cplx>& f, const RadialGrid& grid) {
    // Direct radial form f'' + (4/r) f' with the even extension through the
    // origin: uniformly 4th-order for smooth even fields, unlike the
    // conjugated route whose pointwise error is amplified by 1/r^2 at the
    // first nodes. The conjugated operator remains the one used for
    // propagation and the kinetic quadratic form.
    const int n = grid.n();
    const double h = grid.h();
    const cplx fz = 1.5 * f[0] - 0.6 * f[1] + 0.1 * f[2];
    auto get = [&](int j) -> cplx {
        if (j >= 0 && j < n) return f[j];
        if (j == -1) return fz;
        if (j < -1) return f[-j - 2];
        return cplx(0);
    };
    std::vector<cplx> out(n);
    const double c2 = 1.0 / (12.0 * h * h);
    const double c1 = 1.0 / (12.0 * h);
    for (int j = 0; j < n; ++j) {
        cplx fpp = (-get(j - 2) + 16.0 * get(j - 1) - 30.0 * get(j) + 16.0 * get(j + 1) -
                    get(j + 2)) * c2;
        cplx fp = (get(j - 2) - 8.0 * get(j - 1) + 8.0 * get(j + 1) - get(j + 2)) * c1;
        out[j] = fpp + (4.0 / grid.nodes()[j]) * fp;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Radial propagator
// ---------------------------------------------------------------------------

RadialPropagatorPlan::RadialPropagatorPlan(std::shared_ptr<const RadialGrid> grid,
                                           double mass_coeff, double tau)
    : grid_(std::move(grid)), coeff_(mass_coeff), tau_(tau),
      lu_(grid_->n(), 2, 2), d0_(grid_->T_diag()) {
    const cplx itheta(0.0, 0.5 * tau_ * coeff_);
    const int n = grid_->n();
    const double d1 = grid_->T_off1(), d2 = grid_->T_off2();
    for (int i = 0; i < n; ++i) {
        lu_.at(i, i) = 1.0 - itheta * d0_[i];
        if (i + 1 < n) { lu_.at(i, i + 1) = -itheta * d1; lu_.at(i + 1, i) = -itheta * d1; }
        if (i + 2 < n) { lu_.at(i, i + 2) = -itheta * d2; lu_.at(i + 2, i) = -itheta * d2; }
    }
    lu_.factor();
}

void RadialPropagatorPlan::substep(std::vector<cplx>& g) const {
    const cplx itheta(0.0, 0.5 * tau_ * coeff_);
    const int n = grid_->n();
    const double d1 = grid_->T_off1(), d2 = grid_->T_off2();
    std::vector<cplx> rhs(n);
    for (int i = 0; i < n; ++i) {
        cplx acc = d0_[i] * g[i];
        if (i >= 1) acc += d1 * g[i - 1];
        if (i >= 2) acc += d2 * g[i - 2];
        if (i + 1 < n) acc += d1 * g[i + 1];
        if (i + 2 < n) acc += d2 * g[i + 2];
        rhs[i] = g[i] + itheta * acc;
    }
    lu_.solve(rhs);
    g.swap(rhs);
}

std::vector<cplx> half_laplacian_propagate_radial(const std::vector<cplx>& f,
                                                  std::shared_ptr<const RadialGrid> grid,
                                                  double t, double mass_coeff,
                                                  double tau_max) {
    if (!std::isfinite(t)) throw ConfigError("propagate: t must be finite");
    if (t == 0.0) return f;
    double at = std::abs(t);
    long nsub = std::max<long>(1, static_cast<long>(std::ceil(at / tau_max - 1e-9)));
    double tau = t / static_cast<double>(nsub);
    RadialPropagatorPlan plan(grid, mass_coeff, tau);
    std::vector<cplx> g = grid->to_conjugate(f);
    for (long s = 0; s < nsub; ++s) plan.substep(g);
    return grid->from_conjugate(g);
}

// ---------------------------------------------------------------------------
// CartesianGrid
// ---------------------------------------------------------------------------

CartesianGrid::CartesianGrid(int n_per_axis, double box_half_width, size_t memory_budget_bytes)
    : n_(n_per_axis), L_(box_half_width) {
    if (n_ < 4 || n_ % 2 != 0) throw ConfigError("cartesian grid: n_per_axis must be even and >= 4");
    if (!(L_ > 0.0)) throw ConfigError("cartesian grid: box half width must be positive");
    npts_ = 1;
    for (int a = 0; a < 5; ++a) npts_ *= static_cast<size_t>(n_);
    if (npts_ * 2 * sizeof(cplx) > memory_budget_bytes)
        throw ConfigError("cartesian grid: n^5 exceeds the field memory budget");
    h_ = 2.0 * L_ / n_;
    k_.resize(n_);
    keep_.resize(n_);
    const int kc = n_ / 3; // 2/3-rule cut
    for (int m = 0; m < n_; ++m) {
        int ms = (m < n_ / 2) ? m : m - n_;
        k_[m] = M_PI * ms / L_;
        keep_[m] = (std::abs(ms) <= kc) ? 1 : 0;
    }
    pow2_ = (n_ & (n_ - 1)) == 0;
    if (pow2_) {
        bitrev_.resize(n_);
        int lg = 0;
        while ((1 << lg) < n_) ++lg;
        for (int i = 0; i < n_; ++i) {
            int r = 0;
            for (int b = 0; b < lg; ++b)
                if (i & (1 << b)) r |= 1 << (lg - 1 - b);
            bitrev_[i] = r;
        }
    } else {
        twiddle_fwd_.resize(static_cast<size_t>(n_) * n_);
        twiddle_inv_.resize(static_cast<size_t>(n_) * n_);
        for (int j = 0; j < n_; ++j)
            for (int m = 0; m < n_; ++m) {
                double ph = -2.0 * M_PI * j * m / n_;
                twiddle_fwd_[static_cast<size_t>(j) * n_ + m] = cplx(std::cos(ph), std::sin(ph));
                twiddle_inv_[static_cast<size_t>(j) * n_ + m] =
                    cplx(std::cos(ph), -std::sin(ph)) / static_cast<double>(n_);
            }
    }
}

void CartesianGrid::fft_line(cplx* a, bool inverse) const {
    if (pow2_) {
        for (int i = 0; i < n_; ++i) {
            int j = bitrev_[i];
            if (j > i) std::swap(a[i], a[j]);
        }
        for (int len = 2; len <= n_; len <<= 1) {
            double ang = (inverse ? 2.0 : -2.0) * M_PI / len;
            cplx wl(std::cos(ang), std::sin(ang));
            for (int i = 0; i < n_; i += len) {
                cplx w(1.0, 0.0);
                for (int j = 0; j < len / 2; ++j) {
                    cplx x = a[i + j], y = a[i + j + len / 2] * w;
                    a[i + j] = x + y;
                    a[i + j + len / 2] = x - y;
                    w *= wl;
                }
            }
        }
        if (inverse)
            for (int i = 0; i < n_; ++i) a[i] /= static_cast<double>(n_);
    } else {
        const std::vector<cplx>& tw = inverse ? twiddle_inv_ : twiddle_fwd_;
        static thread_local std::vector<cplx> scratch;
        scratch.assign(n_, cplx(0));
        for (int j = 0; j < n_; ++j) {
            const cplx* row = &tw[static_cast<size_t>(j) * n_];
            cplx acc(0);
            for (int m = 0; m < n_; ++m) acc += row[m] * a[m];
            scratch[j] = acc;
        }
        std::copy(scratch.begin(), scratch.end(), a);
    }
}

void CartesianGrid::fft_axis(std::vector<cplx>& a, int axis, bool inverse) const {
    const size_t n = static_cast<size_t>(n_);
    size_t stride = 1;
    for (int ax = 4; ax > axis; --ax) stride *= n;
    size_t block = stride * n;
    std::vector<cplx> line(n);
    for (size_t base = 0; base < npts_; base += block) {
        for (size_t off = 0; off < stride; ++off) {
            cplx* p = &a[base + off];
            if (stride == 1) {
                fft_line(p, inverse);
            } else {
                for (size_t m = 0; m < n; ++m) line[m] = p[m * stride];
                fft_line(line.data(), inverse);
                for (size_t m = 0; m < n; ++m) p[m * stride] = line[m];
            }
        }
    }
}

void CartesianGrid::fft5(std::vector<cplx>& a, bool inverse) const {
    if (a.size() != npts_) throw ConfigError("fft5: field size mismatch");
    for (int axis = 0; axis < 5; ++axis) fft_axis(a, axis, inverse);
}

double CartesianGrid::integrate(const std::vector<double>& f) const {
    double acc = 0.0;
    for (double x : f) acc += x;
    return acc * cell_volume();
}

double CartesianGrid::norm_sq(const std::vector<cplx>& f) const {
    double acc = 0.0;
    for (const cplx& x : f) acc += std::norm(x);
    return acc * cell_volume();
}

std::array<int, 5> CartesianGrid::unravel(size_t idx) const {
    std::array<int, 5> m{};
    for (int a = 4; a >= 0; --a) {
        m[a] = static_cast<int>(idx % n_);
        idx /= n_;
    }
    return m;
}

std::vector<cplx> fourier_propagate_cartesian(const std::vector<cplx>& f,
                                              const CartesianGrid& grid, double t,
                                              double mass_coeff) {
    if (!std::isfinite(t)) throw ConfigError("propagate: t must be finite");
    std::vector<cplx> a = f;
    if (t == 0.0) return a;
    grid.fft5(a, false);
    const int n = grid.n();
    const double c = t * mass_coeff;
    size_t idx = 0;
    std::array<int, 5> m{};
    std::vector<double> k2(n);
    for (int j = 0; j < n; ++j) k2[j] = grid.k_of(j) * grid.k_of(j);
    for (m[0] = 0; m[0] < n; ++m[0])
        for (m[1] = 0; m[1] < n; ++m[1])
            for (m[2] = 0; m[2] < n; ++m[2])
                for (m[3] = 0; m[3] < n; ++m[3]) {
                    double base = k2[m[0]] + k2[m[1]] + k2[m[2]] + k2[m[3]];
                    for (m[4] = 0; m[4] < n; ++m[4], ++idx) {
                        double ph = -c * (base + k2[m[4]]);
                        a[idx] *= cplx(std::cos(ph), std::sin(ph));
                    }
                }
    grid.fft5(a, true);
    return a;
}

std::vector<cplx> laplacian_cartesian(const std::vector<cplx>& f, const CartesianGrid& grid) {
    std::vector<cplx> a = f;
    grid.fft5(a, false);
    const int n = grid.n();
    std::vector<double> k2(n);
    for (int j = 0; j < n; ++j) k2[j] = grid.k_of(j) * grid.k_of(j);
    size_t idx = 0;
    std::array<int, 5> m{};
    for (m[0] = 0; m[0] < n; ++m[0])
        for (m[1] = 0; m[1] < n; ++m[1])
            for (m[2] = 0; m[2] < n; ++m[2])
                for (m[3] = 0; m[3] < n; ++m[3]) {
                    double base = k2[m[0]] + k2[m[1]] + k2[m[2]] + k2[m[3]];
                    for (m[4] = 0; m[4] < n; ++m[4], ++idx) a[idx] *= -(base + k2[m[4]]);
                }
    grid.fft5(a, true);
    return a;
}

// ---------------------------------------------------------------------------
// FieldPair
// ---------------------------------------------------------------------------

FieldPair FieldPair::zero(std::shared_ptr<const RadialGrid> g) {
    FieldPair p;
    p.backend = Backend::radial;
    p.rgrid = std::move(g);
    p.u.assign(p.rgrid->n(), cplx(0));
    p.v.assign(p.rgrid->n(), cplx(0));
    return p;
}

FieldPair FieldPair::zero(std::shared_ptr<const CartesianGrid> g) {
    FieldPair p;
    p.backend = Backend::cartesian;
    p.cgrid = std::move(g);
    p.u.assign(p.cgrid->npts(), cplx(0));
    p.v.assign(p.cgrid->npts(), cplx(0));
    return p;
}

bool FieldPair::finite() const {
    auto ok = [](const std::vector<cplx>& f) {
        for (const cplx& x : f)
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
        return true;
    };
    return ok(u) && ok(v);
}

void FieldPair::require_finite(const char* where) const {
    if (!finite()) throw DivergedStateError(std::string(where) + ": non-finite field values");
}

std::vector<cplx> regrid_radial(const std::vector<cplx>& f, const RadialGrid& from,
                                const RadialGrid& to) {
    const int n = from.n();
    std::vector<double> x(n + 2);
    std::vector<cplx> y(n + 2);
    x[0] = 0.0;
    y[0] = 1.5 * f[0] - 0.6 * f[1] + 0.1 * f[2]; // even quartic extrapolation

    for (int i = 0; i < n; ++i) {
        x[i + 1] = from.nodes()[i];
        y[i + 1] = f[i];
    }
    x[n + 1] = from.r_max();
    y[n + 1] = cplx(0);
    CubicSplineC s(std::move(x), std::move(y));
    std::vector<cplx> out(to.n());
    for (int i = 0; i < to.n(); ++i) out[i] = s(to.nodes()[i]);
    return out;
}

FieldPair regrid(const FieldPair& pair, std::shared_ptr<const RadialGrid> to) {
    if (!pair.is_radial()) throw ConfigError("regrid: radial pairs only");
    FieldPair out;
    out.backend = Backend::radial;
    out.rgrid = to;
    out.u = regrid_radial(pair.u, *pair.rgrid, *to);
    out.v = regrid_radial(pair.v, *pair.rgrid, *to);
    return out;
}

} // namespace rnls
