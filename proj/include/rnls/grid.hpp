#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include "rnls/banded.hpp"
#include "rnls/errors.hpp"

namespace rnls {

using cplx = std::complex<double>;

// Surface area of the unit sphere S^4 in R^5.
inline constexpr double kS4Area = 8.0 * M_PI * M_PI / 3.0;

// ---------------------------------------------------------------------------
// Radial backend.
//
// Fields f(r) on uniform interior nodes r_i = i*h, i = 1..n, h = r_max/(n+1).
// The working variable for the Laplacian and the linear flow is the
// conjugated field g = r^2 f (d = 5), for which
//     Delta f = (g'' - 2 g / r^2) / r^2,
// with g(0) = 0 forced by the conjugation and g(r_max) = 0 by decay.
// g'' is discretized with the 4th-order 5-point stencil; g is even in r, so
// the node at -h folds onto +h, which only modifies the first diagonal entry
// and keeps the operator symmetric. Volume integrals use
//     \int_{R^5} F(|x|) dx ~= |S^4| * sum_i w_i F(r_i) r_i^4
// with trapezoid weights corrected on the last node so that the rule is
// exact on F == r^4 (the f == 1 ball volume).
// ---------------------------------------------------------------------------
class RadialGrid {
public:
    RadialGrid(int n_points, double r_max);

    int n() const { return n_; }
    double r_max() const { return r_max_; }
    double h() const { return h_; }
    const std::vector<double>& nodes() const { return r_; }
    const std::vector<double>& quad_weights() const { return w_; }
    // w_i r_i^4, the volume measure per node (sans |S^4|).
    const std::vector<double>& volume_weights() const { return wr4_; }

    // |S^4| sum w_i f_i r_i^4
    double integrate(const std::vector<double>& f) const;
    cplx integrate(const std::vector<cplx>& f) const;

    // Discrete L2 norm squared over R^5.
    double norm_sq(const std::vector<cplx>& f) const;

    // Conjugated operator T g = g'' - 2 g / r^2 (symmetric pentadiagonal).
    void apply_T(const std::vector<cplx>& g, std::vector<cplx>& out) const;
    void apply_T(const std::vector<double>& g, std::vector<double>& out) const;

    // ||grad f||^2 over R^5 via the quadratic form <g, -T g> h |S^4|.
    double grad_norm_sq(const std::vector<cplx>& f) const;

    // Band coefficients of T (diag, first, second superdiagonal).
    const std::vector<double>& T_diag() const { return t_d0_; }
    double T_off1() const { return t_d1_; }
    double T_off2() const { return t_d2_; }

    std::vector<cplx> to_conjugate(const std::vector<cplx>& f) const;
    std::vector<cplx> from_conjugate(const std::vector<cplx>& g) const;

    // 4th-order radial derivative of a sampled field (even extension at the
    // origin, zero extension beyond r_max). Diagnostic-grade accuracy.
    std::vector<cplx> radial_derivative(const std::vector<cplx>& f) const;
    std::vector<double> radial_derivative(const std::vector<double>& f) const;

private:
    int n_;
    double r_max_, h_;
    std::vector<double> r_, w_, wr4_;
    std::vector<double> t_d0_; // diagonal of T (includes the -2/r^2 potential)
    double t_d1_, t_d2_;       // constant off-diagonals of the g'' stencil
};

// Delta f on the radial grid (interior accuracy O(h^4); the last two nodes
// see the decay closure).
std::vector<cplx> laplacian_radial(const std::vector<cplx>& f, const RadialGrid& grid);

// exp(i t c Delta) via Crank-Nicolson on the conjugated operator; unitary in
// the discrete L2 inner product. A call splits t into uniform substeps of
// size at most tau_max, so calls with t an integer multiple of tau_max
// compose exactly (group law at machine precision).
class RadialPropagatorPlan {
public:
    RadialPropagatorPlan(std::shared_ptr<const RadialGrid> grid, double mass_coeff, double tau);
    // One CN substep of size tau on the conjugated field, in place.
    void substep(std::vector<cplx>& g) const;
    double tau() const { return tau_; }
    double mass_coeff() const { return coeff_; }

private:
    std::shared_ptr<const RadialGrid> grid_;
    double coeff_, tau_;
    BandedLUc lu_;           // I - i*(tau/2)*c*T, factored
    std::vector<double> d0_; // T diagonal cache for the RHS product
};

std::vector<cplx> half_laplacian_propagate_radial(const std::vector<cplx>& f,
                                                  std::shared_ptr<const RadialGrid> grid,
                                                  double t, double mass_coeff,
                                                  double tau_max = 1e-4);

// ---------------------------------------------------------------------------
// Cartesian backend: periodic box [-L, L)^5, n points per axis.
// Fourier convention: angular wavenumbers k_j = pi*m/L, m = -n/2..n/2-1,
// so exp(i t Delta) multiplies mode k by exp(-i t |k|^2). In the unitary
// Fourier-transform convention of the integral formulation this is the
// symbol exp(-4 pi^2 i t |xi|^2) with xi = m/(2L).
// ---------------------------------------------------------------------------
class CartesianGrid {
public:
    CartesianGrid(int n_per_axis, double box_half_width,
                  size_t memory_budget_bytes = size_t(256) << 20);

    int n() const { return n_; }
    double L() const { return L_; }
    double spacing() const { return h_; }
    size_t npts() const { return npts_; }
    double cell_volume() const { return std::pow(h_, 5); }

    // Wavenumber of axis index m (FFT ordering).
    double k_of(int m) const { return k_[m]; }
    const std::vector<double>& k_axis() const { return k_; }
    double x_of(int m) const { return -L_ + m * h_; }

    // Unnormalized forward / normalized inverse 5-D DFT, in place.
    void fft5(std::vector<cplx>& a, bool inverse) const;

    // 2/3-rule dealias flag per axis index.
    bool keep_mode(int m) const { return keep_[m] != 0; }

    double integrate(const std::vector<double>& f) const;
    double norm_sq(const std::vector<cplx>& f) const;

    // Decompose flat index into per-axis indices.
    std::array<int, 5> unravel(size_t idx) const;

private:
    void fft_axis(std::vector<cplx>& a, int axis, bool inverse) const;
    void fft_line(cplx* line, bool inverse) const;

    int n_;
    double L_, h_;
    size_t npts_;
    bool pow2_;
    std::vector<double> k_;
    std::vector<uint8_t> keep_;
    std::vector<cplx> twiddle_fwd_, twiddle_inv_; // dense DFT fallback (n x n)
    std::vector<int> bitrev_;
};

std::vector<cplx> fourier_propagate_cartesian(const std::vector<cplx>& f,
                                              const CartesianGrid& grid,
                                              double t, double mass_coeff);

std::vector<cplx> laplacian_cartesian(const std::vector<cplx>& f, const CartesianGrid& grid);

// ---------------------------------------------------------------------------
// FieldPair: the state (u, v) on one grid.
// ---------------------------------------------------------------------------
enum class Backend { radial, cartesian };

struct FieldPair {
    Backend backend = Backend::radial;
    std::shared_ptr<const RadialGrid> rgrid;
    std::shared_ptr<const CartesianGrid> cgrid;
    std::vector<cplx> u, v;

    static FieldPair zero(std::shared_ptr<const RadialGrid> g);
    static FieldPair zero(std::shared_ptr<const CartesianGrid> g);

    size_t size() const { return u.size(); }
    bool is_radial() const { return backend == Backend::radial; }
    bool finite() const;
    void require_finite(const char* where) const;
};

// Resample a radial field onto another radial grid (cubic spline, even
// extrapolation through r=0, zero beyond the source r_max).
std::vector<cplx> regrid_radial(const std::vector<cplx>& f, const RadialGrid& from,
                                const RadialGrid& to);
FieldPair regrid(const FieldPair& pair, std::shared_ptr<const RadialGrid> to);

} // namespace rnls
