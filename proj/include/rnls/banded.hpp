#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <vector>

#include "rnls/errors.hpp"

namespace rnls {

// LU factorization with partial pivoting for a band matrix with kl sub- and
// ku superdiagonals (LAPACK-style storage, fill-in widens the upper band to
// kl+ku). Used for the Crank-Nicolson solves and the SPD preconditioner
// systems; n is a few thousand, bandwidth 2, so O(n) per solve.
template <class Scalar>
class BandedLU {
public:
    BandedLU(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
          ab_(static_cast<size_t>(ldab_) * n, Scalar(0)), piv_(n, 0) {}

    // Assemble entry A(i,j); valid for -ku <= i-j <= kl before factor().
    Scalar& at(int i, int j) { return ab_[idx(i, j)]; }
    Scalar at(int i, int j) const { return ab_[idx(i, j)]; }

    void factor() {
        const int band_hi = kl_ + ku_;
        for (int j = 0; j < n_; ++j) {
            int ilim = std::min(n_ - 1, j + kl_);
            int jp = j;
            double amax = mag(ab_[idx(j, j)]);
            for (int i = j + 1; i <= ilim; ++i) {
                double a = mag(ab_[idx(i, j)]);
                if (a > amax) { amax = a; jp = i; }
            }
            piv_[j] = jp;
            if (amax == 0.0) throw SolverError("banded LU: singular matrix");
            if (jp != j) {
                int khi = std::min(n_ - 1, j + band_hi);
                for (int k = j; k <= khi; ++k) std::swap(ab_[idx(j, k)], ab_[idx(jp, k)]);
            }
            Scalar pivot = ab_[idx(j, j)];
            for (int i = j + 1; i <= ilim; ++i) {
                Scalar m = ab_[idx(i, j)] / pivot;
                ab_[idx(i, j)] = m;
                int khi = std::min(n_ - 1, j + band_hi);
                for (int k = j + 1; k <= khi; ++k) ab_[idx(i, k)] -= m * ab_[idx(j, k)];
            }
        }
        factored_ = true;
    }

    template <class Rhs>
    void solve(std::vector<Rhs>& b) const {
        if (!factored_) throw SolverError("banded LU: solve before factor");
        const int band_hi = kl_ + ku_;
        for (int j = 0; j < n_; ++j) {
            if (piv_[j] != j) std::swap(b[j], b[piv_[j]]);
            int ilim = std::min(n_ - 1, j + kl_);
            for (int i = j + 1; i <= ilim; ++i) b[i] -= ab_[idx(i, j)] * b[j];
        }
        for (int j = n_ - 1; j >= 0; --j) {
            int khi = std::min(n_ - 1, j + band_hi);
            for (int k = j + 1; k <= khi; ++k) b[j] -= ab_[idx(j, k)] * b[k];
            b[j] /= ab_[idx(j, j)];
        }
    }

    int size() const { return n_; }

private:
    static double mag(const Scalar& s) { return std::abs(s); }

    size_t idx(int i, int j) const {
        int r = kl_ + ku_ + i - j;
        return static_cast<size_t>(j) * ldab_ + r;
    }

    int n_, kl_, ku_, ldab_;
    std::vector<Scalar> ab_;
    std::vector<int> piv_;
    bool factored_ = false;
};

using BandedLUc = BandedLU<std::complex<double>>;
using BandedLUd = BandedLU<double>;

} // namespace rnls
