#pragma once

#include <algorithm>
#include <complex>
#include <vector>

#include "rnls/errors.hpp"

namespace rnls {

// Natural cubic spline through (x_i, y_i), x strictly increasing.
// Evaluation outside [x_front, x_back] returns zero; radial callers augment
// the node set with r=0 (even extrapolation) and r_max (decay) so the
// physically relevant range is always interior.
template <class T>
class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(std::vector<double> x, std::vector<T> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const size_t n = x_.size();
        if (n < 3 || y_.size() != n) throw ConfigError("cubic spline: need >= 3 nodes");
        m_.assign(n, T(0));
        // Tridiagonal system for second derivatives, natural end conditions.
        std::vector<double> diag(n, 0.0), sub(n, 0.0), sup(n, 0.0);
        std::vector<T> rhs(n, T(0));
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        for (size_t i = 1; i + 1 < n; ++i) {
            double hl = x_[i] - x_[i - 1];
            double hr = x_[i + 1] - x_[i];
            sub[i] = hl;
            diag[i] = 2.0 * (hl + hr);
            sup[i] = hr;
            rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
        }
        // Thomas sweep.
        for (size_t i = 1; i < n; ++i) {
            double w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m_[n - 1] = rhs[n - 1] / diag[n - 1];
        for (size_t i = n - 1; i-- > 0;) m_[i] = (rhs[i] - sup[i] * m_[i + 1]) / diag[i];
    }

    T operator()(double x) const {
        if (x_.empty()) return T(0);
        if (x < x_.front() || x > x_.back()) return T(0);
        size_t hi = static_cast<size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
        if (hi == 0) hi = 1;
        if (hi >= x_.size()) hi = x_.size() - 1;
        size_t lo = hi - 1;
        double h = x_[hi] - x_[lo];
        double a = (x_[hi] - x) / h;
        double b = (x - x_[lo]) / h;
        return a * y_[lo] + b * y_[hi] +
               ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * (h * h / 6.0);
    }

private:
    std::vector<double> x_;
    std::vector<T> y_;
    std::vector<T> m_;
};

using CubicSplineC = CubicSpline<std::complex<double>>;
using CubicSplineD = CubicSpline<double>;

} // namespace rnls
