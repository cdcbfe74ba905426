#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gridrv/errors.hpp"

namespace gridrv::numerics {

inline constexpr double inv_sqrt2 = 0.70710678118654752440;

struct QuadResult {
    double value;
    double error;
};

namespace detail {

template <class F>
QuadResult integrate_panel(F& f, double a, double b, double abs_tol, unsigned depth)
{
    // Non-adaptive call; Boost reports the error on the [-1, 1] image of the
    // panel, so it is rescaled here.
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err);
    err *= 0.5 * (b - a);
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(v);
    if (depth == 0 || err <= std::max(abs_tol, floor)) return {v, err};
    const double mid = 0.5 * (a + b);
    const auto l = integrate_panel(f, a, mid, 0.5 * abs_tol, depth - 1);
    const auto r = integrate_panel(f, mid, b, 0.5 * abs_tol, depth - 1);
    return {l.value + r.value, l.error + r.error};
}

} // namespace detail

/// Adaptive Gauss-Kronrod (7/15) on [a, b] with an absolute error target,
/// bisecting panels whose error estimate exceeds their share of abs_tol.
template <class F>
QuadResult integrate(F&& f, double a, double b, double abs_tol, unsigned max_depth = 30)
{
    if (a == b) return {0.0, 0.0};
    return detail::integrate_panel(f, a, b, abs_tol, max_depth);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * inv_sqrt2); }

/// P(a < Z <= b) for standard normal Z, computed on the side of the tail that
/// keeps both erfc values small.
inline double normal_mass(double a, double b)
{
    if (b <= a) return 0.0;
    if (a >= 0.0) {
        return 0.5 * (std::erfc(a * inv_sqrt2) - std::erfc(b * inv_sqrt2));
    }
    if (b <= 0.0) {
        return 0.5 * (std::erfc(-b * inv_sqrt2) - std::erfc(-a * inv_sqrt2));
    }
    return 1.0 - 0.5 * std::erfc(-a * inv_sqrt2) - 0.5 * std::erfc(b * inv_sqrt2);
}

/// Root of an increasing function on [lo, hi] by Newton steps safeguarded
/// with bisection. `fdf` returns {f(x) - target, f'(x)}.
template <class FdF>
double solve_increasing(FdF&& fdf, double lo, double hi, double x0, double xtol = 1e-14,
                        int max_iter = 200)
{
    double x = std::clamp(x0, lo, hi);
    for (int it = 0; it < max_iter; ++it) {
        const auto [g, dg] = fdf(x);
        if (g == 0.0) return x;
        if (g > 0.0) hi = x; else lo = x;
        double next = (dg > 0.0 && std::isfinite(dg)) ? x - g / dg : lo - 1.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= xtol * std::max(1.0, std::abs(x)) || hi - lo <= xtol) {
            return next;
        }
        x = next;
    }
    return x;
}

/// Cubic Hermite interpolation on one segment.
inline double hermite(double t, double h, double y0, double y1, double d0, double d1)
{
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1
        + (t3 - t2) * h * d1;
}

inline double hermite_derivative(double t, double h, double y0, double y1, double d0, double d1)
{
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * y0 + (-6 * t2 + 6 * t) * y1) / h + (3 * t2 - 4 * t + 1) * d0
        + (3 * t2 - 2 * t) * d1;
}

/// Fritsch-Carlson limiter: adjusts node slopes in place so that the Hermite
/// interpolant of nondecreasing data is nondecreasing.
inline void limit_monotone_slopes(std::span<const double> x, std::span<const double> y,
                                  std::span<double> d)
{
    const std::size_t n = x.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double delta = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        if (delta <= 0.0) {
            d[i] = 0.0;
            d[i + 1] = 0.0;
            continue;
        }
        d[i] = std::max(d[i], 0.0);
        d[i + 1] = std::max(d[i + 1], 0.0);
        const double a = d[i] / delta;
        const double b = d[i + 1] / delta;
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            d[i] = tau * a * delta;
            d[i + 1] = tau * b * delta;
        }
    }
}

/// Tabulated CDF on increasing nodes with monotone cubic Hermite
/// interpolation; inversion by bracket search plus Newton on the segment.
class CdfTable {
public:
    CdfTable() = default;

    /// `slopes` are the density values at the nodes; they are limited to keep
    /// the interpolant monotone.
    CdfTable(std::vector<double> nodes, std::vector<double> cdf, std::vector<double> slopes)
        : x_(std::move(nodes)), f_(std::move(cdf)), d_(std::move(slopes))
    {
        if (x_.size() < 2 || x_.size() != f_.size() || x_.size() != d_.size()) {
            throw std::invalid_argument("CdfTable: node/value size mismatch");
        }
        for (std::size_t i = 1; i < f_.size(); ++i) f_[i] = std::max(f_[i], f_[i - 1]);
        limit_monotone_slopes(x_, f_, d_);
    }

    std::span<const double> nodes() const { return x_; }
    std::span<const double> values() const { return f_; }
    double lower() const { return x_.front(); }
    double upper() const { return x_.back(); }
    double lower_value() const { return f_.front(); }
    double upper_value() const { return f_.back(); }

    double operator()(double x) const
    {
        if (x <= x_.front()) return f_.front();
        if (x >= x_.back()) return f_.back();
        const std::size_t i = segment_of_x(x);
        const double h = x_[i + 1] - x_[i];
        return hermite((x - x_[i]) / h, h, f_[i], f_[i + 1], d_[i], d_[i + 1]);
    }

    double inverse(double u) const
    {
        if (u <= f_.front()) return x_.front();
        if (u >= f_.back()) return x_.back();
        const auto it = std::upper_bound(f_.begin(), f_.end(), u);
        std::size_t i = static_cast<std::size_t>(it - f_.begin());
        i = std::clamp<std::size_t>(i, 1, f_.size() - 1) - 1;
        while (i + 1 < f_.size() && f_[i + 1] == f_[i]) ++i;
        const double h = x_[i + 1] - x_[i];
        const double span = f_[i + 1] - f_[i];
        if (span <= 0.0) return x_[i];
        const double t0 = (u - f_[i]) / span;
        const double t = solve_increasing(
            [&](double t) {
                return std::pair{hermite(t, h, f_[i], f_[i + 1], d_[i], d_[i + 1]) - u,
                                 hermite_derivative(t, h, f_[i], f_[i + 1], d_[i], d_[i + 1]) * h};
            },
            0.0, 1.0, t0, 1e-15);
        return x_[i] + t * h;
    }

private:
    std::size_t segment_of_x(double x) const
    {
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        return static_cast<std::size_t>(it - x_.begin()) - 1;
    }

    std::vector<double> x_;
    std::vector<double> f_;
    std::vector<double> d_;
};

/// Quantile function tabulated on equally spaced probabilities with exact
/// node slopes; evaluation is O(1).
class UniformQuantileTable {
public:
    UniformQuantileTable() = default;

    UniformQuantileTable(double u_lo, double u_hi, std::vector<double> quantiles,
                         std::vector<double> slopes)
        : u_lo_(u_lo), u_hi_(u_hi), q_(std::move(quantiles)), d_(std::move(slopes))
    {
        if (q_.size() < 2 || q_.size() != d_.size() || !(u_hi > u_lo)) {
            throw std::invalid_argument("UniformQuantileTable: bad table");
        }
        h_ = (u_hi_ - u_lo_) / static_cast<double>(q_.size() - 1);
        std::vector<double> u(q_.size());
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = u_lo_ + h_ * static_cast<double>(i);
        limit_monotone_slopes(u, q_, d_);
    }

    double lower() const { return u_lo_; }
    double upper() const { return u_hi_; }
    std::size_t size() const { return q_.size(); }

    /// Requires lower() <= u <= upper().
    double operator()(double u) const
    {
        const double s = (u - u_lo_) / h_;
        std::size_t i = static_cast<std::size_t>(s);
        if (i >= q_.size() - 1) i = q_.size() - 2;
        const double t = s - static_cast<double>(i);
        return hermite(t, h_, q_[i], q_[i + 1], d_[i], d_[i + 1]);
    }

private:
    double u_lo_ = 0.0;
    double u_hi_ = 1.0;
    double h_ = 1.0;
    std::vector<double> q_;
    std::vector<double> d_;
};

/// Composite Simpson rule on an odd number of equally spaced samples.
inline double simpson(std::span<const double> values, double step)
{
    const std::size_t n = values.size();
    if (n < 3 || n % 2 == 0) throw std::invalid_argument("simpson: need an odd sample count >= 3");
    double s = values.front() + values.back();
    for (std::size_t i = 1; i + 1 < n; ++i) s += values[i] * ((i % 2) ? 4.0 : 2.0);
    return s * step / 3.0;
}

} // namespace gridrv::numerics
