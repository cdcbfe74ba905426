#pragma once

// Limit laws of Brownian motion on a cell of the observation grid.
//
// Every function here works in dimensionless units: the cell half-width and
// the diffusion coefficient are one, time is measured in units of
// (half-width / sigma)^2 and positions in units of the half-width. The
// dimensioned classes at the bottom rescale.
//
// Two representations of the killed heat kernel on (-1, 1) are used:
//   images   sum_j (-1)^j phi_z(y - 2j)                  converges fast for small z
//   spectral sum_k cos((2k+1) pi y / 2) exp(-lambda_k z)  converges fast for large z
// with lambda_k = (2k+1)^2 pi^2 / 8, switching at z = series_switch.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "gridrv/errors.hpp"
#include "gridrv/numerics.hpp"
#include "gridrv/random.hpp"

namespace gridrv::limit_law {

inline constexpr double default_tol = 1e-8;
inline constexpr double series_switch = 1.0;
inline constexpr std::size_t table_points = 4097;

namespace detail {

inline constexpr double pi = std::numbers::pi;
inline constexpr double lambda0 = pi * pi / 8.0;

inline double eigenvalue(int k)
{
    const double m = 2.0 * k + 1.0;
    return m * m * lambda0;
}

inline void require_finite(double v, const char* what)
{
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

// Hard cap on series length; never reached for admissible arguments.
inline constexpr int max_terms = 100000;

} // namespace detail

//---------------------------------------------------------------------------//
// Confined (killed) kernel
//---------------------------------------------------------------------------//

inline double confined_kernel_images(double z, double y, double tol = default_tol)
{
    const double norm = 1.0 / std::sqrt(2.0 * detail::pi * z);
    double sum = std::exp(-y * y / (2.0 * z));
    for (int j = 1; j < detail::max_terms; ++j) {
        const double a = std::exp(-(y - 2.0 * j) * (y - 2.0 * j) / (2.0 * z));
        const double b = std::exp(-(y + 2.0 * j) * (y + 2.0 * j) / (2.0 * z));
        sum += (j % 2 ? -1.0 : 1.0) * (a + b);
        if (norm * (a + b) < 0.25 * tol) break;
    }
    return norm * sum;
}

inline double confined_kernel_spectral(double z, double y, double tol = default_tol)
{
    double sum = 0.0;
    for (int k = 0; k < detail::max_terms; ++k) {
        const double e = std::exp(-detail::eigenvalue(k) * z);
        sum += std::cos((2.0 * k + 1.0) * detail::pi * y / 2.0) * e;
        if (e < 0.25 * tol) break;
    }
    return sum;
}

/// Sub-density at y of a standard Brownian motion started at 0 that has not
/// left (-1, 1) by time z.
inline double confined_kernel(double z, double y, double tol = default_tol)
{
    detail::require_finite(z, "z");
    detail::require_finite(y, "y");
    if (z <= 0.0) throw DomainError("confined_kernel: z must be positive");
    if (std::abs(y) >= 1.0) return 0.0;
    const double v = z <= series_switch ? confined_kernel_images(z, y, tol)
                                        : confined_kernel_spectral(z, y, tol);
    return std::max(v, 0.0);
}

/// Mass of the confined kernel on (-1, x].
inline double confined_cdf(double z, double x, double tol = default_tol)
{
    detail::require_finite(z, "z");
    if (z <= 0.0) throw DomainError("confined_cdf: z must be positive");
    if (x <= -1.0) return 0.0;
    x = std::min(x, 1.0);
    double sum = 0.0;
    if (z <= series_switch) {
        const double s = std::sqrt(z);
        sum = numerics::normal_mass(-1.0 / s, x / s);
        for (int j = 1; j < detail::max_terms; ++j) {
            const double a = numerics::normal_mass((-1.0 - 2.0 * j) / s, (x - 2.0 * j) / s);
            const double b = numerics::normal_mass((-1.0 + 2.0 * j) / s, (x + 2.0 * j) / s);
            sum += (j % 2 ? -1.0 : 1.0) * (a + b);
            if (a + b < 0.25 * tol) break;
        }
    } else {
        for (int k = 0; k < detail::max_terms; ++k) {
            const double m = 2.0 * k + 1.0;
            const double e = std::exp(-detail::eigenvalue(k) * z);
            sum += 2.0 / (m * detail::pi) * (std::sin(m * detail::pi * x / 2.0) + (k % 2 ? -1.0 : 1.0)) * e;
            if (e < 0.25 * tol) break;
        }
    }
    return std::max(sum, 0.0);
}

//---------------------------------------------------------------------------//
// Exit time of (-1, 1) from 0
//---------------------------------------------------------------------------//

/// P(S <= z). Small z: term-by-term integral of the alternating first-passage
/// density series, 2 sum_k (-1)^k erfc((2k+1)/sqrt(2z)). Large z: spectral.
inline double unit_exit_cdf(double z, double tol = default_tol)
{
    if (std::isnan(z)) throw DomainError("exit_time_cdf: z is NaN");
    if (z < 0.0) throw DomainError("exit_time_cdf: z must be nonnegative");
    if (z == 0.0) return 0.0;
    if (std::isinf(z)) return 1.0;
    if (z <= series_switch) {
        const double r = 1.0 / std::sqrt(2.0 * z);
        double sum = 0.0;
        for (int k = 0; k < detail::max_terms; ++k) {
            const double e = std::erfc((2.0 * k + 1.0) * r);
            sum += (k % 2 ? -e : e);
            if (2.0 * e < 0.25 * tol) break;
        }
        return std::clamp(2.0 * sum, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 0; k < detail::max_terms; ++k) {
        const double e = std::exp(-detail::eigenvalue(k) * z) / (2.0 * k + 1.0);
        sum += (k % 2 ? -e : e);
        if (4.0 / detail::pi * e < 0.25 * tol) break;
    }
    return std::clamp(1.0 - 4.0 / detail::pi * sum, 0.0, 1.0);
}

/// P(S > z), evaluated without cancellation for large z.
inline double unit_exit_survival(double z, double tol = default_tol)
{
    if (z <= series_switch) return 1.0 - unit_exit_cdf(z, tol);
    double sum = 0.0;
    for (int k = 0; k < detail::max_terms; ++k) {
        const double e = std::exp(-detail::eigenvalue(k) * z) / (2.0 * k + 1.0);
        sum += (k % 2 ? -e : e);
        if (4.0 / detail::pi * e < 0.25 * tol) break;
    }
    return std::max(4.0 / detail::pi * sum, 0.0);
}

inline double unit_exit_density(double z, double tol = default_tol)
{
    if (std::isnan(z) || z < 0.0) throw DomainError("exit_time_density: z must be nonnegative");
    if (z == 0.0 || std::isinf(z)) return 0.0;
    double sum = 0.0;
    if (z <= series_switch) {
        const double norm = 2.0 / std::sqrt(2.0 * detail::pi * z * z * z);
        for (int k = 0; k < detail::max_terms; ++k) {
            const double m = 2.0 * k + 1.0;
            const double e = norm * m * std::exp(-m * m / (2.0 * z));
            sum += (k % 2 ? -e : e);
            if (e < 0.25 * tol) break;
        }
    } else {
        for (int k = 0; k < detail::max_terms; ++k) {
            const double m = 2.0 * k + 1.0;
            const double e = m * detail::pi / 2.0 * std::exp(-detail::eigenvalue(k) * z);
            sum += (k % 2 ? -e : e);
            if (e < 0.25 * tol) break;
        }
    }
    return std::max(sum, 0.0);
}

/// Inverse-CDF sampler for the unit exit time: O(1) table in the bulk,
/// analytic inversions in both tails.
class UnitExitSampler {
public:
    static constexpr double z_lower = 0.1;
    static constexpr double z_upper = 2.0;

    UnitExitSampler()
    {
        constexpr double tight = 1e-15;
        u_lo_ = unit_exit_cdf(z_lower, tight);
        u_hi_ = unit_exit_cdf(z_upper, tight);
        const std::size_t n = table_points;
        std::vector<double> q(n), d(n);
        const double h = (u_hi_ - u_lo_) / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = u_lo_ + h * static_cast<double>(i);
            q[i] = exact_quantile(u, i == 0 ? z_lower : q[i - 1]);
            d[i] = 1.0 / unit_exit_density(q[i], tight);
        }
        table_ = numerics::UniformQuantileTable(u_lo_, u_hi_, q, d);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double u = u_lo_ + h * (static_cast<double>(i) + 0.5);
            max_interp_error_ = std::max(max_interp_error_, std::abs(table_(u) - exact_quantile(u, q[i])));
        }
    }

    /// Process-wide instance; built once, immutable afterwards.
    static const UnitExitSampler& instance()
    {
        static const UnitExitSampler sampler;
        return sampler;
    }

    double quantile(double u) const
    {
        if (u < u_lo_) {
            const double r = boost::math::erfc_inv(0.5 * u);
            return 1.0 / (2.0 * r * r);
        }
        if (u > u_hi_) return std::log(4.0 / (detail::pi * (1.0 - u))) / detail::lambda0;
        return table_(u);
    }

    /// Quantile by Newton iteration on the series, for validation of the table.
    static double exact_quantile(double u, double guess = 1.0)
    {
        constexpr double tight = 1e-15;
        return numerics::solve_increasing(
            [&](double z) {
                return std::pair{unit_exit_cdf(z, tight) - u, unit_exit_density(z, tight)};
            },
            0.0, 60.0, guess, 1e-15);
    }

    /// Largest |table - exact| observed at segment midpoints at build time.
    double max_interpolation_error() const { return max_interp_error_; }
    double table_lower() const { return u_lo_; }
    double table_upper() const { return u_hi_; }

private:
    double u_lo_ = 0.0;
    double u_hi_ = 1.0;
    numerics::UniformQuantileTable table_;
    double max_interp_error_ = 0.0;
};

struct ExitDraw {
    double time;
    int side; ///< +1 upper boundary, -1 lower boundary
};

/// Exit of sigma*W from (-c_half, c_half) started at 0. Time and side are
/// independent in this symmetric driftless case.
inline ExitDraw sample_exit(Stream& stream, double c_half, double sigma)
{
    int side = 1;
    const double u = stream.uniform_open_with_sign(side);
    const double scale = c_half * c_half / (sigma * sigma);
    return {scale * UnitExitSampler::instance().quantile(u), side};
}

//---------------------------------------------------------------------------//
// Overshoot density h
//---------------------------------------------------------------------------//

/// h(y): the time integral of the confined kernel over (0, inf), with
/// absolute error <= tol. The segment (0, series_switch] is integrated with
/// adaptive Gauss-Kronrod in s = sqrt(z), which removes the z^{-1/2}
/// singularity; the spectral tail on [series_switch, inf) is integrated term
/// by term in closed form.
inline double eval_h(double y, double tol = default_tol)
{
    detail::require_finite(y, "y");
    if (!(tol > 0.0)) throw DomainError("eval_h: tol must be positive");
    if (std::abs(y) >= 1.0) return 0.0;

    const double amp = std::sqrt(2.0 / detail::pi);
    const double series_tol = 0.0625 * tol;
    auto integrand = [y, amp, series_tol](double s) {
        if (s <= 0.0) return y == 0.0 ? amp : 0.0;
        const double two_s2 = 2.0 * s * s;
        double sum = std::exp(-y * y / two_s2);
        for (int j = 1; j < detail::max_terms; ++j) {
            const double a = std::exp(-(y - 2.0 * j) * (y - 2.0 * j) / two_s2);
            const double b = std::exp(-(y + 2.0 * j) * (y + 2.0 * j) / two_s2);
            sum += (j % 2 ? -1.0 : 1.0) * (a + b);
            if (amp * (a + b) < series_tol) break;
        }
        return amp * sum;
    };
    const double near = numerics::integrate(integrand, 0.0, std::sqrt(series_switch), 0.5 * tol).value;

    double tail = 0.0;
    for (int k = 0; k < detail::max_terms; ++k) {
        const double lk = detail::eigenvalue(k);
        const double e = std::exp(-lk * series_switch) / lk;
        tail += std::cos((2.0 * k + 1.0) * detail::pi * y / 2.0) * e;
        if (e < 0.125 * tol) break;
    }
    return near + tail;
}

/// Candidate closed form 1 - |y| on [-1, 1]. Only trusted after comparison
/// with eval_h (see EtaDistribution).
inline double eval_h_closed(double y)
{
    const double a = std::abs(y);
    return a <= 1.0 ? 1.0 - a : 0.0;
}

inline double eta_cdf_closed(double y)
{
    if (y <= -1.0) return 0.0;
    if (y >= 1.0) return 1.0;
    return y <= 0.0 ? 0.5 * (1.0 + y) * (1.0 + y) : 1.0 - 0.5 * (1.0 - y) * (1.0 - y);
}

inline double eta_quantile_closed(double u)
{
    return u < 0.5 ? -1.0 + std::sqrt(2.0 * u) : 1.0 - std::sqrt(2.0 * (1.0 - u));
}

/// Tabulated law of eta on a 4097-point grid over [-1, 1].
class EtaDistribution {
public:
    explicit EtaDistribution(double tol = default_tol) : tol_(tol)
    {
        if (!(tol > 0.0)) throw DomainError("EtaDistribution: tol must be positive");
        const std::size_t n = table_points;
        step_ = 2.0 / static_cast<double>(n - 1);
        y_.resize(n);
        h_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            y_[i] = -1.0 + step_ * static_cast<double>(i);
            h_[i] = eval_h(y_[i], tol);
            max_dev_ = std::max(max_dev_, std::abs(h_[i] - eval_h_closed(y_[i])));
        }
        y_[n - 1] = 1.0;
        mass_ = numerics::simpson(h_, step_);
        std::vector<double> y2h(n);
        for (std::size_t i = 0; i < n; ++i) y2h[i] = y_[i] * y_[i] * h_[i];
        variance_ = numerics::simpson(y2h, step_) / mass_;

        std::vector<double> cdf(n, 0.0);
        for (std::size_t i = 1; i < n; ++i) cdf[i] = cdf[i - 1] + 0.5 * step_ * (h_[i - 1] + h_[i]);
        const double total = cdf.back();
        std::vector<double> slopes(n);
        for (std::size_t i = 0; i < n; ++i) {
            cdf[i] /= total;
            slopes[i] = h_[i] / total;
        }
        cdf_ = numerics::CdfTable(y_, std::move(cdf), std::move(slopes));
        verified_ = max_dev_ <= 10.0 * tol_;
    }

    double tol() const { return tol_; }
    std::span<const double> grid() const { return y_; }
    std::span<const double> density() const { return h_; }
    std::span<const double> cdf_values() const { return cdf_.values(); }

    /// Simpson integral of the tabulated density.
    double mass() const { return mass_; }
    double variance() const { return variance_; }
    double max_closed_form_deviation() const { return max_dev_; }
    bool closed_form_verified() const { return verified_; }

    double cdf(double y) const { return verified_ ? eta_cdf_closed(y) : cdf_(y); }
    double tabulated_cdf(double y) const { return cdf_(y); }

    double sample(Stream& stream) const
    {
        const double u = stream.uniform_open();
        return verified_ ? eta_quantile_closed(u) : cdf_.inverse(u);
    }

    double sample_tabulated(Stream& stream) const { return cdf_.inverse(stream.uniform_open()); }

private:
    double tol_;
    double step_ = 0.0;
    std::vector<double> y_;
    std::vector<double> h_;
    numerics::CdfTable cdf_;
    double mass_ = 0.0;
    double variance_ = 0.0;
    double max_dev_ = 0.0;
    bool verified_ = false;
};

inline double sample_eta(Stream& stream, const EtaDistribution& eta) { return eta.sample(stream); }

//---------------------------------------------------------------------------//
// Dimensioned exit time and renewal age
//---------------------------------------------------------------------------//

/// Integral of the unit survival function over [0, w].
inline double unit_survival_integral(double w, double tol = default_tol)
{
    if (std::isnan(w) || w < 0.0) throw DomainError("renewal_age_cdf: z must be nonnegative");
    if (w == 0.0) return 0.0;
    auto surv = [tol](double u) { return unit_exit_survival(u, 0.01 * tol); };
    const double cut = std::min(w, series_switch);
    double total = numerics::integrate(surv, 0.0, cut, 0.25 * tol).value;
    if (w > series_switch) {
        const double upper = std::min(w, 60.0);
        total += numerics::integrate(surv, series_switch, upper, 0.25 * tol).value;
    }
    return total;
}

/// Exit time of sigma*W from (-c_half, c_half) started at 0.
class ExitTimeDistribution {
public:
    ExitTimeDistribution(double c_half, double sigma, double tol = default_tol)
        : c_half_(c_half), sigma_(sigma), tol_(tol)
    {
        if (!(c_half > 0.0) || !(sigma > 0.0) || !std::isfinite(c_half) || !std::isfinite(sigma)) {
            throw DomainError("ExitTimeDistribution: c_half and sigma must be positive");
        }
        scale_ = c_half * c_half / (sigma * sigma);
    }

    double c_half() const { return c_half_; }
    double sigma() const { return sigma_; }
    /// Time unit (c_half/sigma)^2, equal to the exact mean.
    double scale() const { return scale_; }

    double cdf(double z) const { return unit_exit_cdf(check(z) / scale_, tol_); }
    double survival(double z) const { return unit_exit_survival(check(z) / scale_, tol_); }
    double density(double z) const { return unit_exit_density(check(z) / scale_, tol_) / scale_; }

    /// Mean obtained by integrating 1 - F.
    double mean_from_survival() const { return scale_ * unit_survival_integral(60.0, tol_); }

    ExitDraw sample(Stream& stream) const { return sample_exit(stream, c_half_, sigma_); }

    std::vector<std::pair<double, double>> tabulate(double z_max, std::size_t points) const
    {
        std::vector<std::pair<double, double>> out;
        out.reserve(points);
        for (std::size_t i = 0; i < points; ++i) {
            const double z = z_max * static_cast<double>(i) / static_cast<double>(points - 1);
            out.emplace_back(z, cdf(z));
        }
        return out;
    }

private:
    static double check(double z)
    {
        if (std::isnan(z) || z < 0.0) throw DomainError("exit_time_cdf: z must be nonnegative");
        return z;
    }

    double c_half_;
    double sigma_;
    double tol_;
    double scale_ = 1.0;
};

inline double exit_time_cdf(double z, double c_half, double sigma, double tol = default_tol)
{
    return ExitTimeDistribution(c_half, sigma, tol).cdf(z);
}

/// Limit law G of the rescaled time since the last observation,
/// G(z) = (sigma^2/c^2) int_0^z (1 - F(u)) du.
class RenewalAgeDistribution {
public:
    static constexpr double w_max = 10.0;

    RenewalAgeDistribution(double c_half, double sigma, double tol = default_tol)
        : exit_(c_half, sigma, tol), tol_(tol)
    {
        const std::size_t n = table_points;
        std::vector<double> w(n), g(n, 0.0), d(n);
        const double h = w_max / static_cast<double>(n - 1);
        auto surv = [tol](double u) { return unit_exit_survival(u, 0.01 * tol); };
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = h * static_cast<double>(i);
            d[i] = unit_exit_survival(w[i], 0.01 * tol);
            if (i > 0) g[i] = g[i - 1] + numerics::integrate(surv, w[i - 1], w[i], 0.01 * tol).value;
        }
        table_ = numerics::CdfTable(std::move(w), std::move(g), std::move(d));
    }

    const ExitTimeDistribution& exit_time() const { return exit_; }

    double cdf(double z) const
    {
        if (std::isnan(z) || z < 0.0) throw DomainError("renewal_age_cdf: z must be nonnegative");
        if (std::isinf(z)) return 1.0;
        return std::min(1.0, unit_survival_integral(z / exit_.scale(), tol_));
    }

    double tabulated_cdf(double z) const
    {
        const double w = z / exit_.scale();
        if (w <= w_max) return table_(w);
        return 1.0 - 32.0 / (detail::pi * detail::pi * detail::pi) * std::exp(-detail::lambda0 * w);
    }

    double sample(Stream& stream) const
    {
        const double u = stream.uniform_open();
        double w;
        if (u < table_.upper_value()) {
            w = table_.inverse(u);
        } else {
            w = std::log(32.0 / (detail::pi * detail::pi * detail::pi * (1.0 - u))) / detail::lambda0;
            w = std::max(w, w_max);
        }
        return w * exit_.scale();
    }

private:
    ExitTimeDistribution exit_;
    double tol_;
    numerics::CdfTable table_;
};

/// G for unit half-width and unit sigma.
inline double renewal_age_cdf(double z, double tol = default_tol)
{
    if (std::isnan(z) || z < 0.0) throw DomainError("renewal_age_cdf: z must be nonnegative");
    if (std::isinf(z)) return 1.0;
    return std::min(1.0, unit_survival_integral(z, tol));
}

//---------------------------------------------------------------------------//
// Position given survival
//---------------------------------------------------------------------------//

/// Draw from confined_kernel(z, .) / (1 - F(z)) by inverting the exact
/// position CDF.
inline double sample_confined_position(double z, Stream& stream)
{
    detail::require_finite(z, "z");
    if (z <= 0.0) throw DomainError("sample_confined_position: z must be positive");
    constexpr double tight = 1e-14;
    const double u = stream.uniform_open();
    const double target = u * confined_cdf(z, 1.0, tight);
    const double x = numerics::solve_increasing(
        [&](double x) { return std::pair{confined_cdf(z, x, tight) - target, confined_kernel(z, x, tight)}; },
        -1.0, 1.0, 0.0, 1e-14);
    return std::clamp(x, std::nextafter(-1.0, 0.0), std::nextafter(1.0, 0.0));
}

} // namespace gridrv::limit_law
