#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "gridrv/errors.hpp"
#include "gridrv/numerics.hpp"
#include "gridrv/random.hpp"

namespace gridrv {

enum class FunctionFamily { constant, linear, sinusoidal };

inline const char* to_string(FunctionFamily f)
{
    switch (f) {
    case FunctionFamily::constant: return "constant";
    case FunctionFamily::linear: return "linear";
    case FunctionFamily::sinusoidal: return "sinusoidal";
    }
    return "?";
}

/// Deterministic function of time from a small closed family:
///   constant    f(t) = value
///   linear      f(t) = intercept + slope * t
///   sinusoidal  f(t) = mean + amplitude * sin(2 pi frequency t + phase)
/// Integrals of f and f^2 from 0 are available in closed form.
class DeterministicFunction {
public:
    DeterministicFunction() = default;

    static DeterministicFunction constant(double value)
    {
        return DeterministicFunction(FunctionFamily::constant, {value, 0.0, 0.0, 0.0});
    }
    static DeterministicFunction linear(double intercept, double slope)
    {
        return DeterministicFunction(FunctionFamily::linear, {intercept, slope, 0.0, 0.0});
    }
    static DeterministicFunction sinusoidal(double mean, double amplitude, double frequency, double phase)
    {
        return DeterministicFunction(FunctionFamily::sinusoidal, {mean, amplitude, frequency, phase});
    }

    FunctionFamily family() const { return family_; }
    const std::array<double, 4>& params() const { return p_; }

    double operator()(double t) const
    {
        switch (family_) {
        case FunctionFamily::constant: return p_[0];
        case FunctionFamily::linear: return p_[0] + p_[1] * t;
        case FunctionFamily::sinusoidal: return p_[0] + p_[1] * std::sin(omega() * t + p_[3]);
        }
        return 0.0;
    }

    bool is_constant() const
    {
        return family_ == FunctionFamily::constant || (family_ == FunctionFamily::linear && p_[1] == 0.0)
            || (family_ == FunctionFamily::sinusoidal && (p_[1] == 0.0 || p_[2] == 0.0));
    }

    bool identically_zero() const { return is_constant() && (*this)(0.0) == 0.0; }

    /// int_0^t f(s)^2 ds
    double integral_of_square(double t) const
    {
        const double a = p_[0];
        const double b = p_[1];
        switch (family_) {
        case FunctionFamily::constant: return a * a * t;
        case FunctionFamily::linear: return a * a * t + a * b * t * t + b * b * t * t * t / 3.0;
        case FunctionFamily::sinusoidal: {
            const double w = omega();
            const double phi = p_[3];
            if (w == 0.0) {
                const double v = a + b * std::sin(phi);
                return v * v * t;
            }
            return a * a * t + 2.0 * a * b * (std::cos(phi) - std::cos(w * t + phi)) / w
                + b * b * (0.5 * t - (std::sin(2.0 * (w * t + phi)) - std::sin(2.0 * phi)) / (4.0 * w));
        }
        }
        return 0.0;
    }

    /// Same integral by adaptive quadrature; kept for cross-checks.
    double integral_of_square_numeric(double t, double tol = 1e-12) const
    {
        return numerics::integrate([this](double s) { double v = (*this)(s); return v * v; }, 0.0, t, tol).value;
    }

    double sup(double t0, double t1) const { return extreme(t0, t1, true); }
    double inf(double t0, double t1) const { return extreme(t0, t1, false); }

private:
    DeterministicFunction(FunctionFamily f, std::array<double, 4> p) : family_(f), p_(p) {}

    double omega() const { return 2.0 * std::numbers::pi * p_[2]; }

    double extreme(double t0, double t1, bool upper) const
    {
        double best = upper ? std::max((*this)(t0), (*this)(t1)) : std::min((*this)(t0), (*this)(t1));
        if (family_ == FunctionFamily::sinusoidal && omega() != 0.0 && p_[1] != 0.0) {
            // critical points: omega t + phase = pi/2 + k pi
            const double w = omega();
            const double pi = std::numbers::pi;
            double lo = (w * t0 + p_[3] - pi / 2) / pi;
            double hi = (w * t1 + p_[3] - pi / 2) / pi;
            if (lo > hi) std::swap(lo, hi);
            const double k0 = std::ceil(lo);
            const double k1 = std::floor(hi);
            if (k1 - k0 >= 1.0) {
                best = upper ? p_[0] + std::abs(p_[1]) : p_[0] - std::abs(p_[1]);
            } else {
                for (double k = k0; k <= k1; k += 1.0) {
                    const double t = (pi / 2 + k * pi - p_[3]) / w;
                    best = upper ? std::max(best, (*this)(t)) : std::min(best, (*this)(t));
                }
            }
        }
        return best;
    }

    FunctionFamily family_ = FunctionFamily::constant;
    std::array<double, 4> p_{0.0, 0.0, 0.0, 0.0};
};

enum class SizeFamily { constant, normal, uniform };

inline const char* to_string(SizeFamily f)
{
    switch (f) {
    case SizeFamily::constant: return "constant";
    case SizeFamily::normal: return "normal";
    case SizeFamily::uniform: return "uniform";
    }
    return "?";
}

/// Jump-size law: constant(value), normal(mean, sd) or uniform(lo, hi).
struct JumpSizeDistribution {
    SizeFamily family = SizeFamily::constant;
    double a = 0.0;
    double b = 0.0;

    double sample(Stream& stream) const
    {
        switch (family) {
        case SizeFamily::constant: return a;
        case SizeFamily::normal: return a + b * stream.normal();
        case SizeFamily::uniform: return a + (b - a) * stream.uniform();
        }
        return 0.0;
    }
};

struct JumpEvent {
    double time;
    double size;
};

enum class JumpKind { none, poisson, list };

struct JumpSpec {
    JumpKind kind = JumpKind::none;
    DeterministicFunction intensity = DeterministicFunction::constant(0.0);
    JumpSizeDistribution size;
    std::vector<JumpEvent> events;

    static JumpSpec none() { return {}; }
    static JumpSpec poisson(DeterministicFunction intensity, JumpSizeDistribution size)
    {
        JumpSpec s;
        s.kind = JumpKind::poisson;
        s.intensity = intensity;
        s.size = size;
        return s;
    }
    static JumpSpec list(std::vector<JumpEvent> events)
    {
        JumpSpec s;
        s.kind = JumpKind::list;
        s.events = std::move(events);
        return s;
    }
};

/// dX = a(t) dt + sigma(t) dW + dJ on [0, horizon], X_0 = 0.
struct ModelSpec {
    DeterministicFunction drift = DeterministicFunction::constant(0.0);
    DeterministicFunction vol = DeterministicFunction::constant(1.0);
    JumpSpec jumps;
    double horizon = 1.0;

    void validate() const
    {
        if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive and finite");
        if (!(vol.inf(0.0, horizon) > 0.0)) throw ConfigError("volatility must be strictly positive on [0, horizon]");
        if (!std::isfinite(vol.sup(0.0, horizon)) || !std::isfinite(drift.sup(0.0, horizon))
            || !std::isfinite(drift.inf(0.0, horizon))) {
            throw ConfigError("drift and volatility must be finite");
        }
        switch (jumps.kind) {
        case JumpKind::none: break;
        case JumpKind::poisson:
            if (!std::isfinite(jumps.intensity.sup(0.0, horizon))) throw ConfigError("jump intensity must be finite");
            if (jumps.intensity.inf(0.0, horizon) < 0.0) throw ConfigError("jump intensity must be nonnegative");
            if (!std::isfinite(jumps.size.a) || !std::isfinite(jumps.size.b)) throw ConfigError("jump size parameters must be finite");
            if (jumps.size.family == SizeFamily::normal && jumps.size.b < 0.0) throw ConfigError("jump size sd must be nonnegative");
            if (jumps.size.family == SizeFamily::uniform && !(jumps.size.b >= jumps.size.a)) throw ConfigError("uniform jump sizes need lo <= hi");
            break;
        case JumpKind::list:
            for (const auto& e : jumps.events) {
                if (!(e.time > 0.0) || !std::isfinite(e.time) || !std::isfinite(e.size)) {
                    throw ConfigError("jump events need finite positive times and finite sizes");
                }
            }
            break;
        }
    }

    double sup_vol() const { return vol.sup(0.0, horizon); }
    double inf_vol() const { return vol.inf(0.0, horizon); }

    /// int_0^t sigma^2 ds
    double integrated_variance(double t) const { return vol.integral_of_square(t); }
};

/// Clock theta(t) = int_0^t sigma^2 ds of the continuous martingale part and
/// its inverse. In theta time the continuous part is a standard Brownian
/// motion.
class TimeChange {
public:
    explicit TimeChange(const DeterministicFunction& vol) : vol_(vol)
    {
        if (vol.is_constant()) s2_ = vol(0.0) * vol(0.0);
    }

    double operator()(double t) const { return s2_ > 0.0 ? s2_ * t : vol_.integral_of_square(t); }

    double inverse(double theta) const
    {
        if (s2_ > 0.0) return theta / s2_;
        if (theta <= 0.0) return 0.0;
        double hi = 1.0;
        while ((*this)(hi) < theta) hi *= 2.0;
        const double guess = std::min(hi, theta / std::max(vol_(0.0) * vol_(0.0), 1e-300));
        return numerics::solve_increasing(
            [&](double t) { const double v = vol_(t); return std::pair{(*this)(t) - theta, v * v}; },
            0.0, hi, guess, 1e-15);
    }

private:
    DeterministicFunction vol_;
    double s2_ = 0.0;
};

} // namespace gridrv
