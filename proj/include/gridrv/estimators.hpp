#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gridrv/errors.hpp"
#include "gridrv/grid.hpp"
#include "gridrv/model.hpp"
#include "gridrv/path.hpp"
#include "gridrv/scheme.hpp"

namespace gridrv {

/// Sum of squared increments over observations with 0 < tau_j <= t.
inline double realized_variance(const SampledPath& sampled, double t)
{
    const auto& obs = sampled.observations;
    double rv = 0.0;
    for (std::size_t j = 1; j < obs.size() && obs[j].time <= t; ++j) {
        const double d = obs[j].value - obs[j - 1].value;
        rv += d * d;
    }
    return rv;
}

struct QVDecomposition {
    double continuous = 0.0; ///< int_0^t sigma^2 ds
    double jump = 0.0;       ///< sum of squared jumps up to t
    double total = 0.0;
};

/// [X,X]_t = int_0^t sigma_s^2 ds + sum_{S_p <= t} dX_{S_p}^2.
inline QVDecomposition quadratic_variation(const ModelSpec& spec, std::span<const JumpRecord> jumps, double t)
{
    QVDecomposition qv;
    qv.continuous = spec.integrated_variance(t);
    for (const auto& j : jumps) {
        if (j.time <= t) qv.jump += j.size * j.size;
    }
    qv.total = qv.continuous + qv.jump;
    return qv;
}

struct StandardizedStat {
    double value;   ///< eps^{-1} (RV - [X,X]_t)
    double t;
    GridScheme grid;
    double rv;
    QVDecomposition qv;
};

inline StandardizedStat standardized_stat(const SampledPath& sampled, const ModelSpec& spec,
                                          std::span<const JumpRecord> jumps, double t, const GridScheme& grid)
{
    const double rv = realized_variance(sampled, t);
    const auto qv = quadratic_variation(spec, jumps, t);
    return {(rv - qv.total) / grid.epsilon, t, grid, rv, qv};
}

/// eps^{-1} ([X,X]_t - [X,X]_{tau^-(t)}): the part of the quadratic
/// variation not yet seen by the last observation.
inline double boundary_term(const SampledPath& sampled, const ModelSpec& spec, double t)
{
    const double tau = last_observation_time(sampled, t);
    double q = spec.integrated_variance(t) - spec.integrated_variance(tau);
    for (const auto& j : sampled.jumps) {
        if (j.time > tau && j.time <= t) q += j.size * j.size;
    }
    return q / sampled.grid.epsilon;
}

struct EquidistantRv {
    double rv;
    double qv;
    double standardized; ///< sqrt(n) (RV - [X,X]_t)
    std::size_t n;
};

/// Realized variance over X_{j/n}, j <= floor(n t): the deterministic-time
/// baseline.
inline EquidistantRv equidistant_rv(const InternalPath& path, const ModelSpec& spec, std::size_t n, double t)
{
    if (n == 0) throw ConfigError("equidistant_rv: n must be positive");
    const double step = 1.0 / static_cast<double>(n);
    if (max_spacing(path) > step * (1.0 + 1e-9)) {
        throw ConfigError("equidistant_rv: path resolution coarser than 1/n");
    }
    if (t > path.end_time()) throw DomainError("equidistant_rv: t beyond the simulated path");
    const auto m = static_cast<std::size_t>(std::floor(static_cast<double>(n) * t + 1e-9));
    double rv = 0.0;
    double prev = value_at(path, 0.0);
    for (std::size_t j = 1; j <= m; ++j) {
        const double x = value_at(path, std::min(static_cast<double>(j) * step, path.end_time()));
        rv += (x - prev) * (x - prev);
        prev = x;
    }
    const double qv = quadratic_variation(spec, path.jumps, t).total;
    return {rv, qv, std::sqrt(static_cast<double>(n)) * (rv - qv), n};
}

} // namespace gridrv
