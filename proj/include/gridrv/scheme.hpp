#pragma once

// Observation rule: tau_0 = 0 and tau_j is the first time after tau_{j-1}
// at which X leaves the restart cell of X_{tau_{j-1}} (see cell_of).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gridrv/errors.hpp"
#include "gridrv/grid.hpp"
#include "gridrv/path.hpp"

namespace gridrv {

enum class ObservationCause { start, diffusion_exit, jump_exit };

inline const char* to_string(ObservationCause c)
{
    switch (c) {
    case ObservationCause::start: return "start";
    case ObservationCause::diffusion_exit: return "diffusion-exit";
    case ObservationCause::jump_exit: return "jump-exit";
    }
    return "?";
}

struct Observation {
    double time;
    double value;
    ObservationCause cause;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// alpha = eps^{-1} times the continuous displacement between the last
/// observation before S_p and S_p-.
struct OvershootRecord {
    std::size_t jump_index;
    double time;
    double jump_size;
    double alpha;
    bool observed; ///< the jump caused an observation
};

struct SampledPath {
    GridScheme grid;
    double horizon = 0.0;
    std::vector<Observation> observations;
    std::vector<JumpRecord> jumps;
    std::vector<OvershootRecord> overshoots;
    bool truncated = false; ///< path ended before the horizon

    /// Number of observations with 0 < tau_j <= t.
    std::size_t count_until(double t) const
    {
        std::size_t n = 0;
        for (std::size_t j = 1; j < observations.size() && observations[j].time <= t; ++j) ++n;
        return n;
    }
};

/// Walks the internal path, re-evaluating the restart cell after every
/// observation. Boundary contact of a diffusion sample and a jump that ends
/// outside (or on the boundary of) the current cell are observations; a jump
/// that stays inside is not.
inline SampledPath extract_observations(const InternalPath& path, const GridScheme& grid)
{
    grid.validate();
    if (path.points.empty()) throw DomainError("extract_observations: empty path");
    SampledPath out;
    out.grid = grid;
    out.horizon = path.horizon;
    out.jumps = path.jumps;
    out.truncated = path.end_time() < path.horizon;
    out.observations.reserve(path.points.size());

    const auto& first = path.points.front();
    out.observations.push_back({first.time, first.value, ObservationCause::start});
    Cell cell = cell_of(first.value, grid);
    double last_value = first.value;
    double unobserved_jumps = 0.0; // jumps since the last observation
    std::size_t jump_counter = 0;

    auto observe = [&](double t, double v, ObservationCause cause) {
        v = snap_to_grid(v, grid);
        out.observations.push_back({t, v, cause});
        cell = cell_of(v, grid);
        last_value = v;
        unobserved_jumps = 0.0;
    };

    for (std::size_t i = 0; i < path.points.size(); ++i) {
        const auto& p = path.points[i];
        if (i > 0 && leaves(cell, p.value, grid)) observe(p.time, p.value, ObservationCause::diffusion_exit);
        if (!p.is_jump()) continue;

        const std::size_t index = jump_counter < path.jumps.size() ? path.jumps[jump_counter].index : jump_counter + 1;
        ++jump_counter;
        const double alpha = (p.value - last_value - unobserved_jumps) / grid.epsilon;
        const double right = p.right();
        const bool exits = leaves(cell, right, grid);
        out.overshoots.push_back({index, p.time, p.jump, alpha, exits});
        if (exits) {
            observe(p.time, right, ObservationCause::jump_exit);
        } else {
            unobserved_jumps += p.jump;
        }
    }
    return out;
}

/// Index of the last observation at or before t. An observation caused by a
/// jump exactly at t is excluded when `exclude_jump_at_t` is set.
inline std::size_t last_observation_index(const SampledPath& s, double t, bool exclude_jump_at_t = false)
{
    const auto& obs = s.observations;
    auto it = std::upper_bound(obs.begin(), obs.end(), t, [](double v, const Observation& o) { return v < o.time; });
    std::size_t j = static_cast<std::size_t>(it - obs.begin());
    if (j == 0) return 0;
    --j;
    if (exclude_jump_at_t && j > 0 && obs[j].time == t && obs[j].cause == ObservationCause::jump_exit) --j;
    return j;
}

/// tau^-(t), the last observation time not after t.
inline double last_observation_time(const SampledPath& s, double t)
{
    return s.observations[last_observation_index(s, t)].time;
}

/// eps^{-1} (X_{t-} - X_{tau^-(t)}) with jumps in between removed: the
/// rescaled displacement of the continuous part since the last observation.
inline double overshoot_at(double t, const InternalPath& path, const SampledPath& sampled)
{
    if (t < 0.0 || t > path.end_time()) throw DomainError("overshoot_at: t outside the simulated path");
    const std::size_t j = last_observation_index(sampled, t, true);
    const auto& o = sampled.observations[j];
    double jumps_between = 0.0;
    for (const auto& r : sampled.jumps) {
        if (r.time > o.time && r.time < t) jumps_between += r.size;
    }
    return (left_value_at(path, t) - o.value - jumps_between) / sampled.grid.epsilon;
}

inline double overshoot_at(double t, const InternalPath& path, const GridScheme& grid)
{
    return overshoot_at(t, path, extract_observations(path, grid));
}

/// t - tau^-(t).
inline double age_at(double t, const SampledPath& sampled)
{
    return t - sampled.observations[last_observation_index(sampled, t, true)].time;
}

/// Internal path holding only the observations, with jump exits re-encoded
/// as jumps from the previous observed value.
inline InternalPath embed(const SampledPath& sampled)
{
    InternalPath path;
    path.scheme = SchemeKind::embedded;
    path.horizon = sampled.horizon;
    double prev = 0.0;
    for (const auto& o : sampled.observations) {
        if (o.cause == ObservationCause::jump_exit) {
            path.points.push_back({o.time, prev, o.value - prev});
            path.jumps.push_back({path.jumps.size() + 1, o.time, o.value - prev});
        } else {
            path.points.push_back({o.time, o.value, 0.0});
        }
        prev = o.value;
    }
    if (!path.points.empty() && path.points.back().time < sampled.horizon) {
        path.points.push_back({sampled.horizon, prev, 0.0});
    }
    return path;
}

} // namespace gridrv
