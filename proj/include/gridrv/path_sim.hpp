#pragma once

// Path simulation for dX = a dt + sigma dW + dJ with deterministic a, sigma
// and finite-activity J, observed on a regular grid.
//
// simulate_exact        event driven, zero drift; exits drawn from the exit
//                       law in the theta = int sigma^2 clock
// simulate_euler_bridge Euler steps with a Brownian-bridge crossing test and
//                       exact bridge hitting times

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "gridrv/errors.hpp"
#include "gridrv/grid.hpp"
#include "gridrv/limit_law.hpp"
#include "gridrv/model.hpp"
#include "gridrv/path.hpp"
#include "gridrv/random.hpp"

namespace gridrv {

/// Jump times and sizes in chronological order. Inhomogeneous Poisson times
/// are generated by thinning against the supremum of the intensity.
inline std::vector<JumpRecord> simulate_jumps(const ModelSpec& spec, Stream& stream)
{
    std::vector<JumpRecord> out;
    switch (spec.jumps.kind) {
    case JumpKind::none: break;
    case JumpKind::list: {
        auto events = spec.jumps.events;
        std::stable_sort(events.begin(), events.end(),
                         [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });
        for (const auto& e : events) out.push_back({out.size() + 1, e.time, e.size});
        break;
    }
    case JumpKind::poisson: {
        const double bound = spec.jumps.intensity.sup(0.0, spec.horizon);
        if (!std::isfinite(bound)) throw ConfigError("simulate_jumps: intensity bound is not finite");
        if (bound <= 0.0) break;
        double t = 0.0;
        while (true) {
            t += stream.exponential(bound);
            if (t > spec.horizon) break;
            if (stream.uniform() * bound < spec.jumps.intensity(t)) {
                out.push_back({out.size() + 1, t, spec.jumps.size.sample(stream)});
            }
        }
        break;
    }
    }
    return out;
}

namespace detail {

/// Appends a diffusion sample keeping times strictly increasing and strictly
/// before the next scheduled event.
inline void push_diffusion(std::vector<PathPoint>& pts, double t, double x, double next_event)
{
    const double last = pts.empty() ? -1.0 : pts.back().time;
    t = std::min(t, std::nextafter(next_event, -std::numeric_limits<double>::infinity()));
    t = std::max(t, std::nextafter(last, std::numeric_limits<double>::infinity()));
    pts.push_back({t, x, 0.0});
}

} // namespace detail

/// Exact event-driven simulation (zero drift).
///
/// In the theta clock the continuous part is a standard Brownian motion. From
/// the current position x inside the current cell, the process is run to its
/// exit from the symmetric interval (x - d, x + d), d the distance to the
/// nearer cell boundary. Reaching the nearer boundary is a grid exit;
/// otherwise the walk continues from x + d or x - d. If a jump or the horizon
/// comes first, the position at that instant is drawn from the confined
/// kernel given survival up to it.
inline InternalPath simulate_exact(const ModelSpec& spec, const GridScheme& grid, Stream& stream)
{
    spec.validate();
    grid.validate();
    if (!spec.drift.identically_zero()) {
        throw UnsupportedScheme("exact scheme requires zero drift; use euler-bridge");
    }
    const TimeChange clock(spec.vol);

    InternalPath path;
    path.scheme = SchemeKind::exact;
    path.stream_id = stream.id();
    path.horizon = spec.horizon;
    for (const auto& j : simulate_jumps(spec, stream)) {
        if (j.time <= spec.horizon) path.jumps.push_back(j);
    }
    const double expected = clock(spec.horizon) / (grid.cell() * grid.cell());
    path.points.reserve(static_cast<std::size_t>(1.2 * expected) + 16 + 2 * path.jumps.size());

    double x = 0.0;
    Cell cell = cell_of(x, grid);
    double theta = 0.0;
    const double snap = grid_snap_rel * grid.cell();
    path.points.push_back({0.0, 0.0, 0.0});

    const double theta_end = clock(spec.horizon);
    std::size_t next = 0;
    double event_time = next < path.jumps.size() ? path.jumps[next].time : spec.horizon;
    double event_theta = next < path.jumps.size() ? clock(event_time) : theta_end;

    while (true) {
        const double d_lo = x - cell.lo;
        const double d_hi = cell.hi - x;
        const double d = std::min(d_lo, d_hi);
        const auto draw = limit_law::sample_exit(stream, d, 1.0);

        if (theta + draw.time < event_theta) {
            theta += draw.time;
            bool exits;
            if (draw.side > 0) {
                exits = d_hi <= d_lo + snap;
                x = exits ? cell.hi : x + d;
            } else {
                exits = d_lo <= d_hi + snap;
                x = exits ? cell.lo : x - d;
            }
            detail::push_diffusion(path.points, clock.inverse(theta), x, event_time);
            if (exits) cell = cell_of(x, grid);
            continue;
        }

        const double age = event_theta - theta;
        const double pos = age > 0.0 ? x + d * limit_law::sample_confined_position(age / (d * d), stream) : x;
        theta = event_theta;

        if (next >= path.jumps.size()) {
            if (path.points.back().time < spec.horizon) path.points.push_back({spec.horizon, pos, 0.0});
            break;
        }
        const auto& jump = path.jumps[next++];
        path.points.push_back({jump.time, pos, jump.size});
        x = pos + jump.size;
        if (leaves(cell, x, grid)) {
            x = snap_to_grid(x, grid);
            cell = cell_of(x, grid);
        }
        event_time = next < path.jumps.size() ? path.jumps[next].time : spec.horizon;
        event_theta = next < path.jumps.size() ? clock(event_time) : theta_end;
    }
    return path;
}

/// Inverse Gaussian draw (Michael, Schucany and Haas), in a form free of
/// cancellation for large mean.
inline double sample_inverse_gaussian(double mu, double lambda, Stream& stream)
{
    const double n = stream.normal();
    const double y = n * n;
    if (!std::isfinite(mu)) return lambda / y;
    const double my = mu * y;
    const double x = mu - 2.0 * mu * my / (my + std::sqrt(my * my + 4.0 * mu * lambda * y));
    return stream.uniform() * (mu + x) <= mu ? x : mu * mu / x;
}

/// Fraction of a step [0, dt] at which a Brownian bridge from distance `a`
/// below (or above) a level to distance `c` from it first hits the level,
/// conditionally on hitting. With v = tau / (dt - tau), v is inverse Gaussian
/// with mean a/c and shape a^2/var, var = sigma^2 dt.
inline double bridge_hit_fraction(double a, double c, double var, Stream& stream)
{
    const double mu = c > 0.0 ? a / c : std::numeric_limits<double>::infinity();
    const double v = sample_inverse_gaussian(mu, a * a / var, stream);
    return v / (1.0 + v);
}

struct EulerOptions {
    /// Stop once this many grid exits (diffusion or jump) occurred; 0 = never.
    std::size_t max_observations = 0;
    /// Record every Euler step; exits, jumps and the endpoint are always kept.
    bool record_steps = true;
};

/// Largest admissible Euler step: (c eps)^2 / (50 sup sigma^2).
inline double max_euler_step(const ModelSpec& spec, const GridScheme& grid)
{
    const double s = spec.sup_vol();
    return grid.cell() * grid.cell() / (50.0 * s * s);
}

/// Default Euler step: (c eps)^2 / (100 sup sigma^2).
inline double default_euler_step(const ModelSpec& spec, const GridScheme& grid)
{
    const double s = spec.sup_vol();
    return grid.cell() * grid.cell() / (100.0 * s * s);
}

inline InternalPath simulate_euler_bridge(const ModelSpec& spec, const GridScheme& grid, double delta,
                                          Stream& stream, const EulerOptions& options = {})
{
    spec.validate();
    grid.validate();
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("Euler step must be positive");
    if (delta > max_euler_step(spec, grid) * (1.0 + 1e-12)) {
        throw ConfigError("Euler step too large: need delta <= (c eps)^2 / (50 sup sigma^2)");
    }

    InternalPath path;
    path.scheme = SchemeKind::euler_bridge;
    path.stream_id = stream.id();
    path.horizon = spec.horizon;
    for (const auto& j : simulate_jumps(spec, stream)) {
        if (j.time <= spec.horizon) path.jumps.push_back(j);
    }
    if (options.record_steps) {
        path.points.reserve(static_cast<std::size_t>(spec.horizon / delta) + 16);
    }

    const double snap = grid_snap_rel * grid.cell();
    double t = 0.0;
    double x = 0.0;
    Cell cell = cell_of(x, grid);
    std::size_t observations = 0;
    std::size_t next = 0;
    path.points.push_back({0.0, 0.0, 0.0});

    auto done = [&] { return options.max_observations > 0 && observations >= options.max_observations; };

    while (t < spec.horizon) {
        const double jump_time = next < path.jumps.size() ? path.jumps[next].time : std::numeric_limits<double>::infinity();
        double t_next = std::min({t + delta, jump_time, spec.horizon});
        if (t + delta >= spec.horizon - 1e-12 * delta && jump_time > spec.horizon) t_next = spec.horizon;
        const double dt = t_next - t;

        if (dt > 0.0) {
            const double s = spec.vol(t);
            const double x1 = x + spec.drift(t) * dt + s * std::sqrt(dt) * stream.normal();
            double t0 = t;
            double x0 = x;
            while (true) {
                const double var = s * s * (t_next - t0);
                double tau = std::numeric_limits<double>::infinity();
                double hit = 0.0;
                for (const double b : {cell.lo, cell.hi}) {
                    const double a = std::abs(b - x0);
                    const double c = std::abs(b - x1);
                    const bool beyond = (b == cell.lo) ? x1 <= b + snap : x1 >= b - snap;
                    const bool crossed = beyond || stream.uniform() < std::exp(-2.0 * a * c / var);
                    if (!crossed) continue;
                    const double tb = t0 + (t_next - t0) * bridge_hit_fraction(a, c, var, stream);
                    if (tb < tau) {
                        tau = tb;
                        hit = b;
                    }
                }
                if (!std::isfinite(tau)) break;
                detail::push_diffusion(path.points, tau, hit, t_next);
                ++observations;
                cell = cell_of(hit, grid);
                t0 = path.points.back().time;
                x0 = hit;
                if (done()) return path;
            }
            x = x1;
        }
        t = t_next;

        if (t == jump_time) {
            const auto& jump = path.jumps[next++];
            path.points.push_back({t, x, jump.size});
            x += jump.size;
            if (leaves(cell, x, grid)) {
                x = snap_to_grid(x, grid);
                cell = cell_of(x, grid);
                ++observations;
                if (done()) return path;
            }
        } else if (options.record_steps || t >= spec.horizon) {
            path.points.push_back({t, x, 0.0});
        }
    }
    return path;
}

} // namespace gridrv
