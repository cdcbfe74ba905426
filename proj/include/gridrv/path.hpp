#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gridrv/errors.hpp"

namespace gridrv {

/// Jump S_p of size dX, p counted from 1 in chronological order.
struct JumpRecord {
    std::size_t index;
    double time;
    double size;
};

/// One sample of the internal path. `value` is the left limit at `time`;
/// for a jump sample the right value is value + jump.
struct PathPoint {
    double time;
    double value;
    double jump = 0.0;

    bool is_jump() const { return jump != 0.0; }
    double right() const { return value + jump; }
};

enum class SchemeKind { exact, euler_bridge, embedded };

inline const char* to_string(SchemeKind s)
{
    switch (s) {
    case SchemeKind::exact: return "exact";
    case SchemeKind::euler_bridge: return "euler-bridge";
    case SchemeKind::embedded: return "embedded";
    }
    return "?";
}

struct InternalPath {
    SchemeKind scheme = SchemeKind::exact;
    std::uint64_t stream_id = 0;
    double horizon = 0.0;
    std::vector<PathPoint> points;
    std::vector<JumpRecord> jumps;

    double end_time() const { return points.empty() ? 0.0 : points.back().time; }
};

/// Cadlag value X_t. Between samples the path is interpolated linearly, which
/// is exact only at sample times.
inline double value_at(const InternalPath& path, double t)
{
    const auto& p = path.points;
    if (p.empty()) throw DomainError("value_at: empty path");
    if (t < p.front().time || t > p.back().time) throw DomainError("value_at: time outside the path");
    auto it = std::upper_bound(p.begin(), p.end(), t, [](double v, const PathPoint& q) { return v < q.time; });
    const auto& left = *(it - 1);
    if (left.time == t || it == p.end()) return left.right();
    const auto& right = *it;
    const double w = (t - left.time) / (right.time - left.time);
    return left.right() + w * (right.value - left.right());
}

/// Left limit X_{t-}.
inline double left_value_at(const InternalPath& path, double t)
{
    const auto& p = path.points;
    auto it = std::lower_bound(p.begin(), p.end(), t, [](const PathPoint& q, double v) { return q.time < v; });
    if (it != p.end() && it->time == t) return it->value;
    return value_at(path, t);
}

inline double max_spacing(const InternalPath& path)
{
    double m = 0.0;
    for (std::size_t i = 1; i < path.points.size(); ++i) {
        m = std::max(m, path.points[i].time - path.points[i - 1].time);
    }
    return m;
}

} // namespace gridrv
