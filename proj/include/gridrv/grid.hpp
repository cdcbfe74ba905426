#pragma once

#include <cmath>
#include <optional>

#include "gridrv/errors.hpp"

namespace gridrv {

/// Regular price grid {k c eps : k integer}.
struct GridScheme {
    double epsilon = 0.01; ///< dimensionless tick scale
    double c = 1.0;        ///< cell constant, price units

    double cell() const { return c * epsilon; }

    void validate() const
    {
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("grid epsilon must be positive");
        if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("grid constant c must be positive");
    }
};

/// Grid membership is decided within this fraction of a cell.
inline constexpr double grid_snap_rel = 1e-12;

struct Cell {
    double lo;
    double hi;
    bool centered; ///< double-width cell around a grid line

    double width() const { return hi - lo; }
    bool contains_open(double x, double snap) const { return x > lo + snap && x < hi - snap; }
};

inline std::optional<long long> grid_index(double y, const GridScheme& grid)
{
    const double h = grid.cell();
    const double k = std::nearbyint(y / h);
    if (std::abs(y - k * h) <= grid_snap_rel * h) return static_cast<long long>(k);
    return std::nullopt;
}

inline double grid_value(long long k, const GridScheme& grid) { return static_cast<double>(k) * grid.cell(); }

/// Restart cell after an observation at y: [y - c eps, y + c eps] for a grid
/// point, the enclosing single cell otherwise.
inline Cell cell_of(double y, const GridScheme& grid)
{
    if (!std::isfinite(y)) throw DomainError("cell_of: y must be finite");
    const double h = grid.cell();
    if (const auto k = grid_index(y, grid)) {
        const double kk = static_cast<double>(*k);
        return {(kk - 1.0) * h, (kk + 1.0) * h, true};
    }
    const double k = std::floor(y / h);
    return {k * h, (k + 1.0) * h, false};
}

/// Snap a value that lies on a grid line (within tolerance) onto it.
inline double snap_to_grid(double y, const GridScheme& grid)
{
    if (const auto k = grid_index(y, grid)) return grid_value(*k, grid);
    return y;
}

/// True when x is outside the open cell or on its boundary.
inline bool leaves(const Cell& cell, double x, const GridScheme& grid)
{
    return !cell.contains_open(x, grid_snap_rel * grid.cell());
}

} // namespace gridrv
