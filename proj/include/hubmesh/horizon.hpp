#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace hubmesh::horizon {

enum class Unit {
    Scalar,
    Kw,
    Kwh,
    ChfPerKwh,
    Celsius,
    WPerM2,
};

const char* to_string(Unit u);

/// Non-uniform time grid. Step durations must be positive and non-decreasing:
/// the grid is fine near the present and coarsens toward the end of the horizon.
struct TimeGrid {
    std::vector<double> dt_hours;
    double t0_hours = 0.0;

    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> steps, double t0 = 0.0);

    std::size_t size() const { return dt_hours.size(); }
    bool empty() const { return dt_hours.empty(); }
    double span_hours() const;
    /// Start offset of step k relative to t0.
    double step_start(std::size_t k) const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

struct GridSegment {
    int count = 0;
    double dt_hours = 0.0;

    friend bool operator==(const GridSegment&, const GridSegment&) = default;
};

/// Concatenates uniform segments into one grid. Segment durations must be
/// strictly increasing; counts must be >= 1.
TimeGrid make_grid(const std::vector<GridSegment>& segments, double t0_hours = 0.0);

/// The default prediction grid: 12 x 1 h, 12 x 2 h, 6 x 6 h (72 h span).
std::vector<GridSegment> default_grid_spec();

/// A scalar-per-step sequence aligned to some time grid.
struct Series {
    Unit unit = Unit::Scalar;
    std::vector<double> v;

    Series() = default;
    Series(Unit u, std::vector<double> values) : unit(u), v(std::move(values)) {}

    static Series constant(Unit u, double value, std::size_t n);

    std::size_t size() const { return v.size(); }
    bool empty() const { return v.empty(); }
    double operator[](std::size_t i) const { return v[i]; }
    double& operator[](std::size_t i) { return v[i]; }

    Series slice(std::size_t offset, std::size_t count) const;

    friend bool operator==(const Series&, const Series&) = default;
};

/// Aggregates a series on a fine uniform grid onto a coarser grid by
/// duration-weighted mean. src_dt_hours must divide every destination step and
/// the spans must match. For power series this preserves total energy.
Series resample(const Series& src, double src_dt_hours, const TimeGrid& dst);

}  // namespace hubmesh::horizon
