#include "hubmesh/horizon.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hubmesh/dispatch.hpp"

namespace hubmesh::horizon {

const char* to_string(Unit u)
{
    switch (u) {
        case Unit::Scalar: return "-";
        case Unit::Kw: return "kW";
        case Unit::Kwh: return "kWh";
        case Unit::ChfPerKwh: return "CHF/kWh";
        case Unit::Celsius: return "degC";
        case Unit::WPerM2: return "W/m2";
    }
    return "?";
}

TimeGrid::TimeGrid(std::vector<double> steps, double t0)
    : dt_hours(std::move(steps)), t0_hours(t0)
{
    double prev = 0.0;
    for (double dt : dt_hours) {
        if (!(dt > 0.0))
            throw std::invalid_argument("TimeGrid: step durations must be positive");
        if (dt + 1e-12 < prev)
            throw std::invalid_argument("TimeGrid: step durations must be non-decreasing");
        prev = dt;
    }
}

double TimeGrid::span_hours() const
{
    return std::accumulate(dt_hours.begin(), dt_hours.end(), 0.0);
}

double TimeGrid::step_start(std::size_t k) const
{
    if (k > dt_hours.size())
        throw std::out_of_range("TimeGrid::step_start: index past end");
    return std::accumulate(dt_hours.begin(), dt_hours.begin() + static_cast<long>(k), 0.0);
}

TimeGrid make_grid(const std::vector<GridSegment>& segments, double t0_hours)
{
    if (segments.empty())
        throw std::invalid_argument("make_grid: empty segment list");
    std::vector<double> steps;
    double prev_dt = 0.0;
    for (const auto& seg : segments) {
        if (seg.count < 1)
            throw std::invalid_argument("make_grid: segment count must be >= 1");
        if (!(seg.dt_hours > 0.0))
            throw std::invalid_argument("make_grid: segment duration must be positive");
        if (seg.dt_hours <= prev_dt)
            throw std::invalid_argument("make_grid: segment durations must be strictly increasing");
        prev_dt = seg.dt_hours;
        steps.insert(steps.end(), static_cast<std::size_t>(seg.count), seg.dt_hours);
    }
    return TimeGrid(std::move(steps), t0_hours);
}

std::vector<GridSegment> default_grid_spec()
{
    return {{12, 1.0}, {12, 2.0}, {6, 6.0}};
}

Series Series::constant(Unit u, double value, std::size_t n)
{
    return Series(u, std::vector<double>(n, value));
}

Series Series::slice(std::size_t offset, std::size_t count) const
{
    if (offset + count > v.size())
        throw std::out_of_range("Series::slice: range past end");
    return Series(unit, std::vector<double>(v.begin() + static_cast<long>(offset),
                                            v.begin() + static_cast<long>(offset + count)));
}

Series resample(const Series& src, double src_dt_hours, const TimeGrid& dst)
{
    if (!(src_dt_hours > 0.0))
        throw std::invalid_argument("resample: source step must be positive");
    const double src_span = static_cast<double>(src.size()) * src_dt_hours;
    if (std::abs(src_span - dst.span_hours()) > 1e-9 * std::max(1.0, src_span))
        throw std::invalid_argument("resample: source and destination spans differ");

    Series out(src.unit, {});
    out.v.reserve(dst.size());
    std::size_t pos = 0;
    for (double dt : dst.dt_hours) {
        const double ratio = dt / src_dt_hours;
        const auto count = static_cast<std::size_t>(std::llround(ratio));
        if (count == 0 || std::abs(ratio - static_cast<double>(count)) > 1e-9)
            throw std::invalid_argument("resample: source step does not divide destination step");
        double sum = 0.0;
        for (std::size_t i = 0; i < count; ++i) sum += src.v[pos + i];
        pos += count;
        out.v.push_back(sum / static_cast<double>(count));
    }
    return out;
}

dispatch::StepControls first_step_control(const dispatch::DispatchSolution& sol)
{
    if (sol.grid.empty() || sol.hub_flows.empty())
        throw std::invalid_argument("first_step_control: empty solution");
    dispatch::StepControls out;
    out.dt_hours = sol.grid.dt_hours.front();
    out.hubs.reserve(sol.hub_flows.size());
    for (const auto& steps : sol.hub_flows) {
        if (steps.empty())
            throw std::invalid_argument("first_step_control: hub with no steps");
        out.hubs.push_back(steps.front());
    }
    out.trade.reserve(sol.trade.size());
    for (const auto& flows : sol.trade)
        out.trade.push_back(flows.empty() ? 0.0 : flows.front());
    return out;
}

}  // namespace hubmesh::horizon
