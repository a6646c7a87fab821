#include "hubmesh/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hubmesh::forecast {

std::size_t ForecastRequest::steps() const
{
    if (!(horizon_hours > 0.0) || !(resolution_hours > 0.0))
        throw std::invalid_argument("forecast: horizon and resolution must be positive");
    const double ratio = horizon_hours / resolution_hours;
    const auto n = static_cast<long long>(std::llround(ratio));
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9)
        throw std::invalid_argument("forecast: horizon must be a multiple of the resolution");
    return static_cast<std::size_t>(n);
}

horizon::Series forecast_persistence(const horizon::Series& history, const ForecastRequest& req)
{
    const std::size_t n = req.steps();
    const double day = 24.0 / req.resolution_hours;
    const auto pattern = static_cast<std::size_t>(std::llround(day));
    if (std::abs(day - static_cast<double>(pattern)) > 1e-9)
        throw std::invalid_argument("forecast: 24 h is not a multiple of the resolution");
    if (history.size() < pattern)
        throw std::invalid_argument("forecast: persistence needs >= 24 h of history, got " +
                                    std::to_string(history.size()) + " steps");

    horizon::Series out(history.unit, std::vector<double>(n));
    const std::size_t start = history.size() - pattern;
    for (std::size_t i = 0; i < n; ++i) out[i] = history[start + i % pattern];
    return out;
}

double PvModel::output(double irradiance_wm2) const
{
    return std::clamp(coef_kw_per_wm2 * irradiance_wm2, 0.0, peak_kw);
}

horizon::Series pv_output(const PvModel& model, const horizon::Series& irradiance)
{
    horizon::Series out(horizon::Unit::Kw, std::vector<double>(irradiance.size()));
    for (std::size_t i = 0; i < irradiance.size(); ++i) {
        if (irradiance[i] < 0.0)
            throw std::invalid_argument("pv_output: negative irradiance at step " +
                                        std::to_string(i));
        out[i] = model.output(irradiance[i]);
    }
    return out;
}

const char* to_string(Kind k)
{
    return k == Kind::Perfect ? "perfect" : "persistence";
}

Kind kind_from_string(const std::string& name)
{
    if (name == "perfect") return Kind::Perfect;
    if (name == "persistence") return Kind::Persistence;
    throw std::invalid_argument("forecast: unknown forecaster '" + name + "'");
}

}  // namespace hubmesh::forecast
