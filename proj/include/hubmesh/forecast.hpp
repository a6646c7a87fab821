#pragma once

#include <string>

#include "hubmesh/horizon.hpp"

namespace hubmesh::forecast {

struct ForecastRequest {
    std::string series_id;
    double origin_hours = 0.0;     // clock position the forecast starts at
    double horizon_hours = 72.0;
    double resolution_hours = 1.0;

    /// horizon/resolution; throws std::invalid_argument when not integral.
    std::size_t steps() const;
};

/// Baseline predictor: repeats the most recent 24 h of history across the
/// horizon. history runs at the request resolution and must cover >= 24 h.
horizon::Series forecast_persistence(const horizon::Series& history, const ForecastRequest& req);

/// Linear irradiance-to-power law with a hard clip at the panel peak. The
/// efficiency field is estimation metadata and does not enter the law.
struct PvModel {
    double peak_kw = 0.0;
    double efficiency = 0.0;
    double coef_kw_per_wm2 = 0.0;

    double output(double irradiance_wm2) const;
};

/// clip(coef * irradiance, 0, peak) per step. Throws on negative irradiance.
horizon::Series pv_output(const PvModel& model, const horizon::Series& irradiance);

enum class Kind { Perfect, Persistence };

const char* to_string(Kind k);
Kind kind_from_string(const std::string& name);

}  // namespace hubmesh::forecast
