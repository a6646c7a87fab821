#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "hubmesh/mpc.hpp"

namespace hubmesh::netio {

/// Per-step dispatch rows (time, hub, device, carrier, value_kW, cost_CHF)
/// from a finished episode. Values are the realized flows: grid rows carry
/// the mismatch-corrected net, renewables the applied production, demand
/// rows are negative, so each (hub, carrier) group sums to zero.
void write_dispatch_csv(const mpc::EpisodeLog& log, const model::Network& net,
                        std::int64_t start_epoch_s, std::ostream& out);

/// Same rows for a single open-loop solution; series in `window` must be the
/// ones the solution was computed on.
void write_dispatch_csv(const dispatch::DispatchSolution& sol, const model::Network& window,
                        std::int64_t start_epoch_s, std::ostream& out);

/// One row per mode: mode, total_cost_chf, grid_elec_kwh.
void write_comparison_csv(const mpc::ComparisonTable& table, std::ostream& out);

void save_episode_log(const mpc::EpisodeLog& log, const std::string& path);
mpc::EpisodeLog load_episode_log(const std::string& path);

/// Writes episode.json and dispatch.csv into out_dir (created if missing).
void emit_results(const mpc::EpisodeLog& log, const model::Network& net,
                  std::int64_t start_epoch_s, const std::string& out_dir);

/// Writes comparison.csv into out_dir.
void emit_results(const mpc::ComparisonTable& table, const std::string& out_dir);

}  // namespace hubmesh::netio
