#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hubmesh/admm.hpp"
#include "hubmesh/mpc.hpp"

namespace hubmesh::netio {

/// A fully loaded experiment file: validated network with truth series on the
/// uniform base grid, plus episode and solver configuration. `start` anchors
/// base index 0 on the wall clock; CSV references in the file must start
/// there and share the base resolution.
struct Scenario {
    int schema = 1;
    std::string name;
    std::string start = "2021-01-01T00:00:00";
    model::Network network;
    mpc::EpisodeConfig episode;
    admm::AdmmConfig admm;
    qp::SolverSettings qp;

    std::int64_t start_epoch() const;
};

/// Parses and validates a scenario JSON file (versioned "schema": 1). Series
/// fields accept a number (constant), an inline array, or
/// {"csv": "file.csv", "column": "name"} resolved relative to the scenario
/// file. Hubs and links are reordered by id; links with limit 0 are dropped.
/// Throws std::runtime_error naming the offending JSON path or data file.
Scenario load_scenario(const std::string& path);

/// Writes a scenario with every series inlined, so a reload reproduces the
/// identical network.
void save_scenario(const Scenario& sc, const std::string& path);

/// "12x1,12x2,6x6" -> segments (count x dt_hours).
std::vector<horizon::GridSegment> parse_grid_spec(const std::string& text);
std::string format_grid_spec(const std::vector<horizon::GridSegment>& spec);

/// "YYYY-MM-DDTHH:MM:SS" (UTC) <-> epoch seconds.
std::int64_t parse_iso8601(const std::string& text);
std::string format_iso8601(std::int64_t epoch_s);

}  // namespace hubmesh::netio
