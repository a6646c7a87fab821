#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hubmesh/horizon.hpp"

namespace hubmesh::model {

enum class Carrier {
    Electricity,
    HeatMT,
    HeatHT,
    Gas,
    Glycol,
};

constexpr std::array<Carrier, 5> kAllCarriers = {
    Carrier::Electricity, Carrier::HeatMT, Carrier::HeatHT, Carrier::Gas, Carrier::Glycol};

const char* to_string(Carrier c);
std::optional<Carrier> carrier_from_string(std::string_view s);

/// Conversion unit with fixed input carrier shares and constant per-carrier
/// output gains. input_min/input_max bound the total input power; the device
/// runs continuously (no on/off state).
struct Converter {
    std::string id;
    std::map<Carrier, double> input_share;  // fractions, sum to 1
    std::map<Carrier, double> output_gain;  // kW out per kW total input
    double input_min = 0.0;                 // kW
    double input_max = 0.0;                 // kW

    friend bool operator==(const Converter&, const Converter&) = default;
};

/// Scalar state-of-charge storage. decay is the per-hour retention factor.
struct Storage {
    std::string id;
    Carrier carrier = Carrier::Electricity;
    double capacity = 0.0;  // kWh
    double soc_min = 0.0;   // kWh
    double soc_max = 0.0;   // kWh
    double soc_init = 0.0;  // kWh
    double eta_charge = 1.0;
    double eta_discharge = 1.0;
    double decay = 1.0;
    double charge_max = 0.0;     // kW
    double discharge_max = 0.0;  // kW
    /// Optional plant-side draw (kW on the base grid) invisible to the
    /// controller; models unmetered loads pulling the tank below its set
    /// minimum.
    horizon::Series drain;

    friend bool operator==(const Storage&, const Storage&) = default;
};

struct GridConnection {
    Carrier carrier = Carrier::Electricity;
    horizon::Series price_import;  // CHF/kWh on the base grid
    horizon::Series price_export;  // CHF/kWh on the base grid
    double import_max = 0.0;       // kW
    double export_max = 0.0;       // kW
    bool is_slack = false;

    friend bool operator==(const GridConnection&, const GridConnection&) = default;
};

struct RenewableSource {
    std::string id;
    Carrier carrier = Carrier::Electricity;
    horizon::Series profile;  // kW available, base grid
    bool curtailable = true;

    friend bool operator==(const RenewableSource&, const RenewableSource&) = default;
};

struct Hub {
    std::string id;
    std::vector<Converter> converters;
    std::vector<Storage> storages;
    std::vector<GridConnection> grids;
    std::vector<RenewableSource> renewables;
    horizon::Series demand_e;  // kW, base grid
    horizon::Series demand_h;  // kW, base grid (medium-temperature heat)
    double slack_weight = 1e3;  // CHF/kWh^2 on the thermal slack

    friend bool operator==(const Hub&, const Hub&) = default;
};

/// One signed flow per link per step; positive means energy enters hub_a.
/// The importer pays fee per kWh moved. A link with limit 0 is dropped from
/// the topology at load time.
struct TradeLink {
    int id = 0;  // position in the trade vector
    std::string hub_a;
    std::string hub_b;
    Carrier carrier = Carrier::Electricity;
    double limit = 0.0;  // kW
    double fee = 0.0;    // CHF/kWh

    friend bool operator==(const TradeLink&, const TradeLink&) = default;
};

struct Network {
    std::vector<Hub> hubs;
    std::vector<TradeLink> links;

    int hub_index(std::string_view id) const;  // -1 when absent

    /// Signed incidence of a hub onto the trade vector, restricted to one
    /// carrier: (link position, +1) if the hub is hub_a, (link position, -1)
    /// if it is hub_b.
    std::vector<std::pair<int, double>> incidence(int hub_idx, Carrier carrier) const;

    /// Positions of all links touching a hub, ascending.
    std::vector<int> incident_links(int hub_idx) const;

    friend bool operator==(const Network&, const Network&) = default;
};

struct Violation {
    std::string code;
    std::string where;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

ValidationReport validate_network(const Network& net);

/// One step of the storage dynamics:
///   x' = decay^dt * x + dt * (eta_c * u_c - u_d / eta_d)
/// Throws std::invalid_argument when a flow violates its device bound.
double storage_step(const Storage& s, double x_kwh, double charge_kw, double discharge_kw,
                    double dt_hours);

/// Output per carrier for a given total input power. Throws when input_total
/// is outside [input_min, input_max].
std::map<Carrier, double> converter_output(const Converter& c, double input_total_kw);

}  // namespace hubmesh::model
