#include "hubmesh/model.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hubmesh::model {

namespace {

constexpr double kFlowTol = 1e-9;

void check_series_nonneg(ValidationReport& rep, const horizon::Series& s, const std::string& where,
                         const char* code)
{
    for (double x : s.v) {
        if (x < 0.0) {
            rep.violations.push_back({code, where, "negative value " + std::to_string(x)});
            return;
        }
    }
}

}  // namespace

const char* to_string(Carrier c)
{
    switch (c) {
        case Carrier::Electricity: return "Electricity";
        case Carrier::HeatMT: return "HeatMT";
        case Carrier::HeatHT: return "HeatHT";
        case Carrier::Gas: return "Gas";
        case Carrier::Glycol: return "Glycol";
    }
    return "?";
}

std::optional<Carrier> carrier_from_string(std::string_view s)
{
    for (Carrier c : kAllCarriers)
        if (s == to_string(c)) return c;
    return std::nullopt;
}

int Network::hub_index(std::string_view id) const
{
    for (std::size_t i = 0; i < hubs.size(); ++i)
        if (hubs[i].id == id) return static_cast<int>(i);
    return -1;
}

std::vector<std::pair<int, double>> Network::incidence(int hub_idx, Carrier carrier) const
{
    std::vector<std::pair<int, double>> out;
    if (hub_idx < 0 || hub_idx >= static_cast<int>(hubs.size())) return out;
    const std::string& id = hubs[static_cast<std::size_t>(hub_idx)].id;
    for (std::size_t l = 0; l < links.size(); ++l) {
        if (links[l].carrier != carrier) continue;
        if (links[l].hub_a == id)
            out.emplace_back(static_cast<int>(l), 1.0);
        else if (links[l].hub_b == id)
            out.emplace_back(static_cast<int>(l), -1.0);
    }
    return out;
}

std::vector<int> Network::incident_links(int hub_idx) const
{
    std::vector<int> out;
    if (hub_idx < 0 || hub_idx >= static_cast<int>(hubs.size())) return out;
    const std::string& id = hubs[static_cast<std::size_t>(hub_idx)].id;
    for (std::size_t l = 0; l < links.size(); ++l)
        if (links[l].hub_a == id || links[l].hub_b == id) out.push_back(static_cast<int>(l));
    return out;
}

std::string ValidationReport::to_string() const
{
    std::ostringstream os;
    for (const auto& v : violations)
        os << v.code << " at " << v.where << ": " << v.detail << "\n";
    return os.str();
}

ValidationReport validate_network(const Network& net)
{
    ValidationReport rep;
    std::set<std::string> hub_ids;

    for (const auto& hub : net.hubs) {
        const std::string where = "hub " + hub.id;
        if (!hub_ids.insert(hub.id).second)
            rep.violations.push_back({"duplicate hub", where, "hub id reused"});

        std::set<std::string> device_ids;
        auto check_device_id = [&](const std::string& id) {
            if (!device_ids.insert(id).second)
                rep.violations.push_back({"duplicate device", where + "/" + id, "device id reused"});
        };

        for (const auto& c : hub.converters) {
            check_device_id(c.id);
            const std::string cw = where + "/" + c.id;
            if (c.input_min < 0.0 || c.input_min > c.input_max)
                rep.violations.push_back({"converter bounds", cw, "need 0 <= input_min <= input_max"});
            double share_sum = 0.0;
            for (const auto& [carrier, share] : c.input_share) {
                if (share < 0.0)
                    rep.violations.push_back({"converter share", cw, "negative input share"});
                share_sum += share;
            }
            if (c.input_share.empty() || std::abs(share_sum - 1.0) > 1e-9)
                rep.violations.push_back({"converter share", cw, "input shares must sum to 1"});
            for (const auto& [carrier, gain] : c.output_gain)
                if (gain < 0.0)
                    rep.violations.push_back({"converter gain", cw, "negative output gain"});
        }

        for (const auto& s : hub.storages) {
            check_device_id(s.id);
            const std::string sw = where + "/" + s.id;
            if (!(0.0 <= s.soc_min && s.soc_min <= s.soc_init && s.soc_init <= s.soc_max &&
                  s.soc_max <= s.capacity))
                rep.violations.push_back(
                    {"storage bounds", sw, "need 0 <= soc_min <= soc_init <= soc_max <= capacity"});
            if (!(s.eta_charge > 0.0 && s.eta_charge <= 1.0) ||
                !(s.eta_discharge > 0.0 && s.eta_discharge <= 1.0))
                rep.violations.push_back({"storage efficiency", sw, "eta must lie in (0,1]"});
            if (!(s.decay > 0.0 && s.decay <= 1.0))
                rep.violations.push_back({"storage decay", sw, "decay must lie in (0,1]"});
            if (s.charge_max < 0.0 || s.discharge_max < 0.0)
                rep.violations.push_back({"storage rate", sw, "negative charge/discharge limit"});
        }

        int elec_slack = 0;
        int thermal_slack = 0;
        for (std::size_t g = 0; g < hub.grids.size(); ++g) {
            const auto& gc = hub.grids[g];
            const std::string gw = where + "/grid[" + std::to_string(g) + "]";
            if (gc.import_max < 0.0 || gc.export_max < 0.0)
                rep.violations.push_back({"grid capacity", gw, "negative capacity"});
            if (gc.price_import.size() != gc.price_export.size())
                rep.violations.push_back({"series length", gw, "import/export price length mismatch"});
            const std::size_t n = std::min(gc.price_import.size(), gc.price_export.size());
            for (std::size_t k = 0; k < n; ++k) {
                if (gc.price_export[k] > gc.price_import[k] + 1e-12) {
                    rep.violations.push_back(
                        {"price arbitrage", gw, "price_export exceeds price_import at step " +
                                                    std::to_string(k)});
                    break;
                }
            }
            if (gc.is_slack && gc.carrier == Carrier::Electricity) ++elec_slack;
            if (gc.is_slack && gc.carrier == Carrier::HeatMT) ++thermal_slack;
        }
        if (elec_slack != 1)
            rep.violations.push_back(
                {"elec slack", where,
                 "need exactly one electricity grid connection with is_slack, found " +
                     std::to_string(elec_slack)});
        if (thermal_slack > 1)
            rep.violations.push_back({"thermal slack", where, "more than one thermal slack"});

        for (const auto& r : hub.renewables) {
            check_device_id(r.id);
            check_series_nonneg(rep, r.profile, where + "/" + r.id, "profile negative");
        }

        check_series_nonneg(rep, hub.demand_e, where + "/demand_e", "demand negative");
        check_series_nonneg(rep, hub.demand_h, where + "/demand_h", "demand negative");
        if (hub.slack_weight < 0.0)
            rep.violations.push_back({"slack weight", where, "negative slack weight"});
    }

    std::set<int> link_ids;
    for (const auto& link : net.links) {
        const std::string where = "link " + std::to_string(link.id);
        if (!link_ids.insert(link.id).second)
            rep.violations.push_back({"duplicate link", where, "link id reused"});
        if (link.hub_a == link.hub_b)
            rep.violations.push_back({"self-trade", where, "link endpoints are the same hub"});
        if (net.hub_index(link.hub_a) < 0)
            rep.violations.push_back({"unknown hub", where, "hub_a '" + link.hub_a + "' not found"});
        if (net.hub_index(link.hub_b) < 0)
            rep.violations.push_back({"unknown hub", where, "hub_b '" + link.hub_b + "' not found"});
        if (link.carrier != Carrier::Electricity && link.carrier != Carrier::HeatMT)
            rep.violations.push_back({"link carrier", where, "trades are Electricity or HeatMT"});
        if (link.limit < 0.0)
            rep.violations.push_back({"limit negative", where, "trade limit below zero"});
        if (link.fee < 0.0)
            rep.violations.push_back({"fee negative", where, "trade fee below zero"});
    }

    return rep;
}

double storage_step(const Storage& s, double x_kwh, double charge_kw, double discharge_kw,
                    double dt_hours)
{
    if (charge_kw < -kFlowTol || charge_kw > s.charge_max + kFlowTol)
        throw std::invalid_argument("storage_step: charge power outside [0, charge_max]");
    if (discharge_kw < -kFlowTol || discharge_kw > s.discharge_max + kFlowTol)
        throw std::invalid_argument("storage_step: discharge power outside [0, discharge_max]");
    if (!(dt_hours > 0.0)) throw std::invalid_argument("storage_step: dt must be positive");
    return std::pow(s.decay, dt_hours) * x_kwh +
           dt_hours * (s.eta_charge * charge_kw - discharge_kw / s.eta_discharge);
}

std::map<Carrier, double> converter_output(const Converter& c, double input_total_kw)
{
    if (input_total_kw < c.input_min - kFlowTol || input_total_kw > c.input_max + kFlowTol)
        throw std::invalid_argument("converter_output: input outside [input_min, input_max]");
    std::map<Carrier, double> out;
    for (const auto& [carrier, gain] : c.output_gain) out[carrier] = gain * input_total_kw;
    return out;
}

}  // namespace hubmesh::model
