#include "hubmesh/dispatch.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace hubmesh::dispatch {

namespace {

using model::Carrier;

constexpr std::size_t kNumCarriers = model::kAllCarriers.size();

std::size_t cidx(Carrier c)
{
    return static_cast<std::size_t>(c);
}

double at(const horizon::Series& s, std::size_t k)
{
    return s.empty() ? 0.0 : s[k];
}

// one link as the assembler sees it: per incident hub, the coefficient the
// trade variable gets in that hub's balance row
struct AsmLink {
    Carrier carrier = Carrier::Electricity;
    double limit = 0.0;
    double fee = 0.0;
    std::vector<std::pair<int, double>> ends;
};

struct AsmOptions {
    bool islanded = false;
    bool fee_importer_only = false;
    bool penalty_diag = false;  // put rho on the trade diagonal of P
    double rho = 0.0;
};

void check_len(const horizon::Series& s, std::size_t n, const std::string& what)
{
    if (!s.empty() && s.size() != n)
        throw std::invalid_argument("dispatch: series " + what + " has length " +
                                    std::to_string(s.size()) + ", grid has " + std::to_string(n) +
                                    " steps");
}

void check_hub_series(const model::Hub& hub, std::size_t n)
{
    check_len(hub.demand_e, n, hub.id + "/demand_e");
    check_len(hub.demand_h, n, hub.id + "/demand_h");
    for (const auto& r : hub.renewables) check_len(r.profile, n, hub.id + "/" + r.id);
    for (std::size_t g = 0; g < hub.grids.size(); ++g) {
        const std::string w = hub.id + "/grid[" + std::to_string(g) + "]";
        check_len(hub.grids[g].price_import, n, w + "/price_import");
        check_len(hub.grids[g].price_export, n, w + "/price_export");
    }
}

std::array<bool, kNumCarriers> hub_presence(const model::Hub& hub)
{
    std::array<bool, kNumCarriers> p{};
    for (const auto& c : hub.converters) {
        for (const auto& [carrier, share] : c.input_share) p[cidx(carrier)] = true;
        for (const auto& [carrier, gain] : c.output_gain) p[cidx(carrier)] = true;
    }
    for (const auto& s : hub.storages) p[cidx(s.carrier)] = true;
    for (const auto& g : hub.grids) p[cidx(g.carrier)] = true;
    for (const auto& r : hub.renewables) p[cidx(r.carrier)] = true;
    if (!hub.demand_e.empty()) p[cidx(Carrier::Electricity)] = true;
    if (!hub.demand_h.empty()) p[cidx(Carrier::HeatMT)] = true;
    return p;
}

std::vector<std::array<bool, kNumCarriers>> presence(const std::vector<model::Hub>& hubs,
                                                     const std::vector<AsmLink>& links)
{
    std::vector<std::array<bool, kNumCarriers>> p;
    p.reserve(hubs.size());
    for (const auto& hub : hubs) p.push_back(hub_presence(hub));
    for (const auto& link : links)
        for (const auto& [h, coeff] : link.ends) p[static_cast<std::size_t>(h)][cidx(link.carrier)] = true;
    return p;
}

VariableLayout make_layout(const std::vector<model::Hub>& hubs, int n_links,
                           const std::vector<std::array<bool, kNumCarriers>>& present,
                           std::size_t steps)
{
    VariableLayout lay;
    lay.steps = steps;
    int off = 0;
    for (std::size_t h = 0; h < hubs.size(); ++h) {
        const auto& hub = hubs[h];
        HubBlock b;
        b.n_conv = static_cast<int>(hub.converters.size());
        b.n_sto = static_cast<int>(hub.storages.size());
        b.n_grid = static_cast<int>(hub.grids.size());
        b.n_ren = static_cast<int>(hub.renewables.size());
        b.conv0 = off;
        off += b.n_conv;
        b.sto0 = off;
        off += 3 * b.n_sto;
        b.grid0 = off;
        off += 2 * b.n_grid;
        b.ren0 = off;
        off += b.n_ren;
        if (present[h][cidx(Carrier::HeatMT)]) b.eps = off++;
        lay.hubs.push_back(b);
    }
    lay.link0 = off;
    lay.n_links = n_links;
    off += 3 * n_links;
    lay.block = off;
    return lay;
}

Eigen::Index count_struct_rows(const std::vector<model::Hub>& hubs,
                               const std::vector<std::array<bool, kNumCarriers>>& present,
                               std::size_t n_links, std::size_t steps)
{
    std::size_t per_step = n_links;
    for (std::size_t h = 0; h < hubs.size(); ++h) {
        per_step += hubs[h].storages.size();
        for (bool b : present[h]) per_step += b ? 1 : 0;
    }
    return static_cast<Eigen::Index>(per_step * steps);
}

// Fills q, l, u (always) and the sparsity plus row descriptions (when
// building). build_qp and refresh_qp share this walk so the row order cannot
// drift between them.
void fill_problem(const std::vector<model::Hub>& hubs, const std::vector<AsmLink>& links,
                  const horizon::TimeGrid& grid, const AsmOptions& opt,
                  const VariableLayout& lay, Eigen::Index m_struct,
                  std::vector<Eigen::Triplet<double>>* ta,
                  std::vector<Eigen::Triplet<double>>* tp, Eigen::VectorXd& q, Eigen::VectorXd& l,
                  Eigen::VectorXd& u, std::vector<std::string>* desc,
                  const std::vector<std::array<bool, kNumCarriers>>& present)
{
    const std::size_t K = grid.size();
    const int n = lay.n_vars();
    q.setZero(n);
    l.resize(m_struct + n);
    u.resize(m_struct + n);

    // incident links per hub: (link index, balance coefficient)
    std::vector<std::vector<std::pair<int, double>>> hub_links(hubs.size());
    for (std::size_t li = 0; li < links.size(); ++li)
        for (const auto& [h, coeff] : links[li].ends)
            hub_links[static_cast<std::size_t>(h)].emplace_back(static_cast<int>(li), coeff);

    Eigen::Index row = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const double dt = grid.dt_hours[k];
        for (std::size_t h = 0; h < hubs.size(); ++h) {
            const auto& hub = hubs[h];
            const int hi = static_cast<int>(h);

            for (std::size_t s = 0; s < hub.storages.size(); ++s) {
                const auto& sto = hub.storages[s];
                const int si = static_cast<int>(s);
                const double keep = std::pow(sto.decay, dt);
                if (ta) {
                    ta->emplace_back(row, lay.soc(hi, si, k), 1.0);
                    if (k > 0) ta->emplace_back(row, lay.soc(hi, si, k - 1), -keep);
                    ta->emplace_back(row, lay.charge(hi, si, k), -dt * sto.eta_charge);
                    ta->emplace_back(row, lay.discharge(hi, si, k), dt / sto.eta_discharge);
                    if (desc)
                        desc->push_back("hub " + hub.id + " storage " + sto.id +
                                        " dynamics step " + std::to_string(k));
                }
                const double rhs = k == 0 ? keep * sto.soc_init : 0.0;
                l[row] = rhs;
                u[row] = rhs;
                ++row;
            }

            for (Carrier carrier : model::kAllCarriers) {
                if (!present[h][cidx(carrier)]) continue;
                if (ta) {
                    for (std::size_t c = 0; c < hub.converters.size(); ++c) {
                        const auto& conv = hub.converters[c];
                        double coeff = 0.0;
                        if (auto it = conv.output_gain.find(carrier); it != conv.output_gain.end())
                            coeff += it->second;
                        if (auto it = conv.input_share.find(carrier); it != conv.input_share.end())
                            coeff -= it->second;
                        if (coeff != 0.0)
                            ta->emplace_back(row, lay.conv_input(hi, static_cast<int>(c), k), coeff);
                    }
                    for (std::size_t s = 0; s < hub.storages.size(); ++s) {
                        if (hub.storages[s].carrier != carrier) continue;
                        ta->emplace_back(row, lay.charge(hi, static_cast<int>(s), k), -1.0);
                        ta->emplace_back(row, lay.discharge(hi, static_cast<int>(s), k), 1.0);
                    }
                    for (std::size_t g = 0; g < hub.grids.size(); ++g) {
                        if (hub.grids[g].carrier != carrier) continue;
                        ta->emplace_back(row, lay.grid_import(hi, static_cast<int>(g), k), 1.0);
                        ta->emplace_back(row, lay.grid_export(hi, static_cast<int>(g), k), -1.0);
                    }
                    for (std::size_t r = 0; r < hub.renewables.size(); ++r) {
                        if (hub.renewables[r].carrier != carrier) continue;
                        ta->emplace_back(row, lay.renewable(hi, static_cast<int>(r), k), 1.0);
                    }
                    if (carrier == Carrier::HeatMT)
                        ta->emplace_back(row, lay.slack(hi, k), 1.0);
                    for (const auto& [li, coeff] : hub_links[h]) {
                        if (links[static_cast<std::size_t>(li)].carrier != carrier) continue;
                        ta->emplace_back(row, lay.trade(li, k), coeff);
                    }
                    if (desc)
                        desc->push_back("hub " + hub.id + " " + model::to_string(carrier) +
                                        " balance step " + std::to_string(k));
                }
                double demand = 0.0;
                if (carrier == Carrier::Electricity) demand = at(hub.demand_e, k);
                if (carrier == Carrier::HeatMT) demand = at(hub.demand_h, k);
                l[row] = demand;
                u[row] = demand;
                ++row;
            }
        }

        for (std::size_t li = 0; li < links.size(); ++li) {
            const int i = static_cast<int>(li);
            if (ta) {
                ta->emplace_back(row, lay.trade(i, k), 1.0);
                ta->emplace_back(row, lay.fee_pos(i, k), -1.0);
                ta->emplace_back(row, lay.fee_neg(i, k), 1.0);
                if (desc)
                    desc->push_back("link " + std::to_string(li) + " fee split step " +
                                    std::to_string(k));
            }
            l[row] = 0.0;
            u[row] = 0.0;
            ++row;
        }
    }
    if (row != m_struct) throw std::logic_error("dispatch: row count mismatch");

    // bounds block: one identity row per variable
    for (std::size_t k = 0; k < K; ++k) {
        const double dt = grid.dt_hours[k];
        for (std::size_t h = 0; h < hubs.size(); ++h) {
            const auto& hub = hubs[h];
            const int hi = static_cast<int>(h);
            for (std::size_t c = 0; c < hub.converters.size(); ++c) {
                const int j = lay.conv_input(hi, static_cast<int>(c), k);
                l[m_struct + j] = hub.converters[c].input_min;
                u[m_struct + j] = hub.converters[c].input_max;
            }
            for (std::size_t s = 0; s < hub.storages.size(); ++s) {
                const auto& sto = hub.storages[s];
                const int js = lay.soc(hi, static_cast<int>(s), k);
                l[m_struct + js] = sto.soc_min;
                u[m_struct + js] = sto.soc_max;
                const int jc = lay.charge(hi, static_cast<int>(s), k);
                l[m_struct + jc] = 0.0;
                u[m_struct + jc] = sto.charge_max;
                const int jd = lay.discharge(hi, static_cast<int>(s), k);
                l[m_struct + jd] = 0.0;
                u[m_struct + jd] = sto.discharge_max;
            }
            for (std::size_t g = 0; g < hub.grids.size(); ++g) {
                const auto& gc = hub.grids[g];
                const int ji = lay.grid_import(hi, static_cast<int>(g), k);
                l[m_struct + ji] = 0.0;
                u[m_struct + ji] = gc.import_max;
                const int je = lay.grid_export(hi, static_cast<int>(g), k);
                l[m_struct + je] = 0.0;
                u[m_struct + je] = gc.export_max;
                q[ji] = dt * at(gc.price_import, k);
                q[je] = -dt * at(gc.price_export, k);
            }
            for (std::size_t r = 0; r < hub.renewables.size(); ++r) {
                const auto& ren = hub.renewables[r];
                const int j = lay.renewable(hi, static_cast<int>(r), k);
                const double avail = at(ren.profile, k);
                l[m_struct + j] = ren.curtailable ? 0.0 : avail;
                u[m_struct + j] = avail;
            }
            const int je = lay.slack(hi, k);
            if (je >= 0) {
                l[m_struct + je] = -qp::kInf;
                u[m_struct + je] = qp::kInf;
                if (tp) tp->emplace_back(je, je, 2.0 * hub.slack_weight * dt);
            }
        }
        for (std::size_t li = 0; li < links.size(); ++li) {
            const auto& link = links[li];
            const int i = static_cast<int>(li);
            const double lim = opt.islanded ? 0.0 : link.limit;
            const int jt = lay.trade(i, k);
            l[m_struct + jt] = -lim;
            u[m_struct + jt] = lim;
            const int jp = lay.fee_pos(i, k);
            l[m_struct + jp] = 0.0;
            u[m_struct + jp] = lim;
            const int jn = lay.fee_neg(i, k);
            l[m_struct + jn] = 0.0;
            u[m_struct + jn] = lim;
            q[jp] = dt * link.fee;
            q[jn] = opt.fee_importer_only ? 0.0 : dt * link.fee;
            if (tp && opt.penalty_diag) tp->emplace_back(jt, jt, opt.rho);
        }
    }
    if (ta) {
        for (int j = 0; j < n; ++j) ta->emplace_back(m_struct + j, j, 1.0);
    }
}

// refresh reuses a template's sparsity, so the hub structure must not have
// drifted since build time
void check_structure(const VariableLayout& lay, const std::vector<model::Hub>& hubs,
                     const std::vector<AsmLink>& links, Eigen::Index m_struct,
                     const horizon::TimeGrid& grid,
                     const std::vector<std::array<bool, kNumCarriers>>& present)
{
    for (std::size_t h = 0; h < hubs.size(); ++h) {
        const auto& b = lay.hubs[h];
        const auto& hub = hubs[h];
        if (static_cast<int>(hub.converters.size()) != b.n_conv ||
            static_cast<int>(hub.storages.size()) != b.n_sto ||
            static_cast<int>(hub.grids.size()) != b.n_grid ||
            static_cast<int>(hub.renewables.size()) != b.n_ren ||
            (b.eps >= 0) != present[h][cidx(Carrier::HeatMT)])
            throw std::invalid_argument("dispatch: hub " + hub.id +
                                        " structure differs from the template");
    }
    if (count_struct_rows(hubs, present, links.size(), grid.size()) != m_struct)
        throw std::invalid_argument("dispatch: constraint rows differ from the template");
}

struct Assembled {
    qp::SparseQp qp;
    VariableLayout layout;
    Eigen::Index m_struct = 0;
    std::vector<std::string> row_desc;
};

Assembled assemble(const std::vector<model::Hub>& hubs, const std::vector<AsmLink>& links,
                   const horizon::TimeGrid& grid, const AsmOptions& opt)
{
    if (grid.empty()) throw std::invalid_argument("dispatch: empty time grid");
    for (const auto& hub : hubs) check_hub_series(hub, grid.size());

    const auto present = presence(hubs, links);
    Assembled out;
    out.layout = make_layout(hubs, static_cast<int>(links.size()), present, grid.size());
    out.m_struct = count_struct_rows(hubs, present, links.size(), grid.size());

    const int n = out.layout.n_vars();
    std::vector<Eigen::Triplet<double>> ta, tp;
    ta.reserve(static_cast<std::size_t>(out.m_struct) * 6 + static_cast<std::size_t>(n));
    fill_problem(hubs, links, grid, opt, out.layout, out.m_struct, &ta, &tp, out.qp.q, out.qp.l,
                 out.qp.u, &out.row_desc, present);

    out.qp.P.resize(n, n);
    out.qp.P.setFromTriplets(tp.begin(), tp.end());
    out.qp.A.resize(out.m_struct + n, n);
    out.qp.A.setFromTriplets(ta.begin(), ta.end());
    return out;
}

std::vector<AsmLink> network_links(const model::Network& net)
{
    std::vector<AsmLink> links;
    links.reserve(net.links.size());
    for (const auto& link : net.links) {
        AsmLink al;
        al.carrier = link.carrier;
        al.limit = link.limit;
        al.fee = link.fee;
        al.ends = {{net.hub_index(link.hub_a), 1.0}, {net.hub_index(link.hub_b), -1.0}};
        links.push_back(std::move(al));
    }
    return links;
}

std::vector<AsmLink> local_links(const std::vector<HubLinkView>& views)
{
    std::vector<AsmLink> links;
    links.reserve(views.size());
    for (const auto& v : views) {
        AsmLink al;
        al.carrier = v.carrier;
        al.limit = v.limit;
        al.fee = v.fee;
        al.ends = {{0, 1.0}};
        links.push_back(std::move(al));
    }
    return links;
}

}  // namespace

const char* to_string(Mode m)
{
    return m == Mode::Coordinated ? "coordinated" : "islanded";
}

QpTemplate build_qp(const model::Network& net, const horizon::TimeGrid& grid, Mode mode)
{
    const auto report = model::validate_network(net);
    if (!report.ok())
        throw std::invalid_argument("dispatch: invalid network:\n" + report.to_string());

    AsmOptions opt;
    opt.islanded = mode == Mode::Islanded;
    auto asmbl = assemble(net.hubs, network_links(net), grid, opt);

    QpTemplate tpl;
    tpl.qp = std::move(asmbl.qp);
    tpl.layout = std::move(asmbl.layout);
    tpl.m_struct = asmbl.m_struct;
    tpl.mode = mode;
    tpl.row_desc = std::move(asmbl.row_desc);
    return tpl;
}

void refresh_qp(QpTemplate& tpl, const model::Network& net, const horizon::TimeGrid& grid)
{
    if (net.hubs.size() != tpl.layout.hubs.size() ||
        static_cast<int>(net.links.size()) != tpl.layout.n_links ||
        grid.size() != tpl.layout.steps)
        throw std::invalid_argument("refresh_qp: network shape differs from the template");
    for (const auto& hub : net.hubs) check_hub_series(hub, grid.size());

    AsmOptions opt;
    opt.islanded = tpl.mode == Mode::Islanded;
    const auto links = network_links(net);
    const auto present = presence(net.hubs, links);
    check_structure(tpl.layout, net.hubs, links, tpl.m_struct, grid, present);
    fill_problem(net.hubs, links, grid, opt, tpl.layout, tpl.m_struct, nullptr, nullptr, tpl.qp.q,
                 tpl.qp.l, tpl.qp.u, nullptr, present);
}

HubQpTemplate build_hub_qp(const model::Hub& hub, const std::vector<HubLinkView>& links,
                           const horizon::TimeGrid& grid, double rho)
{
    if (!(rho > 0.0)) throw std::invalid_argument("build_hub_qp: rho must be positive");
    model::Network probe;
    probe.hubs = {hub};
    const auto report = model::validate_network(probe);
    if (!report.ok())
        throw std::invalid_argument("dispatch: invalid hub:\n" + report.to_string());

    AsmOptions opt;
    opt.fee_importer_only = true;
    opt.penalty_diag = true;
    opt.rho = rho;
    auto asmbl = assemble({hub}, local_links(links), grid, opt);

    HubQpTemplate tpl;
    tpl.qp = std::move(asmbl.qp);
    tpl.layout = std::move(asmbl.layout);
    tpl.m_struct = asmbl.m_struct;
    tpl.links = links;
    tpl.rho = rho;
    tpl.row_desc = std::move(asmbl.row_desc);
    return tpl;
}

void refresh_hub_qp(HubQpTemplate& tpl, const model::Hub& hub, const horizon::TimeGrid& grid)
{
    if (tpl.layout.hubs.size() != 1 || grid.size() != tpl.layout.steps)
        throw std::invalid_argument("refresh_hub_qp: shape differs from the template");
    AsmOptions opt;
    opt.fee_importer_only = true;
    opt.penalty_diag = true;
    opt.rho = tpl.rho;
    const auto links = local_links(tpl.links);
    const std::vector<model::Hub> hubs = {hub};
    const auto present = presence(hubs, links);
    check_structure(tpl.layout, hubs, links, tpl.m_struct, grid, present);
    fill_problem(hubs, links, grid, opt, tpl.layout, tpl.m_struct, nullptr, nullptr, tpl.qp.q,
                 tpl.qp.l, tpl.qp.u, nullptr, present);
}

CostParams cost_params(const model::Network& net)
{
    CostParams params;
    params.hubs.reserve(net.hubs.size());
    for (const auto& hub : net.hubs) {
        CostParams::HubTariffs t;
        t.slack_weight = hub.slack_weight;
        for (const auto& g : hub.grids) {
            t.grid_carrier.push_back(g.carrier);
            t.price_import.push_back(g.price_import);
            t.price_export.push_back(g.price_export);
        }
        params.hubs.push_back(std::move(t));
    }
    for (const auto& link : net.links) {
        params.link_fee.push_back(link.fee);
        params.link_hub_a.push_back(net.hub_index(link.hub_a));
        params.link_hub_b.push_back(net.hub_index(link.hub_b));
    }
    return params;
}

std::vector<CostBreakdown> evaluate_hub_costs(const DispatchSolution& sol,
                                              const CostParams& params,
                                              const horizon::TimeGrid& grid)
{
    std::vector<CostBreakdown> out(sol.hub_flows.size());
    for (std::size_t h = 0; h < sol.hub_flows.size(); ++h) {
        const auto& tar = params.hubs.at(h);
        auto& cb = out[h];
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double dt = grid.dt_hours[k];
            const auto& f = sol.hub_flows[h][k];
            for (std::size_t g = 0; g < tar.grid_carrier.size(); ++g) {
                const double paid = dt * f.grid_import[g] * at(tar.price_import[g], k);
                if (tar.grid_carrier[g] == Carrier::Gas)
                    cb.gas += paid;
                else
                    cb.grid_import += paid;
                cb.grid_export_revenue += dt * f.grid_export[g] * at(tar.price_export[g], k);
            }
            cb.slack_penalty += tar.slack_weight * dt * f.slack * f.slack;
        }
    }
    for (std::size_t li = 0; li < sol.trade.size(); ++li) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double flow = sol.trade[li][k];
            if (flow == 0.0) continue;
            const int payer = flow > 0.0 ? params.link_hub_a.at(li) : params.link_hub_b.at(li);
            out.at(static_cast<std::size_t>(payer)).fees +=
                grid.dt_hours[k] * params.link_fee.at(li) * std::abs(flow);
        }
    }
    return out;
}

CostBreakdown evaluate_cost(const DispatchSolution& sol, const CostParams& params,
                            const horizon::TimeGrid& grid)
{
    CostBreakdown total;
    for (const auto& cb : evaluate_hub_costs(sol, params, grid)) {
        total.grid_import += cb.grid_import;
        total.grid_export_revenue += cb.grid_export_revenue;
        total.gas += cb.gas;
        total.fees += cb.fees;
        total.slack_penalty += cb.slack_penalty;
    }
    return total;
}

std::vector<HubStepFlows> extract_hub_flows(const Eigen::VectorXd& x,
                                            const VariableLayout& layout, int hub_pos)
{
    const auto& b = layout.hubs.at(static_cast<std::size_t>(hub_pos));
    std::vector<HubStepFlows> steps(layout.steps);
    for (std::size_t k = 0; k < layout.steps; ++k) {
        auto& f = steps[k];
        f.conv_input.resize(b.n_conv);
        for (int c = 0; c < b.n_conv; ++c) f.conv_input[c] = x[layout.conv_input(hub_pos, c, k)];
        f.soc.resize(b.n_sto);
        f.charge.resize(b.n_sto);
        f.discharge.resize(b.n_sto);
        for (int s = 0; s < b.n_sto; ++s) {
            f.soc[s] = x[layout.soc(hub_pos, s, k)];
            f.charge[s] = x[layout.charge(hub_pos, s, k)];
            f.discharge[s] = x[layout.discharge(hub_pos, s, k)];
        }
        f.grid_import.resize(b.n_grid);
        f.grid_export.resize(b.n_grid);
        for (int g = 0; g < b.n_grid; ++g) {
            f.grid_import[g] = x[layout.grid_import(hub_pos, g, k)];
            f.grid_export[g] = x[layout.grid_export(hub_pos, g, k)];
        }
        f.renewable.resize(b.n_ren);
        for (int r = 0; r < b.n_ren; ++r) f.renewable[r] = x[layout.renewable(hub_pos, r, k)];
        const int je = layout.slack(hub_pos, k);
        f.slack = je >= 0 ? x[je] : 0.0;
    }
    return steps;
}

DispatchSolution extract_solution(const qp::QpResult& result, const QpTemplate& tpl,
                                  const model::Network& net, const horizon::TimeGrid& grid)
{
    if (result.status == qp::SolveStatus::Infeasible) {
        std::string where = "unknown constraint";
        if (result.x.size() == tpl.qp.n_vars()) {
            const Eigen::VectorXd ax = tpl.qp.A * result.x;
            double worst = 0.0;
            Eigen::Index row = -1;
            for (Eigen::Index i = 0; i < ax.size(); ++i) {
                const double v = std::max({tpl.qp.l[i] - ax[i], ax[i] - tpl.qp.u[i], 0.0});
                if (v > worst) {
                    worst = v;
                    row = i;
                }
            }
            if (row >= 0)
                where = row < tpl.m_struct
                            ? tpl.row_desc[static_cast<std::size_t>(row)]
                            : "bound of column " + std::to_string(row - tpl.m_struct);
        }
        throw std::runtime_error("dispatch: QP certified infeasible near " + where);
    }

    DispatchSolution sol;
    sol.grid = grid;
    sol.status = result.status;
    sol.iterations = result.iterations;
    sol.objective = qp::objective(tpl.qp, result.x);
    sol.hub_ids.reserve(net.hubs.size());
    for (const auto& hub : net.hubs) sol.hub_ids.push_back(hub.id);
    for (int h = 0; h < static_cast<int>(net.hubs.size()); ++h)
        sol.hub_flows.push_back(extract_hub_flows(result.x, tpl.layout, h));
    sol.trade.resize(net.links.size());
    for (std::size_t li = 0; li < net.links.size(); ++li) {
        sol.trade[li].resize(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k)
            sol.trade[li][k] = result.x[tpl.layout.trade(static_cast<int>(li), k)];
    }

    const auto params = cost_params(net);
    sol.hub_cost = evaluate_hub_costs(sol, params, grid);
    sol.cost = evaluate_cost(sol, params, grid);
    return sol;
}

DispatchSolution solve(const model::Network& net, const horizon::TimeGrid& grid, Mode mode,
                       const qp::SolverSettings& settings)
{
    auto tpl = build_qp(net, grid, mode);
    qp::QpSolver solver(tpl.qp, settings);
    const auto result = solver.solve();
    return extract_solution(result, tpl, net, grid);
}

FeasibilityReport check_feasibility(const DispatchSolution& sol, const model::Network& net,
                                    const horizon::TimeGrid& grid, double tol)
{
    FeasibilityReport rep;
    rep.tol = tol;
    auto note = [&rep](double& family, double value, const std::string& what) {
        if (value > family) family = value;
        double current = std::max({rep.balance_kw, rep.dynamics_kwh, rep.bound_kw, rep.trade_kw});
        if (value >= current && value > 0.0) rep.worst = what;
    };
    auto bound = [&](double v, double lo, double hi, const std::string& what) {
        note(rep.bound_kw, std::max({lo - v, v - hi, 0.0}), what);
    };

    const auto links = network_links(net);
    const auto present = presence(net.hubs, links);

    for (std::size_t h = 0; h < net.hubs.size(); ++h) {
        const auto& hub = net.hubs[h];
        const auto& steps = sol.hub_flows.at(h);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double dt = grid.dt_hours[k];
            const auto& f = steps.at(k);
            const std::string at_step = " at hub " + hub.id + " step " + std::to_string(k);

            for (std::size_t c = 0; c < hub.converters.size(); ++c)
                bound(f.conv_input[c], hub.converters[c].input_min, hub.converters[c].input_max,
                      "converter bound" + at_step);
            for (std::size_t s = 0; s < hub.storages.size(); ++s) {
                const auto& sto = hub.storages[s];
                bound(f.soc[s], sto.soc_min, sto.soc_max, "soc bound" + at_step);
                bound(f.charge[s], 0.0, sto.charge_max, "charge bound" + at_step);
                bound(f.discharge[s], 0.0, sto.discharge_max, "discharge bound" + at_step);
                const double prev = k == 0 ? sto.soc_init : steps[k - 1].soc[s];
                const double expect = std::pow(sto.decay, dt) * prev +
                                      dt * (sto.eta_charge * f.charge[s] -
                                            f.discharge[s] / sto.eta_discharge);
                note(rep.dynamics_kwh, std::abs(f.soc[s] - expect),
                     "storage dynamics" + at_step);
            }
            for (std::size_t g = 0; g < hub.grids.size(); ++g) {
                bound(f.grid_import[g], 0.0, hub.grids[g].import_max, "import bound" + at_step);
                bound(f.grid_export[g], 0.0, hub.grids[g].export_max, "export bound" + at_step);
            }
            for (std::size_t r = 0; r < hub.renewables.size(); ++r) {
                const double avail = at(hub.renewables[r].profile, k);
                const double lo = hub.renewables[r].curtailable ? 0.0 : avail;
                bound(f.renewable[r], lo, avail, "renewable bound" + at_step);
            }

            for (Carrier carrier : model::kAllCarriers) {
                if (!present[h][cidx(carrier)]) continue;
                double sum = 0.0;
                for (std::size_t c = 0; c < hub.converters.size(); ++c) {
                    const auto& conv = hub.converters[c];
                    if (auto it = conv.output_gain.find(carrier); it != conv.output_gain.end())
                        sum += it->second * f.conv_input[c];
                    if (auto it = conv.input_share.find(carrier); it != conv.input_share.end())
                        sum -= it->second * f.conv_input[c];
                }
                for (std::size_t s = 0; s < hub.storages.size(); ++s)
                    if (hub.storages[s].carrier == carrier) sum += f.discharge[s] - f.charge[s];
                for (std::size_t g = 0; g < hub.grids.size(); ++g)
                    if (hub.grids[g].carrier == carrier)
                        sum += f.grid_import[g] - f.grid_export[g];
                for (std::size_t r = 0; r < hub.renewables.size(); ++r)
                    if (hub.renewables[r].carrier == carrier) sum += f.renewable[r];
                if (carrier == Carrier::HeatMT) sum += f.slack;
                for (const auto& [li, sign] : net.incidence(static_cast<int>(h), carrier))
                    sum += sign * sol.trade.at(static_cast<std::size_t>(li)).at(k);
                double demand = 0.0;
                if (carrier == Carrier::Electricity) demand = at(hub.demand_e, k);
                if (carrier == Carrier::HeatMT) demand = at(hub.demand_h, k);
                note(rep.balance_kw, std::abs(sum - demand),
                     std::string(model::to_string(carrier)) + " balance" + at_step);
            }
        }
    }

    for (std::size_t li = 0; li < net.links.size(); ++li)
        for (std::size_t k = 0; k < grid.size(); ++k)
            note(rep.trade_kw, std::abs(sol.trade[li][k]) - net.links[li].limit > 0.0
                                   ? std::abs(sol.trade[li][k]) - net.links[li].limit
                                   : 0.0,
                 "trade limit on link " + std::to_string(li) + " step " + std::to_string(k));

    return rep;
}

model::Network window_network(const model::Network& base, double base_dt_hours,
                              std::size_t start_index, const horizon::TimeGrid& grid)
{
    if (!(base_dt_hours > 0.0)) throw std::invalid_argument("window_network: base dt must be > 0");
    const double steps_d = grid.span_hours() / base_dt_hours;
    const auto span_steps = static_cast<std::size_t>(std::llround(steps_d));

    auto window = [&](const horizon::Series& s, const std::string& what) {
        if (s.empty()) return s;
        if (s.size() < start_index + span_steps)
            throw std::invalid_argument("window_network: series " + what + " too short (" +
                                        std::to_string(s.size()) + " < " +
                                        std::to_string(start_index + span_steps) + ")");
        return horizon::resample(s.slice(start_index, span_steps), base_dt_hours, grid);
    };

    model::Network out = base;
    for (auto& hub : out.hubs) {
        hub.demand_e = window(hub.demand_e, hub.id + "/demand_e");
        hub.demand_h = window(hub.demand_h, hub.id + "/demand_h");
        for (auto& r : hub.renewables) r.profile = window(r.profile, hub.id + "/" + r.id);
        for (auto& g : hub.grids) {
            g.price_import = window(g.price_import, hub.id + "/price_import");
            g.price_export = window(g.price_export, hub.id + "/price_export");
        }
        for (auto& s : hub.storages) s.drain = window(s.drain, hub.id + "/" + s.id + "/drain");
    }
    return out;
}

}  // namespace hubmesh::dispatch
