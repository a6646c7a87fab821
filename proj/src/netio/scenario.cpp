#include "hubmesh/netio/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "hubmesh/netio/log.hpp"
#include "json.hpp"

namespace hubmesh::netio {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw std::runtime_error("scenario: " + what + " at " + (path.empty() ? "/" : path));
}

/// JSON navigation that carries its own pointer path for error messages.
struct Cursor {
    const json* node = nullptr;
    std::string path;

    const json& j() const { return *node; }

    Cursor at(const std::string& key) const
    {
        if (!node->is_object()) fail(path, "expected an object");
        const auto it = node->find(key);
        if (it == node->end()) fail(path + "/" + key, "missing required field");
        return {&*it, path + "/" + key};
    }

    std::optional<Cursor> find(const std::string& key) const
    {
        if (!node->is_object()) fail(path, "expected an object");
        const auto it = node->find(key);
        if (it == node->end()) return std::nullopt;
        return Cursor{&*it, path + "/" + key};
    }

    Cursor item(std::size_t i) const
    {
        return {&(*node)[i], path + "/" + std::to_string(i)};
    }

    std::size_t length() const
    {
        if (!node->is_array()) fail(path, "expected an array");
        return node->size();
    }

    double number() const
    {
        if (!node->is_number()) fail(path, "expected a number");
        return node->get<double>();
    }

    int integer() const
    {
        if (!node->is_number_integer()) fail(path, "expected an integer");
        return node->get<int>();
    }

    bool boolean() const
    {
        if (!node->is_boolean()) fail(path, "expected a boolean");
        return node->get<bool>();
    }

    std::string str() const
    {
        if (!node->is_string()) fail(path, "expected a string");
        return node->get<std::string>();
    }
};

double num_or(const Cursor& c, const std::string& key, double dflt)
{
    const auto f = c.find(key);
    return f ? f->number() : dflt;
}

int int_or(const Cursor& c, const std::string& key, int dflt)
{
    const auto f = c.find(key);
    return f ? f->integer() : dflt;
}

bool bool_or(const Cursor& c, const std::string& key, bool dflt)
{
    const auto f = c.find(key);
    return f ? f->boolean() : dflt;
}

model::Carrier parse_carrier(const Cursor& c)
{
    const auto parsed = model::carrier_from_string(c.str());
    if (!parsed) fail(c.path, "unknown carrier '" + c.str() + "'");
    return *parsed;
}

/// One referenced CSV, parsed once. First column must be `time` (ISO-8601);
/// the remaining columns are named value series.
struct CsvFile {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;  // per column
    std::size_t rows = 0;
    std::int64_t t0 = 0;
    std::int64_t dt_seconds = 0;
};

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

CsvFile parse_csv(const std::string& file)
{
    std::ifstream in(file);
    if (!in) throw std::runtime_error("scenario: cannot open data file '" + file + "'");

    CsvFile csv;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("scenario: empty data file '" + file + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    if (header.empty() || header[0] != "time")
        throw std::runtime_error("scenario: first column of '" + file + "' must be 'time'");
    csv.columns.assign(header.begin() + 1, header.end());
    csv.data.resize(csv.columns.size());

    std::int64_t prev = 0;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("scenario: '" + file + "' row " + std::to_string(row + 2) +
                                     " has " + std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        const std::int64_t t = parse_iso8601(cells[0]);
        if (row == 0) {
            csv.t0 = t;
        } else if (row == 1) {
            csv.dt_seconds = t - prev;
            if (csv.dt_seconds <= 0)
                throw std::runtime_error("scenario: non-increasing time column in '" + file + "'");
        } else if (t - prev != csv.dt_seconds) {
            throw std::runtime_error("scenario: non-uniform time column in '" + file + "' at row " +
                                     std::to_string(row + 2));
        }
        prev = t;
        for (std::size_t c = 0; c < csv.columns.size(); ++c) {
            const std::string& cell = cells[c + 1];
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw std::runtime_error("scenario: bad number '" + cell + "' in '" + file +
                                         "' row " + std::to_string(row + 2));
            csv.data[c].push_back(v);
        }
        ++row;
    }
    if (row == 0) throw std::runtime_error("scenario: no data rows in '" + file + "'");
    csv.rows = row;
    return csv;
}

struct LoadCtx {
    std::string dir;
    double base_dt_hours = 1.0;
    std::int64_t start_epoch = 0;
    std::size_t default_len = 0;  // length given to constant series
    std::map<std::string, CsvFile> csvs;

    const CsvFile& csv(const std::string& ref, const std::string& at)
    {
        const std::string file =
            ref.empty() || ref.front() == '/' ? ref : dir.empty() ? ref : dir + "/" + ref;
        auto it = csvs.find(file);
        if (it == csvs.end()) {
            try {
                it = csvs.emplace(file, parse_csv(file)).first;
            } catch (const std::exception& e) {
                throw std::runtime_error(std::string(e.what()) + " (referenced at " + at + ")");
            }
        }
        const auto& csv = it->second;
        if (csv.t0 != start_epoch)
            throw std::runtime_error("scenario: '" + file + "' starts at " +
                                     format_iso8601(csv.t0) + ", scenario starts at " +
                                     format_iso8601(start_epoch));
        const auto want = static_cast<std::int64_t>(std::llround(base_dt_hours * 3600.0));
        if (csv.rows > 1 && csv.dt_seconds != want)
            throw std::runtime_error("scenario: '" + file + "' is sampled every " +
                                     std::to_string(csv.dt_seconds) +
                                     " s, the base resolution is " + std::to_string(want) + " s");
        return csv;
    }
};

horizon::Series parse_series(LoadCtx& ctx, const Cursor& c, horizon::Unit unit)
{
    if (c.j().is_number())
        return horizon::Series::constant(unit, c.number(), ctx.default_len);
    if (c.j().is_array()) {
        horizon::Series s;
        s.unit = unit;
        s.v.reserve(c.length());
        for (std::size_t i = 0; i < c.length(); ++i) s.v.push_back(c.item(i).number());
        return s;
    }
    if (c.j().is_object()) {
        const auto file = c.at("csv").str();
        const auto column = c.at("column").str();
        const auto& csv = ctx.csv(file, c.path);
        for (std::size_t i = 0; i < csv.columns.size(); ++i)
            if (csv.columns[i] == column) return horizon::Series(unit, csv.data[i]);
        std::string have;
        for (const auto& name : csv.columns) have += (have.empty() ? "" : ", ") + name;
        fail(c.path, "column '" + column + "' not in '" + file + "' (has: " + have + ")");
    }
    fail(c.path, "expected a number, an array or {csv, column}");
}

horizon::Series series_or_empty(LoadCtx& ctx, const Cursor& parent, const std::string& key,
                                horizon::Unit unit)
{
    const auto f = parent.find(key);
    return f ? parse_series(ctx, *f, unit) : horizon::Series{};
}

model::Converter parse_converter(const Cursor& c)
{
    model::Converter conv;
    conv.id = c.at("id").str();
    const auto inputs = c.at("inputs");
    if (!inputs.j().is_object() || inputs.j().empty()) fail(inputs.path, "expected a non-empty object");
    for (const auto& [key, val] : inputs.j().items()) {
        const auto carrier = model::carrier_from_string(key);
        if (!carrier) fail(inputs.path + "/" + key, "unknown carrier");
        conv.input_share[*carrier] = Cursor{&val, inputs.path + "/" + key}.number();
    }
    const auto outputs = c.at("outputs");
    if (!outputs.j().is_object() || outputs.j().empty())
        fail(outputs.path, "expected a non-empty object");
    for (const auto& [key, val] : outputs.j().items()) {
        const auto carrier = model::carrier_from_string(key);
        if (!carrier) fail(outputs.path + "/" + key, "unknown carrier");
        conv.output_gain[*carrier] = Cursor{&val, outputs.path + "/" + key}.number();
    }
    conv.input_min = num_or(c, "input_min_kw", 0.0);
    conv.input_max = c.at("input_max_kw").number();
    return conv;
}

model::Storage parse_storage(LoadCtx& ctx, const Cursor& c)
{
    model::Storage s;
    s.id = c.at("id").str();
    s.carrier = parse_carrier(c.at("carrier"));
    s.capacity = c.at("capacity_kwh").number();
    s.soc_min = num_or(c, "soc_min_kwh", 0.0);
    s.soc_max = num_or(c, "soc_max_kwh", s.capacity);
    s.soc_init = c.at("soc_init_kwh").number();
    s.eta_charge = num_or(c, "eta_charge", 1.0);
    s.eta_discharge = num_or(c, "eta_discharge", 1.0);
    s.decay = num_or(c, "decay", 1.0);
    s.charge_max = c.at("charge_max_kw").number();
    s.discharge_max = c.at("discharge_max_kw").number();
    s.drain = series_or_empty(ctx, c, "drain_kw", horizon::Unit::Kw);
    return s;
}

model::GridConnection parse_grid_conn(LoadCtx& ctx, const Cursor& c)
{
    model::GridConnection g;
    g.carrier = parse_carrier(c.at("carrier"));
    g.price_import = series_or_empty(ctx, c, "price_import_chf_per_kwh", horizon::Unit::ChfPerKwh);
    g.price_export = series_or_empty(ctx, c, "price_export_chf_per_kwh", horizon::Unit::ChfPerKwh);
    // the validator wants matching lengths; an absent side defaults to zero
    if (g.price_import.size() != g.price_export.size()) {
        if (g.price_export.empty())
            g.price_export =
                horizon::Series::constant(horizon::Unit::ChfPerKwh, 0.0, g.price_import.size());
        else if (g.price_import.empty())
            g.price_import =
                horizon::Series::constant(horizon::Unit::ChfPerKwh, 0.0, g.price_export.size());
    }
    g.import_max = c.at("import_max_kw").number();
    g.export_max = num_or(c, "export_max_kw", 0.0);
    g.is_slack = bool_or(c, "slack", false);
    return g;
}

model::RenewableSource parse_renewable(LoadCtx& ctx, const Cursor& c)
{
    model::RenewableSource r;
    r.id = c.at("id").str();
    if (const auto f = c.find("carrier")) r.carrier = parse_carrier(*f);
    r.profile = parse_series(ctx, c.at("profile_kw"), horizon::Unit::Kw);
    r.curtailable = bool_or(c, "curtailable", true);
    return r;
}

model::Hub parse_hub(LoadCtx& ctx, const Cursor& c, mpc::EpisodeConfig& episode)
{
    model::Hub hub;
    hub.id = c.at("id").str();
    hub.slack_weight = num_or(c, "slack_weight", 1e3);
    hub.demand_e = series_or_empty(ctx, c, "demand_e_kw", horizon::Unit::Kw);
    hub.demand_h = series_or_empty(ctx, c, "demand_h_kw", horizon::Unit::Kw);
    if (const auto f = c.find("converters"))
        for (std::size_t i = 0; i < f->length(); ++i)
            hub.converters.push_back(parse_converter(f->item(i)));
    if (const auto f = c.find("storages"))
        for (std::size_t i = 0; i < f->length(); ++i)
            hub.storages.push_back(parse_storage(ctx, f->item(i)));
    if (const auto f = c.find("grids"))
        for (std::size_t i = 0; i < f->length(); ++i)
            hub.grids.push_back(parse_grid_conn(ctx, f->item(i)));
    if (const auto f = c.find("renewables"))
        for (std::size_t i = 0; i < f->length(); ++i) {
            const auto rc = f->item(i);
            hub.renewables.push_back(parse_renewable(ctx, rc));
            if (const auto pv = rc.find("pv_model")) {
                forecast::PvModel m;
                m.peak_kw = pv->at("peak_kw").number();
                m.coef_kw_per_wm2 = pv->at("coef_kw_per_wm2").number();
                episode.pv_models[hub.id + "/" + hub.renewables.back().id] = m;
            }
        }
    return hub;
}

std::vector<horizon::GridSegment> parse_grid_field(const Cursor& c)
{
    if (c.j().is_string()) return parse_grid_spec(c.str());
    std::vector<horizon::GridSegment> spec;
    for (std::size_t i = 0; i < c.length(); ++i) {
        const auto seg = c.item(i);
        if (seg.j().is_array()) {
            if (seg.length() != 2) fail(seg.path, "expected [count, dt_hours]");
            spec.push_back({seg.item(0).integer(), seg.item(1).number()});
        } else {
            spec.push_back({seg.at("count").integer(), seg.at("dt_hours").number()});
        }
    }
    return spec;
}

qp::SolverSettings parse_qp_settings(const Cursor& c)
{
    qp::SolverSettings s;
    s.tol_abs = num_or(c, "tol_abs", s.tol_abs);
    s.tol_rel = num_or(c, "tol_rel", s.tol_rel);
    s.max_iter = int_or(c, "max_iter", s.max_iter);
    s.rho = num_or(c, "rho", s.rho);
    s.sigma = num_or(c, "sigma", s.sigma);
    s.alpha = num_or(c, "alpha", s.alpha);
    s.adaptive_rho = bool_or(c, "adaptive_rho", s.adaptive_rho);
    s.check_interval = int_or(c, "check_interval", s.check_interval);
    s.scaling_iters = int_or(c, "scaling_iters", s.scaling_iters);
    s.eps_infeas = num_or(c, "eps_infeas", s.eps_infeas);
    return s;
}

json dump_series(const horizon::Series& s)
{
    return json(s.v);
}

json dump_grid(const std::vector<horizon::GridSegment>& spec)
{
    json out = json::array();
    for (const auto& seg : spec) out.push_back({seg.count, seg.dt_hours});
    return out;
}

}  // namespace

std::int64_t Scenario::start_epoch() const
{
    return parse_iso8601(start);
}

std::int64_t parse_iso8601(const std::string& text)
{
    std::tm tm = {};
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &s) != 6)
        throw std::runtime_error("scenario: bad ISO-8601 timestamp '" + text + "'");
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = s;
    const time_t t = timegm(&tm);
    if (t == static_cast<time_t>(-1))
        throw std::runtime_error("scenario: unrepresentable timestamp '" + text + "'");
    return static_cast<std::int64_t>(t);
}

std::string format_iso8601(std::int64_t epoch_s)
{
    const time_t t = static_cast<time_t>(epoch_s);
    std::tm tm = {};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

std::vector<horizon::GridSegment> parse_grid_spec(const std::string& text)
{
    std::vector<horizon::GridSegment> spec;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        const auto x = token.find('x');
        if (x == std::string::npos)
            throw std::invalid_argument("grid spec: expected <count>x<hours>, got '" + token + "'");
        char* end = nullptr;
        const long count = std::strtol(token.c_str(), &end, 10);
        if (end != token.c_str() + x)
            throw std::invalid_argument("grid spec: bad count in '" + token + "'");
        const std::string hours = token.substr(x + 1);
        const double dt = std::strtod(hours.c_str(), &end);
        if (end == hours.c_str() || *end != '\0')
            throw std::invalid_argument("grid spec: bad duration in '" + token + "'");
        spec.push_back({static_cast<int>(count), dt});
    }
    if (spec.empty()) throw std::invalid_argument("grid spec: empty");
    return spec;
}

std::string format_grid_spec(const std::vector<horizon::GridSegment>& spec)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (i) os << ",";
        os << spec[i].count << "x" << spec[i].dt_hours;
    }
    return os.str();
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("scenario: cannot open '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("scenario: '" + path + "' is not valid JSON: " + e.what());
    }
    const Cursor root{&doc, ""};

    Scenario sc;
    sc.schema = root.at("schema").integer();
    if (sc.schema != 1)
        fail("/schema", "unsupported version " + std::to_string(sc.schema) + " (expected 1)");
    if (const auto f = root.find("name")) sc.name = f->str();
    if (const auto f = root.find("start")) sc.start = f->str();

    if (const auto f = root.find("grid"))
        sc.episode.grid_spec = parse_grid_field(*f);
    const auto grid = horizon::make_grid(sc.episode.grid_spec);

    if (const auto f = root.find("episode")) {
        sc.episode.n_steps = int_or(*f, "n_steps", sc.episode.n_steps);
        sc.episode.base_dt_hours = num_or(*f, "base_dt_hours", sc.episode.base_dt_hours);
        sc.episode.start_index =
            static_cast<std::size_t>(int_or(*f, "start_index", static_cast<int>(sc.episode.start_index)));
        sc.episode.weather_refresh_steps =
            int_or(*f, "weather_refresh_steps", sc.episode.weather_refresh_steps);
        if (const auto fc = f->find("forecast")) {
            if (!fc->j().is_object()) fail(fc->path, "expected an object");
            for (const auto& [hub_id, val] : fc->j().items()) {
                const Cursor vc{&val, fc->path + "/" + hub_id};
                sc.episode.hub_forecast[hub_id] = forecast::kind_from_string(vc.str());
            }
        }
    }

    LoadCtx ctx;
    const auto slash = path.find_last_of('/');
    ctx.dir = slash == std::string::npos ? std::string() : path.substr(0, slash);
    ctx.base_dt_hours = sc.episode.base_dt_hours;
    ctx.start_epoch = sc.start_epoch();
    const auto horizon_steps = static_cast<std::size_t>(
        std::llround(grid.span_hours() / sc.episode.base_dt_hours));
    ctx.default_len =
        sc.episode.start_index + static_cast<std::size_t>(sc.episode.n_steps) + horizon_steps;

    if (const auto f = root.find("episode"))
        if (const auto irr = f->find("irradiance_wm2"))
            sc.episode.irradiance = parse_series(ctx, *irr, horizon::Unit::WPerM2);

    if (const auto f = root.find("solver")) {
        sc.admm.rho = num_or(*f, "rho", sc.admm.rho);
        sc.admm.tol_primal = num_or(*f, "tol_primal", sc.admm.tol_primal);
        sc.admm.tol_dual = num_or(*f, "tol_dual", sc.admm.tol_dual);
        sc.admm.max_iter = int_or(*f, "max_iter", sc.admm.max_iter);
        sc.admm.adapt = bool_or(*f, "adapt", sc.admm.adapt);
        sc.admm.parallel = bool_or(*f, "parallel", sc.admm.parallel);
        if (const auto q = f->find("qp")) sc.qp = parse_qp_settings(*q);
    }
    sc.admm.qp = sc.qp;

    const auto hubs = root.at("hubs");
    if (hubs.length() == 0) fail("/hubs", "needs at least one hub");
    for (std::size_t i = 0; i < hubs.length(); ++i)
        sc.network.hubs.push_back(parse_hub(ctx, hubs.item(i), sc.episode));
    std::sort(sc.network.hubs.begin(), sc.network.hubs.end(),
              [](const model::Hub& a, const model::Hub& b) { return a.id < b.id; });

    if (const auto links = root.find("links")) {
        for (std::size_t i = 0; i < links->length(); ++i) {
            const auto lc = links->item(i);
            model::TradeLink link;
            link.id = int_or(lc, "id", static_cast<int>(i));
            link.hub_a = lc.at("hub_a").str();
            link.hub_b = lc.at("hub_b").str();
            if (const auto f = lc.find("carrier")) link.carrier = parse_carrier(*f);
            link.limit = lc.at("limit_kw").number();
            link.fee = num_or(lc, "fee_chf_per_kwh", 0.0);
            if (link.limit == 0.0) {
                log_info("dropping zero-limit link " + link.hub_a + "--" + link.hub_b);
                continue;
            }
            if (sc.network.hub_index(link.hub_a) < 0)
                fail(lc.path + "/hub_a", "unknown hub '" + link.hub_a + "'");
            if (sc.network.hub_index(link.hub_b) < 0)
                fail(lc.path + "/hub_b", "unknown hub '" + link.hub_b + "'");
            sc.network.links.push_back(link);
        }
        std::sort(sc.network.links.begin(), sc.network.links.end(),
                  [](const model::TradeLink& a, const model::TradeLink& b) { return a.id < b.id; });
        for (std::size_t i = 1; i < sc.network.links.size(); ++i)
            if (sc.network.links[i].id == sc.network.links[i - 1].id)
                fail("/links", "duplicate link id " + std::to_string(sc.network.links[i].id));
        for (std::size_t i = 0; i < sc.network.links.size(); ++i)
            sc.network.links[i].id = static_cast<int>(i);
    }

    const auto report = model::validate_network(sc.network);
    if (!report.ok())
        throw std::runtime_error("scenario: '" + path + "' failed validation:\n" +
                                 report.to_string());
    return sc;
}

void save_scenario(const Scenario& sc, const std::string& path)
{
    json doc;
    doc["schema"] = sc.schema;
    if (!sc.name.empty()) doc["name"] = sc.name;
    doc["start"] = sc.start;
    doc["grid"] = dump_grid(sc.episode.grid_spec);

    json ep;
    ep["n_steps"] = sc.episode.n_steps;
    ep["base_dt_hours"] = sc.episode.base_dt_hours;
    ep["start_index"] = sc.episode.start_index;
    ep["weather_refresh_steps"] = sc.episode.weather_refresh_steps;
    if (!sc.episode.hub_forecast.empty()) {
        json fc;
        for (const auto& [hub_id, kind] : sc.episode.hub_forecast)
            fc[hub_id] = forecast::to_string(kind);
        ep["forecast"] = fc;
    }
    if (!sc.episode.irradiance.empty()) ep["irradiance_wm2"] = dump_series(sc.episode.irradiance);
    doc["episode"] = ep;

    json solver;
    solver["rho"] = sc.admm.rho;
    solver["tol_primal"] = sc.admm.tol_primal;
    solver["tol_dual"] = sc.admm.tol_dual;
    solver["max_iter"] = sc.admm.max_iter;
    solver["adapt"] = sc.admm.adapt;
    solver["parallel"] = sc.admm.parallel;
    json qps;
    qps["tol_abs"] = sc.qp.tol_abs;
    qps["tol_rel"] = sc.qp.tol_rel;
    qps["max_iter"] = sc.qp.max_iter;
    qps["rho"] = sc.qp.rho;
    qps["sigma"] = sc.qp.sigma;
    qps["alpha"] = sc.qp.alpha;
    qps["adaptive_rho"] = sc.qp.adaptive_rho;
    qps["check_interval"] = sc.qp.check_interval;
    qps["scaling_iters"] = sc.qp.scaling_iters;
    qps["eps_infeas"] = sc.qp.eps_infeas;
    solver["qp"] = qps;
    doc["solver"] = solver;

    json hubs = json::array();
    for (const auto& hub : sc.network.hubs) {
        json h;
        h["id"] = hub.id;
        h["slack_weight"] = hub.slack_weight;
        if (!hub.demand_e.empty()) h["demand_e_kw"] = dump_series(hub.demand_e);
        if (!hub.demand_h.empty()) h["demand_h_kw"] = dump_series(hub.demand_h);
        if (!hub.converters.empty()) {
            json arr = json::array();
            for (const auto& conv : hub.converters) {
                json c;
                c["id"] = conv.id;
                for (const auto& [carrier, share] : conv.input_share)
                    c["inputs"][model::to_string(carrier)] = share;
                for (const auto& [carrier, gain] : conv.output_gain)
                    c["outputs"][model::to_string(carrier)] = gain;
                c["input_min_kw"] = conv.input_min;
                c["input_max_kw"] = conv.input_max;
                arr.push_back(c);
            }
            h["converters"] = arr;
        }
        if (!hub.storages.empty()) {
            json arr = json::array();
            for (const auto& s : hub.storages) {
                json e;
                e["id"] = s.id;
                e["carrier"] = model::to_string(s.carrier);
                e["capacity_kwh"] = s.capacity;
                e["soc_min_kwh"] = s.soc_min;
                e["soc_max_kwh"] = s.soc_max;
                e["soc_init_kwh"] = s.soc_init;
                e["eta_charge"] = s.eta_charge;
                e["eta_discharge"] = s.eta_discharge;
                e["decay"] = s.decay;
                e["charge_max_kw"] = s.charge_max;
                e["discharge_max_kw"] = s.discharge_max;
                if (!s.drain.empty()) e["drain_kw"] = dump_series(s.drain);
                arr.push_back(e);
            }
            h["storages"] = arr;
        }
        if (!hub.grids.empty()) {
            json arr = json::array();
            for (const auto& g : hub.grids) {
                json e;
                e["carrier"] = model::to_string(g.carrier);
                if (!g.price_import.empty())
                    e["price_import_chf_per_kwh"] = dump_series(g.price_import);
                if (!g.price_export.empty())
                    e["price_export_chf_per_kwh"] = dump_series(g.price_export);
                e["import_max_kw"] = g.import_max;
                e["export_max_kw"] = g.export_max;
                e["slack"] = g.is_slack;
                arr.push_back(e);
            }
            h["grids"] = arr;
        }
        if (!hub.renewables.empty()) {
            json arr = json::array();
            for (const auto& r : hub.renewables) {
                json e;
                e["id"] = r.id;
                e["carrier"] = model::to_string(r.carrier);
                e["profile_kw"] = dump_series(r.profile);
                e["curtailable"] = r.curtailable;
                const auto pv = sc.episode.pv_models.find(hub.id + "/" + r.id);
                if (pv != sc.episode.pv_models.end()) {
                    e["pv_model"] = {{"peak_kw", pv->second.peak_kw},
                                     {"coef_kw_per_wm2", pv->second.coef_kw_per_wm2}};
                }
                arr.push_back(e);
            }
            h["renewables"] = arr;
        }
        hubs.push_back(h);
    }
    doc["hubs"] = hubs;

    json links = json::array();
    for (const auto& link : sc.network.links) {
        json e;
        e["id"] = link.id;
        e["hub_a"] = link.hub_a;
        e["hub_b"] = link.hub_b;
        e["carrier"] = model::to_string(link.carrier);
        e["limit_kw"] = link.limit;
        e["fee_chf_per_kwh"] = link.fee;
        links.push_back(e);
    }
    doc["links"] = links;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("scenario: cannot write '" + path + "'");
    out << doc.dump(2) << "\n";
}

}  // namespace hubmesh::netio
