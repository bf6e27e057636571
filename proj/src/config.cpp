#include "gridshare/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

namespace gridshare {

using nlohmann::json;

namespace {

// Copies present keys into fields and remembers them for the unknown-key check.
class Section {
public:
    Section(const json& doc, std::string name) : doc_(doc), name_(std::move(name)) {
        if (!doc_.is_object()) throw std::invalid_argument("config section '" + name_ + "' must be an object");
    }

    template <typename T>
    Section& get(const char* key, T& field) {
        seen_.insert(key);
        if (auto it = doc_.find(key); it != doc_.end()) {
            try {
                field = it->get<T>();
            } catch (const json::exception& e) {
                throw std::invalid_argument("config field '" + name_ + "." + key + "': " + e.what());
            }
        }
        return *this;
    }

    const json* child(const char* key) {
        seen_.insert(key);
        auto it = doc_.find(key);
        return it == doc_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (const auto& [key, value] : doc_.items()) {
            if (!seen_.count(key)) throw std::invalid_argument("unknown config key '" + name_ + "." + key + "'");
        }
    }

private:
    const json& doc_;
    std::string name_;
    std::set<std::string> seen_;
};

void read(Section s, NetworkConfig& c) {
    s.get("region_side_km", c.region_side_km)
        .get("bs_count", c.bs_count)
        .get("slot_count", c.slot_count)
        .get("slot_hours", c.slot_hours)
        .get("exclusion_km", c.exclusion_km)
        .get("rng_seed", c.rng_seed)
        .get("panel_scale_min", c.panel_scale_min)
        .get("panel_scale_max", c.panel_scale_max)
        .finish();
}

void read(Section s, GenerationModel& g) {
    s.get("panel_area_m2", g.panel_area_m2)
        .get("peak_irradiance_kw_m2", g.peak_irradiance_kw_m2)
        .get("efficiency", g.efficiency)
        .get("peak_hour", g.peak_hour)
        .get("peak_width_hours", g.peak_width_hours)
        .get("noise_std_wh", g.noise_std_wh)
        .finish();
}

void read(Section s, ConsumptionModel& c) {
    s.get("mode_a_hour", c.mode_a_hour)
        .get("mode_b_hour", c.mode_b_hour)
        .get("mode_a_width_hours", c.mode_a_width_hours)
        .get("mode_b_width_hours", c.mode_b_width_hours)
        .get("weight_a", c.weight_a)
        .get("weight_b", c.weight_b)
        .get("tx_power_w", c.tx_power_w)
        .get("max_users", c.max_users)
        .get("load_scale", c.load_scale)
        .get("static_power_w", c.static_power_w)
        .get("noise_std_wh", c.noise_std_wh)
        .finish();
}

void read(Section s, CableModel& c) {
    s.get("specific_resistance_ohm_per_m", c.specific_resistance_ohm_per_m)
        .get("rms_voltage_v", c.rms_voltage_v)
        .get("sharing_range_km", c.sharing_range_km)
        .finish();
}

void read(Section s, BatteryParams& b) {
    s.get("capacity_wh", b.capacity_wh)
        .get("initial_wh", b.initial_wh)
        .get("sell_threshold_wh", b.sell_threshold_wh)
        .finish();
}

std::string metric_name(MetricKind k) { return k == MetricKind::Aea ? "aea" : "sea"; }

void read(Section s, ClusteringParams& p) {
    std::string metric = metric_name(p.metric);
    s.get("aea_penalty", p.aea_penalty)
        .get("sea_floor", p.sea_floor)
        .get("energy_gap_wh", p.energy_gap_wh)
        .get("low_threshold", p.low_threshold)
        .get("high_threshold", p.high_threshold)
        .get("metric", metric)
        .finish();
    if (metric == "aea") {
        p.metric = MetricKind::Aea;
    } else if (metric == "sea") {
        p.metric = MetricKind::Sea;
    } else {
        throw std::invalid_argument("clustering.metric must be 'aea' or 'sea'");
    }
}

void read(Section s, DispatchSettings& d) {
    s.get("knowledge", d.knowledge)
        .get("loss_segments", d.loss_segments)
        .get("scenario_cap", d.scenario_cap)
        .get("scenario_points", d.scenario_points)
        .get("deviation", d.deviation);
    if (const json* solver = s.child("solver")) {
        Section(*solver, "dispatch.solver")
            .get("feasibility_tol", d.solver.feasibility_tol)
            .get("optimality_tol", d.solver.optimality_tol)
            .get("pivot_tol", d.solver.pivot_tol)
            .get("refactor_interval", d.solver.refactor_interval)
            .get("perturbation", d.solver.perturbation)
            .get("max_iterations", d.solver.max_iterations)
            .finish();
    }
    s.finish();
}

void read(Section s, HarnessSettings& h) {
    s.get("iterations", h.iterations)
        .get("sharing", h.sharing)
        .get("clustering", h.clustering)
        .get("realization", h.realization)
        .get("average_placements", h.average_placements)
        .finish();
}

std::vector<double> read_price(const json& v, const char* name) {
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array() && !v.empty()) return v.get<std::vector<double>>();
    throw std::invalid_argument(std::string("prices.") + name + " must be a number or a non-empty array");
}

Point read_point(const json& v) {
    if (!v.is_array() || v.size() != 2) throw std::invalid_argument("station position must be [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<double> expand(const std::vector<double>& v, int slots, const char* name) {
    if (v.size() == 1) return std::vector<double>(static_cast<std::size_t>(slots), v[0]);
    if (static_cast<int>(v.size()) == slots) return v;
    throw std::invalid_argument(std::string("prices.") + name + " needs 1 or slot_count values");
}

json to_json(const GenerationModel& g) {
    return {{"panel_area_m2", g.panel_area_m2},
            {"peak_irradiance_kw_m2", g.peak_irradiance_kw_m2},
            {"efficiency", g.efficiency},
            {"peak_hour", g.peak_hour},
            {"peak_width_hours", g.peak_width_hours},
            {"noise_std_wh", g.noise_std_wh}};
}

json to_json(const ConsumptionModel& c) {
    return {{"mode_a_hour", c.mode_a_hour},     {"mode_b_hour", c.mode_b_hour},
            {"mode_a_width_hours", c.mode_a_width_hours},
            {"mode_b_width_hours", c.mode_b_width_hours},
            {"weight_a", c.weight_a},           {"weight_b", c.weight_b},
            {"tx_power_w", c.tx_power_w},       {"max_users", c.max_users},
            {"load_scale", c.load_scale},       {"static_power_w", c.static_power_w},
            {"noise_std_wh", c.noise_std_wh}};
}

json to_json(const BatteryParams& b) {
    return {{"capacity_wh", b.capacity_wh},
            {"initial_wh", b.initial_wh},
            {"sell_threshold_wh", b.sell_threshold_wh}};
}

json price_json(const std::vector<double>& v) {
    return v.size() == 1 ? json(v[0]) : json(v);
}

}  // namespace

PriceSchedule Config::prices() const {
    const int n = network.slot_count;
    PriceSchedule p;
    p.grid = expand(grid_price, n, "grid");
    p.extra = expand(extra_price, n, "extra");
    p.buy = expand(buy_price, n, "buy");
    p.sell = expand(sell_price, n, "sell");
    return p;
}

void Config::validate() const {
    network.validate();
    generation.validate();
    consumption.validate();
    cable.validate();
    battery.validate();
    prices().validate(network.slot_count);
    clustering_params(*this).validate();
    if (dispatch.knowledge != "zero" && dispatch.knowledge != "perfect" && dispatch.knowledge != "partial") {
        throw std::invalid_argument("dispatch.knowledge must be zero, perfect or partial");
    }
    if (dispatch.loss_segments < 1) throw std::invalid_argument("dispatch.loss_segments must be >= 1");
    if (dispatch.scenario_cap < 1) throw std::invalid_argument("dispatch.scenario_cap must be >= 1");
    if (dispatch.scenario_points < 1) throw std::invalid_argument("dispatch.scenario_points must be >= 1");
    if (!(dispatch.deviation >= 0.0 && dispatch.deviation < 1.0)) {
        throw std::invalid_argument("dispatch.deviation must lie in [0, 1)");
    }
    if (harness.iterations < 1) throw std::invalid_argument("harness.iterations must be >= 1");
    if (harness.realization != "gaussian" && harness.realization != "discrete") {
        throw std::invalid_argument("harness.realization must be gaussian or discrete");
    }
    for (const auto& o : base_stations) {
        if (o.id < 0 || o.id >= network.bs_count) {
            throw std::invalid_argument("base_stations entry refers to station " + std::to_string(o.id));
        }
    }
}

Config config_from_json(const json& doc) {
    Config c;
    Section top(doc, "config");
    if (const json* v = top.child("network")) read(Section(*v, "network"), c.network);
    if (const json* v = top.child("generation")) read(Section(*v, "generation"), c.generation);
    if (const json* v = top.child("consumption")) read(Section(*v, "consumption"), c.consumption);
    if (const json* v = top.child("cable")) read(Section(*v, "cable"), c.cable);
    if (const json* v = top.child("battery")) read(Section(*v, "battery"), c.battery);
    if (const json* v = top.child("prices")) {
        Section prices(*v, "prices");
        if (const json* p = prices.child("grid")) c.grid_price = read_price(*p, "grid");
        if (const json* p = prices.child("extra")) c.extra_price = read_price(*p, "extra");
        if (const json* p = prices.child("buy")) c.buy_price = read_price(*p, "buy");
        if (const json* p = prices.child("sell")) c.sell_price = read_price(*p, "sell");
        prices.finish();
    }
    if (const json* v = top.child("clustering")) read(Section(*v, "clustering"), c.clustering);
    if (const json* v = top.child("dispatch")) read(Section(*v, "dispatch"), c.dispatch);
    if (const json* v = top.child("harness")) read(Section(*v, "harness"), c.harness);
    if (const json* v = top.child("base_stations")) {
        if (!v->is_array()) throw std::invalid_argument("base_stations must be an array");
        for (const auto& entry : *v) {
            StationOverride o;
            Section s(entry, "base_stations[]");
            s.get("id", o.id);
            if (const json* p = s.child("position")) o.position = read_point(*p);
            if (const json* g = s.child("generation")) {
                GenerationModel m = c.generation;
                read(Section(*g, "base_stations[].generation"), m);
                o.generation = m;
            }
            if (const json* g = s.child("consumption")) {
                ConsumptionModel m = c.consumption;
                read(Section(*g, "base_stations[].consumption"), m);
                o.consumption = m;
            }
            if (const json* g = s.child("battery")) {
                BatteryParams m = c.battery;
                read(Section(*g, "base_stations[].battery"), m);
                o.battery = m;
            }
            s.finish();
            c.base_stations.push_back(std::move(o));
        }
    }
    top.finish();
    c.validate();
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config file " + path + ": " + e.what());
    }
    return config_from_json(doc);
}

json config_to_json(const Config& c) {
    json out;
    out["network"] = {{"region_side_km", c.network.region_side_km},
                      {"bs_count", c.network.bs_count},
                      {"slot_count", c.network.slot_count},
                      {"slot_hours", c.network.slot_hours},
                      {"exclusion_km", c.network.exclusion_km},
                      {"rng_seed", c.network.rng_seed},
                      {"panel_scale_min", c.network.panel_scale_min},
                      {"panel_scale_max", c.network.panel_scale_max}};
    out["generation"] = to_json(c.generation);
    out["consumption"] = to_json(c.consumption);
    out["cable"] = {{"specific_resistance_ohm_per_m", c.cable.specific_resistance_ohm_per_m},
                    {"rms_voltage_v", c.cable.rms_voltage_v},
                    {"sharing_range_km", c.cable.sharing_range_km}};
    out["battery"] = to_json(c.battery);
    out["prices"] = {{"grid", price_json(c.grid_price)},
                     {"extra", price_json(c.extra_price)},
                     {"buy", price_json(c.buy_price)},
                     {"sell", price_json(c.sell_price)}};
    out["clustering"] = {{"aea_penalty", c.clustering.aea_penalty},
                         {"sea_floor", c.clustering.sea_floor},
                         {"energy_gap_wh", c.clustering.energy_gap_wh},
                         {"low_threshold", c.clustering.low_threshold},
                         {"high_threshold", c.clustering.high_threshold},
                         {"metric", metric_name(c.clustering.metric)}};
    out["dispatch"] = {{"knowledge", c.dispatch.knowledge},
                       {"loss_segments", c.dispatch.loss_segments},
                       {"scenario_cap", c.dispatch.scenario_cap},
                       {"scenario_points", c.dispatch.scenario_points},
                       {"deviation", c.dispatch.deviation},
                       {"solver",
                        {{"feasibility_tol", c.dispatch.solver.feasibility_tol},
                         {"optimality_tol", c.dispatch.solver.optimality_tol},
                         {"pivot_tol", c.dispatch.solver.pivot_tol},
                         {"refactor_interval", c.dispatch.solver.refactor_interval},
                         {"perturbation", c.dispatch.solver.perturbation},
                         {"max_iterations", c.dispatch.solver.max_iterations}}}};
    out["harness"] = {{"iterations", c.harness.iterations},
                      {"sharing", c.harness.sharing},
                      {"clustering", c.harness.clustering},
                      {"realization", c.harness.realization},
                      {"average_placements", c.harness.average_placements}};
    json stations = json::array();
    for (const auto& o : c.base_stations) {
        json s = {{"id", o.id}};
        if (o.position) s["position"] = {o.position->x, o.position->y};
        if (o.generation) s["generation"] = to_json(*o.generation);
        if (o.consumption) s["consumption"] = to_json(*o.consumption);
        if (o.battery) s["battery"] = to_json(*o.battery);
        stations.push_back(std::move(s));
    }
    out["base_stations"] = std::move(stations);
    return out;
}

Network build_network(const Config& c) {
    c.validate();
    Network net;
    net.config = c.network;
    net.cable = c.cable;
    net.prices = c.prices();

    const int K = c.network.bs_count;
    std::vector<bool> placed(static_cast<std::size_t>(K), false);
    for (const auto& o : c.base_stations) {
        if (o.position) placed[o.id] = true;
    }
    std::vector<Point> positions;
    if (std::all_of(placed.begin(), placed.end(), [](bool b) { return b; })) {
        positions.assign(static_cast<std::size_t>(K), Point{});
    } else {
        Rng rng(c.network.rng_seed);
        positions = generate_placement(c.network, rng);
    }

    Rng panels(mix_seed(c.network.rng_seed ^ 0xa4ea));
    for (int i = 0; i < K; ++i) {
        BaseStation bs;
        bs.id = i;
        bs.position = positions[i];
        bs.generation = c.generation;
        bs.generation.panel_area_m2 *= panels.uniform(c.network.panel_scale_min, c.network.panel_scale_max);
        bs.consumption = c.consumption;
        bs.battery = c.battery;
        net.stations.push_back(bs);
    }
    for (const auto& o : c.base_stations) {
        auto& bs = net.stations[o.id];
        if (o.position) bs.position = *o.position;
        if (o.generation) bs.generation = *o.generation;
        if (o.consumption) bs.consumption = *o.consumption;
        if (o.battery) bs.battery = *o.battery;
    }
    net.validate();
    return net;
}

ClusteringParams clustering_params(const Config& c) {
    ClusteringParams p = c.clustering;
    p.sharing_range_km = c.cable.sharing_range_km;
    return p;
}

}  // namespace gridshare
