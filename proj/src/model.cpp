#include "gridshare/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace gridshare {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

double gaussian_shape(double hour, double centre, double width) {
    const double z = (hour - centre) / width;
    return std::exp(-z * z);
}

}  // namespace

double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

void NetworkConfig::validate() const {
    require(region_side_km > 0.0, "network.region_side_km must be positive");
    require(bs_count >= 1, "network.bs_count must be at least 1");
    require(slot_count >= 1, "network.slot_count must be at least 1");
    require(slot_hours > 0.0, "network.slot_hours must be positive");
    require(exclusion_km >= 0.0, "network.exclusion_km must be non-negative");
    require(panel_scale_min >= 0.0 && panel_scale_min <= panel_scale_max,
            "network.panel_scale_min must be in [0, panel_scale_max]");
}

double GenerationModel::peak_power_w() const {
    return panel_area_m2 * peak_irradiance_kw_m2 * 1000.0 * efficiency;
}

void GenerationModel::validate() const {
    require(efficiency > 0.0 && efficiency <= 1.0, "generation.efficiency must be in (0, 1]");
    require(panel_area_m2 >= 0.0 && peak_irradiance_kw_m2 >= 0.0,
            "generation panel area and irradiance must be non-negative");
    require(peak_width_hours > 0.0, "generation.peak_width_hours must be positive");
    require(noise_std_wh >= 0.0, "generation.noise_std_wh must be non-negative");
}

double ConsumptionModel::peak_power_w() const {
    return load_scale * (tx_power_w * max_users) + static_power_w;
}

double ConsumptionModel::max_energy_wh(double slot_hours) const {
    return peak_power_w() * slot_hours;
}

void ConsumptionModel::validate() const {
    require(weight_a >= 0.0 && weight_b >= 0.0, "consumption mixing weights must be >= 0");
    require(std::abs(weight_a + weight_b - 1.0) <= 1e-9,
            "consumption mixing weights must sum to 1");
    require(mode_a_width_hours > 0.0 && mode_b_width_hours > 0.0,
            "consumption mode widths must be positive");
    require(peak_power_w() > 0.0, "consumption peak power must be positive");
    require(noise_std_wh >= 0.0, "consumption.noise_std_wh must be non-negative");
}

void CableModel::validate() const {
    require(specific_resistance_ohm_per_m > 0.0, "cable.specific_resistance must be positive");
    require(rms_voltage_v > 0.0, "cable.rms_voltage_v must be positive");
    require(sharing_range_km >= 0.0, "cable.sharing_range_km must be non-negative");
}

void BatteryParams::validate() const {
    require(capacity_wh >= 0.0, "battery.capacity_wh must be non-negative");
    require(initial_wh >= 0.0 && initial_wh <= capacity_wh,
            "battery.initial_wh must lie in [0, capacity]");
    require(sell_threshold_wh >= 0.0 && sell_threshold_wh <= capacity_wh,
            "battery.sell_threshold_wh must lie in [0, capacity]");
}

PriceSchedule PriceSchedule::constant(int slots, double grid, double extra, double buy,
                                      double sell) {
    const auto n = static_cast<std::size_t>(slots);
    return PriceSchedule{std::vector<double>(n, grid), std::vector<double>(n, extra),
                         std::vector<double>(n, buy), std::vector<double>(n, sell)};
}

bool PriceSchedule::strict_ordering() const {
    for (std::size_t n = 0; n < grid.size(); ++n) {
        if (!(grid[n] > buy[n] && buy[n] >= sell[n] && sell[n] >= extra[n])) return false;
    }
    return true;
}

void PriceSchedule::validate(int slots) const {
    const auto n = static_cast<std::size_t>(slots);
    require(grid.size() == n && extra.size() == n && buy.size() == n && sell.size() == n,
            "price schedule length must equal the slot count");
    for (const auto* v : {&grid, &extra, &buy, &sell}) {
        for (double p : *v) require(p >= 0.0 && std::isfinite(p), "prices must be finite and >= 0");
    }
}

double Network::distance(int i, int j) const {
    return gridshare::distance(stations[static_cast<std::size_t>(i)].position,
                               stations[static_cast<std::size_t>(j)].position);
}

std::vector<Point> Network::positions() const {
    std::vector<Point> out;
    out.reserve(stations.size());
    for (const auto& s : stations) out.push_back(s.position);
    return out;
}

void Network::validate() const {
    config.validate();
    require(!stations.empty(), "network has no base stations");
    cable.validate();
    prices.validate(config.slot_count);
    for (const auto& s : stations) {
        s.generation.validate();
        s.consumption.validate();
        s.battery.validate();
        const double L = config.region_side_km;
        require(s.position.x >= 0.0 && s.position.x <= L && s.position.y >= 0.0 &&
                    s.position.y <= L,
                "base station position outside the region");
    }
}

std::vector<Point> generate_placement(const NetworkConfig& config, Rng& rng, long max_throws) {
    config.validate();
    const double L = config.region_side_km;
    const double d = config.exclusion_km;
    const int K = config.bs_count;
    if (K > 1 && K * std::numbers::pi * d * d > L * L) {
        throw PlacementInfeasible("exclusion discs of " + std::to_string(K) +
                                  " stations do not fit the region");
    }
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(K));
    long throws = 0;
    while (static_cast<int>(pts.size()) < K) {
        if (throws++ >= max_throws) {
            throw PlacementInfeasible("placement did not converge after " +
                                      std::to_string(max_throws) + " throws");
        }
        const Point p{rng.uniform(0.0, L), rng.uniform(0.0, L)};
        const bool clear = std::all_of(pts.begin(), pts.end(),
                                       [&](const Point& q) { return distance(p, q) >= d; });
        if (clear) pts.push_back(p);
    }
    return pts;
}

double slot_hour(int slot, double slot_hours) {
    return (slot - 0.5) * slot_hours + 0.5;
}

double mean_generation(const GenerationModel& model, int slot, double slot_hours) {
    return model.peak_power_w() *
           gaussian_shape(slot_hour(slot, slot_hours), model.peak_hour, model.peak_width_hours) *
           slot_hours;
}

double sample_generation(const GenerationModel& model, int slot, double slot_hours, Rng& rng) {
    const double mean = mean_generation(model, slot, slot_hours);
    const double value = mean + model.noise_std_wh * rng.normal();
    return std::clamp(value, 0.0, model.peak_power_w() * slot_hours);
}

double consumption_mixture(const ConsumptionModel& model, int slot, double slot_hours) {
    const double h = slot_hour(slot, slot_hours);
    const double root2pi = std::sqrt(2.0 * std::numbers::pi);
    return model.weight_a / (root2pi * model.mode_a_width_hours) *
               gaussian_shape(h, model.mode_a_hour, model.mode_a_width_hours) +
           model.weight_b / (root2pi * model.mode_b_width_hours) *
               gaussian_shape(h, model.mode_b_hour, model.mode_b_width_hours);
}

std::vector<double> consumption_profile(const ConsumptionModel& model, int slot_count,
                                        double slot_hours) {
    std::vector<double> mix(static_cast<std::size_t>(slot_count));
    for (int n = 1; n <= slot_count; ++n) mix[n - 1] = consumption_mixture(model, n, slot_hours);
    const double peak = *std::max_element(mix.begin(), mix.end());
    const double cmax = model.max_energy_wh(slot_hours);
    for (double& v : mix) v = peak > 0.0 ? cmax * (v / peak) : 0.0;  // exactly cmax at the peak
    return mix;
}

double mean_consumption(const ConsumptionModel& model, int slot, int slot_count,
                        double slot_hours) {
    return consumption_profile(model, slot_count, slot_hours)[static_cast<std::size_t>(slot - 1)];
}

double sample_consumption(const ConsumptionModel& model, int slot, int slot_count,
                          double slot_hours, Rng& rng) {
    const double mean = mean_consumption(model, slot, slot_count, slot_hours);
    const double value = mean + model.noise_std_wh * rng.normal();
    return std::clamp(value, 0.0, model.max_energy_wh(slot_hours));
}

NreStat nre_stats(const BaseStation& bs, int slot, int slot_count, double slot_hours) {
    const double g = mean_generation(bs.generation, slot, slot_hours);
    const double c = mean_consumption(bs.consumption, slot, slot_count, slot_hours);
    return {g - c, std::hypot(bs.generation.noise_std_wh, bs.consumption.noise_std_wh)};
}

EnergyMatrix mean_generation_matrix(const Network& net) {
    EnergyMatrix m(net.size(), net.slots());
    for (int i = 0; i < net.size(); ++i) {
        for (int n = 0; n < net.slots(); ++n) {
            m(i, n) = mean_generation(net.stations[i].generation, n + 1, net.tau());
        }
    }
    return m;
}

EnergyMatrix mean_consumption_matrix(const Network& net) {
    EnergyMatrix m(net.size(), net.slots());
    for (int i = 0; i < net.size(); ++i) {
        const auto profile = consumption_profile(net.stations[i].consumption, net.slots(), net.tau());
        for (int n = 0; n < net.slots(); ++n) m(i, n) = profile[static_cast<std::size_t>(n)];
    }
    return m;
}

Realization sample_realization(const Network& net, Rng& rng) {
    Realization r{EnergyMatrix(net.size(), net.slots()), mean_consumption_matrix(net)};
    for (int i = 0; i < net.size(); ++i) {
        for (int n = 0; n < net.slots(); ++n) {
            r.generation(i, n) = sample_generation(net.stations[i].generation, n + 1, net.tau(), rng);
        }
    }
    for (int i = 0; i < net.size(); ++i) {
        const auto& cons = net.stations[i].consumption;
        const double cmax = cons.max_energy_wh(net.tau());
        for (int n = 0; n < net.slots(); ++n) {
            const double v = r.consumption(i, n) + cons.noise_std_wh * rng.normal();
            r.consumption(i, n) = std::clamp(v, 0.0, cmax);
        }
    }
    return r;
}

}  // namespace gridshare
