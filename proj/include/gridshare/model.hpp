#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gridshare/rng.hpp"

namespace gridshare {

struct Point {
    double x = 0.0;  // km
    double y = 0.0;  // km
};

double distance(const Point& a, const Point& b);

struct NetworkConfig {
    double region_side_km = 5.0;
    int bs_count = 20;
    int slot_count = 24;
    double slot_hours = 1.0;
    double exclusion_km = 0.5;
    std::uint64_t rng_seed = 1;
    // Each station's panel area is multiplied by a factor drawn uniformly
    // from this range; [1, 1] keeps every panel at the configured area.
    double panel_scale_min = 0.5;
    double panel_scale_max = 2.5;

    void validate() const;
};

/// Solar generation with a Gaussian daily shape around `peak_hour`.
struct GenerationModel {
    double panel_area_m2 = 1.0;
    double peak_irradiance_kw_m2 = 1.0;
    double efficiency = 0.2;
    double peak_hour = 12.0;
    double peak_width_hours = 3.0;
    double noise_std_wh = 5.0;

    /// Peak generation power in W (area x irradiance x efficiency).
    double peak_power_w() const;
    void validate() const;
};

/// Bi-modal traffic-driven consumption scaled by the EARTH power model.
struct ConsumptionModel {
    double mode_a_hour = 10.0;
    double mode_b_hour = 18.0;
    double mode_a_width_hours = 3.0;
    double mode_b_width_hours = 3.0;
    double weight_a = 0.6;
    double weight_b = 0.4;
    double tx_power_w = 0.3;
    double max_users = 50.0;
    double load_scale = 4.7;
    double static_power_w = 130.0;
    double noise_std_wh = 5.0;

    double peak_power_w() const;
    /// Maximum per-slot consumption C_max in Wh.
    double max_energy_wh(double slot_hours) const;
    void validate() const;
};

struct CableModel {
    double specific_resistance_ohm_per_m = 0.113e-3;
    double rms_voltage_v = 230.0;
    double sharing_range_km = 2.0;

    void validate() const;
};

struct BatteryParams {
    double capacity_wh = 100.0;
    double initial_wh = 100.0;
    double sell_threshold_wh = 50.0;

    void validate() const;
};

/// Per-slot prices in MU per Wh.
struct PriceSchedule {
    std::vector<double> grid;   // c^g, buy from the grid
    std::vector<double> extra;  // c^e, sell surplus back to the grid
    std::vector<double> buy;    // c^b, buy from other stations through the grid
    std::vector<double> sell;   // c^s, sell to other stations through the grid

    static PriceSchedule constant(int slots, double grid, double extra, double buy,
                                  double sell);

    int slot_count() const { return static_cast<int>(grid.size()); }
    /// True iff c^g > c^b >= c^s >= c^e in every slot.
    bool strict_ordering() const;
    void validate(int slots) const;
};

struct BaseStation {
    int id = 0;
    Point position;
    GenerationModel generation;
    ConsumptionModel consumption;
    BatteryParams battery;
};

/// Immutable physical description of the network.
struct Network {
    NetworkConfig config;
    std::vector<BaseStation> stations;
    CableModel cable;
    PriceSchedule prices;

    int size() const { return static_cast<int>(stations.size()); }
    int slots() const { return config.slot_count; }
    double tau() const { return config.slot_hours; }
    double distance(int i, int j) const;
    std::vector<Point> positions() const;
    void validate() const;
};

class PlacementInfeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Hard-core placement by sequential inhibition: uniform darts in the square,
/// rejected when closer than the exclusion distance to an accepted point.
std::vector<Point> generate_placement(const NetworkConfig& config, Rng& rng,
                                      long max_throws = 1'000'000);

/// Hour stamp of slot n (1-based). Hourly slots are stamped at hour n; longer
/// slots at their midpoint shifted by half an hour so both agree for tau = 1.
double slot_hour(int slot, double slot_hours);

double mean_generation(const GenerationModel& model, int slot, double slot_hours);
double sample_generation(const GenerationModel& model, int slot, double slot_hours,
                         Rng& rng);

/// Un-normalized bi-modal mixture value at slot n.
double consumption_mixture(const ConsumptionModel& model, int slot, double slot_hours);
/// Mean consumption, normalized so the maximum over slots 1..N equals C_max.
double mean_consumption(const ConsumptionModel& model, int slot, int slot_count,
                        double slot_hours);
std::vector<double> consumption_profile(const ConsumptionModel& model, int slot_count,
                                        double slot_hours);
double sample_consumption(const ConsumptionModel& model, int slot, int slot_count,
                          double slot_hours, Rng& rng);

struct NreStat {
    double mean = 0.0;  // Wh
    double std = 0.0;   // Wh
};

NreStat nre_stats(const BaseStation& bs, int slot, int slot_count, double slot_hours);

/// K x N matrix stored row-major by station.
struct EnergyMatrix {
    int stations = 0;
    int slots = 0;
    std::vector<double> values;

    EnergyMatrix() = default;
    EnergyMatrix(int k, int n, double fill = 0.0)
        : stations(k), slots(n), values(static_cast<std::size_t>(k) * n, fill) {}

    double& operator()(int i, int n) { return values[static_cast<std::size_t>(i) * slots + n]; }
    double operator()(int i, int n) const {
        return values[static_cast<std::size_t>(i) * slots + n];
    }
};

EnergyMatrix mean_generation_matrix(const Network& net);
EnergyMatrix mean_consumption_matrix(const Network& net);

/// One day of realized generation and consumption.
struct Realization {
    EnergyMatrix generation;
    EnergyMatrix consumption;
};

/// Draws generation then consumption, station-major, slot-minor.
Realization sample_realization(const Network& net, Rng& rng);

}  // namespace gridshare
