#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridshare/clustering.hpp"
#include "gridshare/lp.hpp"
#include "gridshare/model.hpp"

namespace gridshare {

struct DispatchSettings {
    std::string knowledge = "perfect";  // zero | perfect | partial
    int loss_segments = 8;
    long long scenario_cap = 4096;
    int scenario_points = 2;
    double deviation = 0.2;
    SolverOptions solver;
};

struct HarnessSettings {
    int iterations = 1000;
    std::string sharing = "hybrid";                // no_sharing | sg_only | physical_only | hybrid
    std::string clustering = "agglomerative_aea";  // none | agglomerative_aea | ... | divisive_sea
    std::string realization = "gaussian";          // gaussian | discrete
    bool average_placements = false;
};

/// Per-station overrides; unset fields keep the network-wide model.
struct StationOverride {
    int id = 0;
    std::optional<Point> position;
    std::optional<GenerationModel> generation;
    std::optional<ConsumptionModel> consumption;
    std::optional<BatteryParams> battery;
};

struct Config {
    NetworkConfig network;
    GenerationModel generation;
    ConsumptionModel consumption;
    CableModel cable;
    BatteryParams battery;
    // One value for every slot, or one value per slot.
    std::vector<double> grid_price{0.8};
    std::vector<double> extra_price{0.2};
    std::vector<double> buy_price{0.6};
    std::vector<double> sell_price{0.4};
    ClusteringParams clustering;
    DispatchSettings dispatch;
    HarnessSettings harness;
    std::vector<StationOverride> base_stations;

    PriceSchedule prices() const;
    void validate() const;
};

/// Reads a config document; missing fields keep their defaults, unknown keys
/// are rejected so that typos do not pass silently.
Config config_from_json(const nlohmann::json& doc);
Config load_config(const std::string& path);

/// The fully resolved config, every field spelled out.
nlohmann::json config_to_json(const Config& config);

/// Builds the network: placement from the seed unless every station has an
/// explicit position, then per-station overrides.
Network build_network(const Config& config);

/// Clustering parameters with the range taken from the cable section.
ClusteringParams clustering_params(const Config& config);

}  // namespace gridshare
