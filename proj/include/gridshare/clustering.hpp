#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gridshare/model.hpp"

namespace gridshare {

enum class MetricKind { Aea, Sea };

struct ClusteringParams {
    double sharing_range_km = 2.0;
    double aea_penalty = 1e6;      // epsilon, Wh per km
    double sea_floor = 1e-6;       // zeta, per km
    double energy_gap_wh = 0.0;    // delta
    double low_threshold = 0.5;    // phi_l
    double high_threshold = 0.5;   // phi_h
    MetricKind metric = MetricKind::Sea;

    void validate() const;
};

/// Symmetric 0/1 matrix of installed power lines with a zero diagonal.
class AssociationMatrix {
public:
    explicit AssociationMatrix(int size = 0)
        : size_(size), links_(static_cast<std::size_t>(size) * size, 0) {}

    int size() const { return size_; }
    bool linked(int i, int j) const { return links_[index(i, j)] != 0; }
    void link(int i, int j);
    void unlink(int i, int j);

    /// Installed links as (i, j) pairs with i < j, in lexicographic order.
    std::vector<std::pair<int, int>> edges() const;
    int edge_count() const;

    bool operator==(const AssociationMatrix&) const = default;

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(size_) +
               static_cast<std::size_t>(j);
    }

    int size_;
    std::vector<std::uint8_t> links_;
};

/// Per-station, per-slot NRE mean and deviation plus horizon averages.
struct NreTable {
    int stations = 0;
    int slots = 0;
    std::vector<NreStat> stats;    // station-major
    std::vector<double> average;   // E-hat, mean of stats over slots

    static NreTable from_network(const Network& net);

    NreStat& at(int i, int n) { return stats[static_cast<std::size_t>(i) * slots + n]; }
    const NreStat& at(int i, int n) const {
        return stats[static_cast<std::size_t>(i) * slots + n];
    }
    void refresh_averages();
};

/// Metric value together with the branch that produced it: `affine` is true
/// for the energy-affinity branch, false for the distance-penalty fallback.
struct MetricValue {
    double weight = 0.0;
    bool affine = false;
};

MetricValue aea_metric(int i, int j, const NreTable& table, const std::vector<Point>& positions,
                       const ClusteringParams& params, const CableModel& cable,
                       double slot_hours);

MetricValue sea_metric(int i, int j, const NreTable& table, const std::vector<Point>& positions,
                       const ClusteringParams& params);

/// Geometric mean over slots of P[E_i(n) < 0], evaluated in log space.
double deficit_likelihood(const NreTable& table, int i);

/// Geometric mean over slots of P[E_i(n), E_j(n) share a sign].
double same_sign_likelihood(const NreTable& table, int i, int j);

AssociationMatrix agglomerative_cluster(const NreTable& table, const std::vector<Point>& positions,
                                        const ClusteringParams& params, const CableModel& cable,
                                        double slot_hours);

AssociationMatrix divisive_cluster(const NreTable& table, const std::vector<Point>& positions,
                                   const ClusteringParams& params, const CableModel& cable,
                                   double slot_hours);

/// Dense symmetric K x K weights.
struct WeightMatrix {
    int size = 0;
    std::vector<double> values;

    explicit WeightMatrix(int k = 0, double fill = 0.0)
        : size(k), values(static_cast<std::size_t>(k) * k, fill) {}
    double& operator()(int i, int j) { return values[static_cast<std::size_t>(i) * size + j]; }
    double operator()(int i, int j) const {
        return values[static_cast<std::size_t>(i) * size + j];
    }
};

struct WeightedEdge {
    int i = 0;
    int j = 0;
    double weight = 0.0;

    bool operator==(const WeightedEdge&) const = default;
};

/// Maximum spanning forest by Kruskal. Equal weights are taken in
/// lexicographic (i, j) order so the result is deterministic.
std::vector<WeightedEdge> max_spanning_tree(const WeightMatrix& weights);

/// Prunes a maximum spanning tree of `weights`: drops edges longer than the
/// range and edges whose weight came from the fallback branch.
AssociationMatrix divisive_from_weights(const WeightMatrix& weights,
                                        const std::vector<std::uint8_t>& affine,
                                        const std::vector<Point>& positions, double range_km);

double total_cable_length(const AssociationMatrix& links, const std::vector<Point>& positions);

}  // namespace gridshare
