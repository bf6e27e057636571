#include "gridshare/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gridshare/affinity.hpp"

namespace gridshare {

void ClusteringParams::validate() const {
    if (!(aea_penalty > 0.0)) throw std::invalid_argument("clustering.aea_penalty must be positive");
    if (!(sea_floor > 0.0)) throw std::invalid_argument("clustering.sea_floor must be positive");
    if (!(energy_gap_wh >= 0.0)) throw std::invalid_argument("clustering.energy_gap_wh must be >= 0");
    if (!(low_threshold >= 0.0 && low_threshold <= 1.0 && high_threshold >= 0.0 &&
          high_threshold <= 1.0)) {
        throw std::invalid_argument("clustering thresholds must lie in [0, 1]");
    }
    if (!(sharing_range_km >= 0.0)) throw std::invalid_argument("sharing range must be >= 0");
}

void AssociationMatrix::link(int i, int j) {
    if (i == j) throw std::invalid_argument("a station cannot be linked to itself");
    links_[index(i, j)] = 1;
    links_[index(j, i)] = 1;
}

void AssociationMatrix::unlink(int i, int j) {
    links_[index(i, j)] = 0;
    links_[index(j, i)] = 0;
}

std::vector<std::pair<int, int>> AssociationMatrix::edges() const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < size_; ++i) {
        for (int j = i + 1; j < size_; ++j) {
            if (linked(i, j)) out.emplace_back(i, j);
        }
    }
    return out;
}

int AssociationMatrix::edge_count() const {
    return static_cast<int>(edges().size());
}

NreTable NreTable::from_network(const Network& net) {
    NreTable t;
    t.stations = net.size();
    t.slots = net.slots();
    t.stats.resize(static_cast<std::size_t>(t.stations) * t.slots);
    for (int i = 0; i < t.stations; ++i) {
        for (int n = 0; n < t.slots; ++n) {
            t.at(i, n) = nre_stats(net.stations[i], n + 1, t.slots, net.tau());
        }
    }
    t.refresh_averages();
    return t;
}

void NreTable::refresh_averages() {
    average.assign(static_cast<std::size_t>(stations), 0.0);
    for (int i = 0; i < stations; ++i) {
        double sum = 0.0;
        for (int n = 0; n < slots; ++n) sum += at(i, n).mean;
        average[i] = sum / slots;
    }
}

namespace {

int signum(double x) {
    return (x > 0.0) - (x < 0.0);
}

double pair_distance(const std::vector<Point>& positions, int i, int j) {
    return distance(positions[static_cast<std::size_t>(i)], positions[static_cast<std::size_t>(j)]);
}

}  // namespace

MetricValue aea_metric(int i, int j, const NreTable& table, const std::vector<Point>& positions,
                       const ClusteringParams& params, const CableModel& cable,
                       double slot_hours) {
    const double d = pair_distance(positions, i, j);
    const double ei = table.average[i];
    const double ej = table.average[j];
    if (d <= params.sharing_range_km && signum(ei) != signum(ej)) {
        const double transfer = std::min(std::abs(ei), std::abs(ej));
        return {std::max(ei, ej) - std::min(ei, ej) - energy_loss(transfer, d, cable, slot_hours),
                true};
    }
    return {-params.aea_penalty * d, false};
}

double deficit_likelihood(const NreTable& table, int i) {
    double log_sum = 0.0;
    for (int n = 0; n < table.slots; ++n) {
        const auto& s = table.at(i, n);
        log_sum += log_prob_negative(s.mean, s.std);
    }
    return std::exp(log_sum / table.slots);
}

double same_sign_likelihood(const NreTable& table, int i, int j) {
    double log_sum = 0.0;
    for (int n = 0; n < table.slots; ++n) {
        const auto& a = table.at(i, n);
        const auto& b = table.at(j, n);
        const double p = prob_same_sign(a.mean, a.std, b.mean, b.std);
        if (p <= 0.0) return 0.0;
        log_sum += std::log(p);
    }
    return std::exp(log_sum / table.slots);
}

MetricValue sea_metric(int i, int j, const NreTable& table, const std::vector<Point>& positions,
                       const ClusteringParams& params) {
    const double d = pair_distance(positions, i, j);
    if (d <= params.sharing_range_km && same_sign_likelihood(table, i, j) < params.low_threshold) {
        double sum = 0.0;
        for (int n = 0; n < table.slots; ++n) {
            const auto& a = table.at(i, n);
            const auto& b = table.at(j, n);
            sum += prob_abs_diff_exceeds({a.mean, a.std, b.mean, b.std}, params.energy_gap_wh);
        }
        return {sum / table.slots, true};
    }
    return {params.sea_floor * d, false};
}

namespace {

MetricValue metric(int i, int j, const NreTable& table, const std::vector<Point>& positions,
                   const ClusteringParams& params, const CableModel& cable, double slot_hours) {
    return params.metric == MetricKind::Aea
               ? aea_metric(i, j, table, positions, params, cable, slot_hours)
               : sea_metric(i, j, table, positions, params);
}

std::vector<int> neighbours(int i, const std::vector<Point>& positions, double range) {
    std::vector<int> out;
    for (int j = 0; j < static_cast<int>(positions.size()); ++j) {
        if (j != i && pair_distance(positions, i, j) <= range) out.push_back(j);
    }
    return out;
}

// Picks the candidate with the largest metric; lowest index wins ties.
int best_partner(int i, const std::vector<int>& candidates, const NreTable& table,
                 const std::vector<Point>& positions, const ClusteringParams& params,
                 const CableModel& cable, double slot_hours) {
    int best = -1;
    double best_weight = -std::numeric_limits<double>::infinity();
    for (int j : candidates) {
        const double w = metric(i, j, table, positions, params, cable, slot_hours).weight;
        if (best < 0 || w > best_weight) {
            best = j;
            best_weight = w;
        }
    }
    return best;
}

AssociationMatrix agglomerative_aea(NreTable table, const std::vector<Point>& positions,
                                    const ClusteringParams& params, const CableModel& cable,
                                    double slot_hours) {
    const int K = table.stations;
    AssociationMatrix links(K);
    std::vector<int> deficient;
    for (int i = 0; i < K; ++i) {
        if (table.average[i] < 0.0) deficient.push_back(i);
    }
    auto& avg = table.average;
    while (!deficient.empty()) {
        // Most deficient station; ties go to the lowest index.
        const auto worst_it = std::min_element(deficient.begin(), deficient.end(),
                                               [&](int a, int b) { return avg[a] < avg[b]; });
        const int worst = *worst_it;
        std::vector<int> donors;
        for (int j : neighbours(worst, positions, params.sharing_range_km)) {
            if (avg[j] > 0.0 && !links.linked(worst, j)) donors.push_back(j);
        }
        if (donors.empty()) {
            deficient.erase(worst_it);
            continue;
        }
        const int donor =
            best_partner(worst, donors, table, positions, params, cable, slot_hours);
        links.link(worst, donor);

        const double d = pair_distance(positions, worst, donor);
        const double moved = std::min(-avg[worst], avg[donor]);
        const double net = avg[donor] + avg[worst] - energy_loss(moved, d, cable, slot_hours);
        if (net > 0.0) {
            avg[donor] = net;
            avg[worst] = 0.0;
        } else {
            avg[donor] = 0.0;
            avg[worst] = net;
        }
        if (avg[worst] >= 0.0) deficient.erase(worst_it);
    }
    return links;
}

AssociationMatrix agglomerative_sea(NreTable table, const std::vector<Point>& positions,
                                    const ClusteringParams& params) {
    const int K = table.stations;
    AssociationMatrix links(K);
    std::vector<double> likelihood(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) likelihood[i] = deficit_likelihood(table, i);
    auto is_deficient = [&](int i) { return likelihood[i] > params.high_threshold; };

    std::vector<int> deficient;
    for (int i = 0; i < K; ++i) {
        if (is_deficient(i)) deficient.push_back(i);
    }
    while (!deficient.empty()) {
        const auto worst_it =
            std::max_element(deficient.begin(), deficient.end(),
                             [&](int a, int b) { return likelihood[a] < likelihood[b]; });
        const int worst = *worst_it;
        const auto near = neighbours(worst, positions, params.sharing_range_km);
        std::vector<int> donors;
        for (int j : near) {
            if (!is_deficient(j) && !links.linked(worst, j)) donors.push_back(j);
        }
        if (donors.empty()) {
            deficient.erase(worst_it);
            continue;
        }
        const int donor = best_partner(worst, donors, table, positions, params, CableModel{}, 1.0);
        links.link(worst, donor);

        for (int n = 0; n < table.slots; ++n) {
            auto& a = table.at(worst, n);
            auto& b = table.at(donor, n);
            const double moved = std::min(std::abs(a.mean), std::abs(b.mean));
            a.mean += moved;
            b.mean -= moved;
        }
        likelihood[worst] = deficit_likelihood(table, worst);
        likelihood[donor] = deficit_likelihood(table, donor);
        if (!is_deficient(worst)) deficient.erase(worst_it);
    }
    return links;
}

}  // namespace

AssociationMatrix agglomerative_cluster(const NreTable& table, const std::vector<Point>& positions,
                                        const ClusteringParams& params, const CableModel& cable,
                                        double slot_hours) {
    params.validate();
    if (static_cast<int>(positions.size()) != table.stations) {
        throw std::invalid_argument("positions and NRE table disagree on the station count");
    }
    return params.metric == MetricKind::Aea
               ? agglomerative_aea(table, positions, params, cable, slot_hours)
               : agglomerative_sea(table, positions, params);
}

std::vector<WeightedEdge> max_spanning_tree(const WeightMatrix& weights) {
    const int K = weights.size;
    std::vector<WeightedEdge> edges;
    for (int i = 0; i < K; ++i) {
        for (int j = i + 1; j < K; ++j) {
            if (std::isfinite(weights(i, j))) edges.push_back({i, j, weights(i, j)});
        }
    }
    std::stable_sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        return a.weight > b.weight;
    });

    std::vector<int> parent(static_cast<std::size_t>(K));
    std::vector<int> rank(static_cast<std::size_t>(K), 0);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    std::vector<WeightedEdge> tree;
    for (const auto& e : edges) {
        int a = find(e.i);
        int b = find(e.j);
        if (a == b) continue;
        if (rank[a] < rank[b]) std::swap(a, b);
        parent[b] = a;
        if (rank[a] == rank[b]) ++rank[a];
        tree.push_back(e);
        if (static_cast<int>(tree.size()) == K - 1) break;
    }
    return tree;
}

AssociationMatrix divisive_from_weights(const WeightMatrix& weights,
                                        const std::vector<std::uint8_t>& affine,
                                        const std::vector<Point>& positions, double range_km) {
    AssociationMatrix links(weights.size);
    for (const auto& e : max_spanning_tree(weights)) {
        const bool in_range = pair_distance(positions, e.i, e.j) <= range_km;
        const bool useful = affine.empty() || affine[static_cast<std::size_t>(e.i) * weights.size + e.j];
        if (in_range && useful) links.link(e.i, e.j);
    }
    return links;
}

AssociationMatrix divisive_cluster(const NreTable& table, const std::vector<Point>& positions,
                                   const ClusteringParams& params, const CableModel& cable,
                                   double slot_hours) {
    params.validate();
    const int K = table.stations;
    if (static_cast<int>(positions.size()) != K) {
        throw std::invalid_argument("positions and NRE table disagree on the station count");
    }
    WeightMatrix weights(K);
    std::vector<std::uint8_t> affine(static_cast<std::size_t>(K) * K, 0);
    for (int i = 0; i < K; ++i) {
        for (int j = i + 1; j < K; ++j) {
            const auto m = metric(i, j, table, positions, params, cable, slot_hours);
            weights(i, j) = weights(j, i) = m.weight;
            affine[static_cast<std::size_t>(i) * K + j] = affine[static_cast<std::size_t>(j) * K + i] =
                m.affine ? 1 : 0;
        }
    }
    return divisive_from_weights(weights, affine, positions, params.sharing_range_km);
}

double total_cable_length(const AssociationMatrix& links, const std::vector<Point>& positions) {
    double total = 0.0;
    for (const auto& [i, j] : links.edges()) total += pair_distance(positions, i, j);
    return total;
}

}  // namespace gridshare
