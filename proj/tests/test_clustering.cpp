#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "gridshare/affinity.hpp"
#include "gridshare/clustering.hpp"
#include "support.hpp"

using namespace gridshare;

namespace {

const CableModel kCable;

ClusteringParams aea(double range = 2.0) {
    ClusteringParams p;
    p.metric = MetricKind::Aea;
    p.sharing_range_km = range;
    return p;
}

ClusteringParams sea(double range = 2.0) {
    ClusteringParams p;
    p.metric = MetricKind::Sea;
    p.sharing_range_km = range;
    return p;
}

WeightMatrix three_node(double w01, double w02, double w12) {
    WeightMatrix w(3);
    w(0, 1) = w(1, 0) = w01;
    w(0, 2) = w(2, 0) = w02;
    w(1, 2) = w(2, 1) = w12;
    return w;
}

double tree_weight(const std::vector<WeightedEdge>& t) {
    double s = 0.0;
    for (const auto& e : t) s += e.weight;
    return s;
}

// Random station layout with mixed-sign NRE rows.
struct Instance {
    NreTable table;
    std::vector<Point> positions;
};

Instance random_instance(Rng& rng, int k, int slots) {
    Instance in;
    std::vector<std::vector<double>> means(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        in.positions.push_back({rng.uniform(0, 5), rng.uniform(0, 5)});
        const double level = rng.uniform(-80, 80);
        for (int n = 0; n < slots; ++n) means[i].push_back(level + rng.uniform(-60, 60));
    }
    in.table = fixture::table(means, 7.0);
    return in;
}

void check_matrix(const AssociationMatrix& a, const std::vector<Point>& pos, double range) {
    for (int i = 0; i < a.size(); ++i) {
        CHECK_FALSE(a.linked(i, i));
        for (int j = 0; j < a.size(); ++j) {
            CHECK(a.linked(i, j) == a.linked(j, i));
            if (a.linked(i, j)) CHECK(distance(pos[i], pos[j]) <= range);
        }
    }
}

}  // namespace

TEST_SUITE("clustering") {

TEST_CASE("AEA metric branches") {
    const std::vector<Point> pos{{0, 0}, {1, 0}, {3, 0}};
    const NreTable t = fixture::table({{-50}, {80}, {40}});
    const auto v = aea_metric(0, 1, t, pos, aea(), kCable, 1.0);
    CHECK(v.affine);
    CHECK(v.weight == doctest::Approx(130.0 - energy_loss(50.0, 1.0, kCable, 1.0)).epsilon(1e-14));
    CHECK(v.weight == doctest::Approx(129.99466).epsilon(1e-7));
    CHECK(aea_metric(1, 0, t, pos, aea(), kCable, 1.0).weight == v.weight);

    const NreTable same = fixture::table({{40}, {60}, {1}});
    CHECK(aea_metric(0, 1, same, pos, aea(), kCable, 1.0).weight == -1e6);
    CHECK_FALSE(aea_metric(0, 1, same, pos, aea(), kCable, 1.0).affine);

    // station 2 is 3 km from station 0
    CHECK(aea_metric(0, 2, fixture::table({{-50}, {80}, {40}}), pos, aea(), kCable, 1.0).weight == -3e6);
}

TEST_CASE("SEA metric branches") {
    const std::vector<Point> pos{{0, 0}, {1, 0}};
    std::vector<double> up, down;
    for (int n = 0; n < 24; ++n) {
        up.push_back(30.0 + n);
        down.push_back(-30.0 - n);
    }
    const auto mirrored = sea_metric(0, 1, fixture::table({up, down}, 1e-3), pos, sea());
    CHECK(mirrored.affine);
    CHECK(mirrored.weight == doctest::Approx(1.0));

    const auto twins = sea_metric(0, 1, fixture::table({up, up}, 1e-3), pos, sea());
    CHECK_FALSE(twins.affine);
    CHECK(twins.weight == doctest::Approx(1e-6 * 1.0));

    // mu_Z = 10, sigma_Z = 5 in every slot, opposite signs
    const double s = 5.0 / std::sqrt(2.0);
    const auto gap = sea_metric(0, 1, fixture::table({{5, 5, 5}, {-5, -5, -5}}, s), pos, sea());
    CHECK(gap.affine);
    CHECK(gap.weight == 1.0);
}

TEST_CASE("agglomerative hand traces") {
    const std::vector<Point> two{{0, 0}, {1, 0}};
    const auto a = agglomerative_cluster(fixture::table({{-40}, {60}}), two, aea(), kCable, 1.0);
    CHECK(a.linked(0, 1));
    CHECK(a.edge_count() == 1);

    const std::vector<Point> three{{0, 0}, {1, 0}, {0, 1}};
    CHECK(agglomerative_cluster(fixture::table({{40}, {10}, {5}}), three, aea(), kCable, 1.0).edge_count() == 0);
    for (double r : {0.5, 2.0, 10.0}) {
        CHECK(agglomerative_cluster(fixture::table({{-40}, {-10}, {-5}}), three, aea(r), kCable, 1.0).edge_count() == 0);
    }
}

TEST_CASE("agglomerative keeps linking until the deficit is covered") {
    // One big consumer, two small donors: both are needed.
    const std::vector<Point> pos{{0, 0}, {1, 0}, {0, 1}, {4, 4}};
    const auto a = agglomerative_cluster(fixture::table({{-100}, {60}, {50}, {500}}), pos, aea(), kCable, 1.0);
    CHECK(a.linked(0, 1));
    CHECK(a.linked(0, 2));
    CHECK(a.edge_count() == 2);
}

TEST_CASE("divisive examples") {
    const std::vector<Point> close{{0, 0}, {1, 0}, {0, 1}};
    const std::vector<std::uint8_t> all(9, 1);
    const auto a = divisive_from_weights(three_node(5, 3, 1), all, close, 2.0);
    CHECK(a.edges() == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}});

    const std::vector<Point> far{{0, 0}, {1, 0}, {0, 3}};
    const auto b = divisive_from_weights(three_node(5, 3, 1), all, far, 2.0);
    CHECK(b.edges() == std::vector<std::pair<int, int>>{{0, 1}});
}

TEST_CASE("maximum spanning tree small cases") {
    CHECK(max_spanning_tree(WeightMatrix(1)).empty());
    const auto t = max_spanning_tree(three_node(5, 3, 1));
    CHECK(t.size() == 2);
    CHECK(tree_weight(t) == 8.0);
    // all ties: lexicographic edge order decides
    const auto tie = max_spanning_tree(three_node(1, 1, 1));
    CHECK(tie == std::vector<WeightedEdge>{{0, 1, 1.0}, {0, 2, 1.0}});
}

TEST_CASE("maximum spanning tree matches exhaustive enumeration") {
    Rng rng(606);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 6;
        WeightMatrix w(k);
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) w(i, j) = w(j, i) = rng.uniform(-10, 10);
        const auto tree = max_spanning_tree(w);
        const auto best = oracle::best_spanning_tree(w);
        std::set<std::pair<int, int>> got;
        for (const auto& e : tree) got.insert({e.i, e.j});
        CHECK(got == std::set<std::pair<int, int>>(best.edges.begin(), best.edges.end()));
        CHECK(tree_weight(tree) == doctest::Approx(best.weight).epsilon(1e-12));
    }
}

TEST_CASE("maximum spanning tree with tied integer weights") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + static_cast<int>(rng.below(6));
        WeightMatrix w(k);
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) w(i, j) = w(j, i) = static_cast<double>(rng.below(4));
        const auto tree = max_spanning_tree(w);
        CHECK(static_cast<int>(tree.size()) == k - 1);
        CHECK(tree_weight(tree) == oracle::best_spanning_tree(w).weight);
        CHECK(tree == max_spanning_tree(w));
    }
}

TEST_CASE("divisive SEA on seven stations follows the brute-force tree") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        Instance in = random_instance(rng, 7, 6);
        ClusteringParams p = sea(100.0);  // everything in range, so nothing is pruned for distance
        p.energy_gap_wh = 20.0;           // with no gap every affine weight is exactly 1
        WeightMatrix w(7);
        std::vector<std::uint8_t> affine(49, 0);
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 7; ++j) {
                if (i == j) continue;
                const auto m = sea_metric(i, j, in.table, in.positions, p);
                w(i, j) = m.weight;
                affine[i * 7 + j] = m.affine;
            }
        const auto best = oracle::best_spanning_tree(w);
        const auto got = divisive_cluster(in.table, in.positions, p, kCable, 1.0);
        for (const auto& [i, j] : best.edges) CHECK(got.linked(i, j) == static_cast<bool>(affine[i * 7 + j]));
        CHECK(got.edge_count() <= 6);
    }
}

TEST_CASE("structural properties on random layouts") {
    Rng rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const int k = 3 + static_cast<int>(rng.below(10));
        Instance in = random_instance(rng, k, 8);
        const double range = rng.uniform(0.3, 4.0);
        for (MetricKind kind : {MetricKind::Aea, MetricKind::Sea}) {
            ClusteringParams p = kind == MetricKind::Aea ? aea(range) : sea(range);
            const auto agg = agglomerative_cluster(in.table, in.positions, p, kCable, 1.0);
            const auto div = divisive_cluster(in.table, in.positions, p, kCable, 1.0);
            check_matrix(agg, in.positions, range);
            check_matrix(div, in.positions, range);
            CHECK(div.edge_count() <= k - 1);
            if (kind == MetricKind::Aea) {
                for (const auto& [i, j] : agg.edges())
                    CHECK(in.table.average[i] * in.table.average[j] < 0.0);
                for (const auto& [i, j] : div.edges())
                    CHECK(in.table.average[i] * in.table.average[j] < 0.0);
            }
        }
    }
}

TEST_CASE("range below the closest pair installs nothing") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Instance in = random_instance(rng, 8, 4);
        double closest = 1e9;
        for (int i = 0; i < 8; ++i)
            for (int j = i + 1; j < 8; ++j) closest = std::min(closest, distance(in.positions[i], in.positions[j]));
        for (MetricKind kind : {MetricKind::Aea, MetricKind::Sea}) {
            ClusteringParams p = kind == MetricKind::Aea ? aea(0.99 * closest) : sea(0.99 * closest);
            CHECK(agglomerative_cluster(in.table, in.positions, p, kCable, 1.0).edge_count() == 0);
            CHECK(divisive_cluster(in.table, in.positions, p, kCable, 1.0).edge_count() == 0);
        }
    }
}

TEST_CASE("agglomerative needs at most K plus K times the widest neighbourhood links") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        Instance in = random_instance(rng, 12, 4);
        const auto a = agglomerative_cluster(in.table, in.positions, aea(2.0), kCable, 1.0);
        int widest = 0;
        for (int i = 0; i < 12; ++i) {
            int c = 0;
            for (int j = 0; j < 12; ++j) c += i != j && distance(in.positions[i], in.positions[j]) <= 2.0;
            widest = std::max(widest, c);
        }
        CHECK(a.edge_count() <= 12 + 12 * widest);
    }
}

TEST_CASE("clustering is deterministic") {
    Rng rng(44);
    Instance in = random_instance(rng, 10, 6);
    for (MetricKind kind : {MetricKind::Aea, MetricKind::Sea}) {
        ClusteringParams p = kind == MetricKind::Aea ? aea() : sea();
        CHECK(agglomerative_cluster(in.table, in.positions, p, kCable, 1.0) ==
              agglomerative_cluster(in.table, in.positions, p, kCable, 1.0));
        CHECK(divisive_cluster(in.table, in.positions, p, kCable, 1.0) ==
              divisive_cluster(in.table, in.positions, p, kCable, 1.0));
    }
}

TEST_CASE("cable length") {
    AssociationMatrix a(3);
    a.link(0, 1);
    a.link(1, 2);
    CHECK(total_cable_length(a, {{0, 0}, {3, 4}, {3, 5}}) == doctest::Approx(6.0));
    a.unlink(1, 0);
    CHECK(a.edge_count() == 1);
}

}
