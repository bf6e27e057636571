#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "gridshare/config.hpp"
#include "gridshare/harness.hpp"

using namespace gridshare;

namespace {

// Six stations in a 2.5 km square, small enough for many iterations.
Network small_network(std::uint64_t seed = 4) {
    Config c;
    c.network.bs_count = 6;
    c.network.region_side_km = 2.5;
    c.network.rng_seed = seed;
    return build_network(c);
}

Strategy strategy(SharingMode mode, Knowledge k = Knowledge::Perfect,
                  ClusteringMethod m = ClusteringMethod::AgglomerativeAea) {
    Strategy s;
    s.sharing = mode;
    s.knowledge = k;
    s.clustering = mode == SharingMode::NoSharing || mode == SharingMode::SgOnly ? ClusteringMethod::None : m;
    return s;
}

std::string csv(const AggregateReport& r) {
    std::ostringstream out;
    write_samples_csv(out, r);
    return out.str();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("names parse both ways") {
    for (auto m : {SharingMode::NoSharing, SharingMode::SgOnly, SharingMode::PhysicalOnly, SharingMode::Hybrid})
        CHECK(parse_sharing(to_string(m)) == m);
    for (auto k : {Knowledge::Zero, Knowledge::Perfect, Knowledge::Partial}) CHECK(parse_knowledge(to_string(k)) == k);
    for (auto c : {ClusteringMethod::None, ClusteringMethod::AgglomerativeAea, ClusteringMethod::AgglomerativeSea,
                   ClusteringMethod::DivisiveAea, ClusteringMethod::DivisiveSea})
        CHECK(parse_clustering(to_string(c)) == c);
    CHECK_THROWS_AS(parse_sharing("everything"), std::invalid_argument);
}

TEST_CASE("line sharing needs a clustering method") {
    Strategy s;
    s.sharing = SharingMode::PhysicalOnly;
    s.clustering = ClusteringMethod::None;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.sharing = SharingMode::SgOnly;
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("one noiseless iteration is one dispatch") {
    Network net = small_network();
    for (auto& bs : net.stations) bs.generation.noise_std_wh = bs.consumption.noise_std_wh = 0.0;
    ExperimentSettings settings;
    const Strategy s = strategy(SharingMode::Hybrid);
    const AssociationMatrix links = plan_links(net, s.clustering, settings.clustering);
    const AggregateReport r = run_monte_carlo(net, s, links, settings, 1, 77);
    DispatchContext ctx;
    ctx.network = &net;
    ctx.links = links;
    ctx.sharing = SharingMode::Hybrid;
    const EnergySchedule direct = dispatch_perfect(ctx, mean_generation_matrix(net), mean_consumption_matrix(net));
    CHECK(r.cost.mean == doctest::Approx(cost(direct, net.prices).total).epsilon(1e-12));
    CHECK(r.cost.std_error == 0.0);
}

TEST_CASE("paired dominance over common days") {
    const Network net = small_network();
    ExperimentSettings settings;
    const int iters = 12;
    const auto none = run_monte_carlo(net, strategy(SharingMode::NoSharing), settings, iters, 5);
    const auto sg = run_monte_carlo(net, strategy(SharingMode::SgOnly), settings, iters, 5);
    const auto phys = run_monte_carlo(net, strategy(SharingMode::PhysicalOnly), settings, iters, 5);
    const auto hybrid = run_monte_carlo(net, strategy(SharingMode::Hybrid), settings, iters, 5);
    CHECK(hybrid.link_count > 0);
    for (int t = 0; t < iters; ++t) {
        CHECK(hybrid.samples[t].cost <= sg.samples[t].cost + 1e-6);
        CHECK(hybrid.samples[t].cost <= phys.samples[t].cost + 1e-6);
        CHECK(sg.samples[t].cost <= none.samples[t].cost + 1e-6);
        CHECK(phys.samples[t].cost <= none.samples[t].cost + 1e-6);
    }
    CHECK(hybrid.cost.mean <= none.cost.mean);
}

TEST_CASE("knowledge levels over common days") {
    const Network net = small_network();
    ExperimentSettings settings;
    const auto zero = run_monte_carlo(net, strategy(SharingMode::Hybrid, Knowledge::Zero), settings, 6, 9);
    const auto perfect = run_monte_carlo(net, strategy(SharingMode::Hybrid, Knowledge::Perfect), settings, 6, 9);
    for (int t = 0; t < 6; ++t) CHECK(perfect.samples[t].cost <= zero.samples[t].cost + 1e-6);
}

TEST_CASE("no line is shorter than the exclusion distance") {
    const Network net = small_network();
    ExperimentSettings settings;
    settings.clustering.sharing_range_km = 0.45;
    for (auto m : {ClusteringMethod::AgglomerativeAea, ClusteringMethod::AgglomerativeSea,
                   ClusteringMethod::DivisiveAea, ClusteringMethod::DivisiveSea}) {
        const auto phys = run_monte_carlo(net, strategy(SharingMode::PhysicalOnly, Knowledge::Perfect, m), settings, 4, 2);
        const auto none = run_monte_carlo(net, strategy(SharingMode::NoSharing), settings, 4, 2);
        CHECK(phys.link_count == 0);
        for (int t = 0; t < 4; ++t) CHECK(phys.samples[t].cost == doctest::Approx(none.samples[t].cost).epsilon(1e-12));
    }
}

TEST_CASE("sweep layout and the price band where grid trading is idle") {
    const Network net = small_network();
    ExperimentSettings settings;
    SweepSpec spec;
    spec.parameter = SweepParameter::GridPrice;
    spec.values = {0.1, 0.3, 0.4, 0.8};
    spec.iterations = 3;
    const std::vector<Strategy> strategies{strategy(SharingMode::NoSharing), strategy(SharingMode::SgOnly),
                                           strategy(SharingMode::PhysicalOnly), strategy(SharingMode::Hybrid)};
    const auto rows = sweep(spec, net, settings, strategies);
    REQUIRE(rows.size() == 16);
    for (std::size_t v = 0; v < 4; ++v)
        for (std::size_t s = 0; s < 4; ++s) {
            CHECK(rows[v * 4 + s].value == spec.values[v]);
            CHECK(rows[v * 4 + s].report.strategy == strategies[s].label());
        }
    for (std::size_t v : {1u, 2u}) {
        CHECK(rows[v * 4 + 1].report.cost.mean == doctest::Approx(rows[v * 4].report.cost.mean).epsilon(1e-9));
        CHECK(rows[v * 4 + 3].report.cost.mean == doctest::Approx(rows[v * 4 + 2].report.cost.mean).epsilon(1e-9));
    }
    CHECK(rows[12 + 1].report.cost.mean < rows[12].report.cost.mean);

    std::ostringstream out;
    write_report_csv(out, rows, to_string(spec.parameter));
    CHECK(out.str().rfind("parameter,value,strategy,", 0) == 0);
    CHECK(out.str().find("\ngrid_price,0.8,") != std::string::npos);

    spec.values.clear();
    CHECK_THROWS_AS(sweep(spec, net, settings, strategies), std::invalid_argument);
}

TEST_CASE("range sweep below the exclusion distance stays flat") {
    const Network net = small_network();
    ExperimentSettings settings;
    SweepSpec spec;
    spec.parameter = SweepParameter::SharingRange;
    spec.values = {0.0, 0.25, 0.45};
    spec.iterations = 2;
    const auto rows = sweep(spec, net, settings, {strategy(SharingMode::PhysicalOnly)});
    for (const auto& r : rows) {
        CHECK(r.report.link_count == 0);
        CHECK(r.report.cost.mean == rows.front().report.cost.mean);
    }
}

TEST_CASE("identical seeds give identical bytes") {
    const Network net = small_network();
    ExperimentSettings settings;
    const Strategy s = strategy(SharingMode::Hybrid, Knowledge::Zero);
    const std::string a = csv(run_monte_carlo(net, s, settings, 4, 123));
    const std::string b = csv(run_monte_carlo(net, s, settings, 4, 123));
    const std::string c = csv(run_monte_carlo(net, s, settings, 4, 124));
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("resampled placements") {
    const Network net = small_network();
    ExperimentSettings settings;
    settings.resample_placement = true;
    const auto a = run_monte_carlo(net, strategy(SharingMode::Hybrid), settings, 3, 8);
    const auto b = run_monte_carlo(net, strategy(SharingMode::Hybrid), settings, 3, 8);
    CHECK(csv(a) == csv(b));
    CHECK(a.cable_length_km >= 0.0);
}

TEST_CASE("partial knowledge on the small three-slot case") {
    const Network net = stochastic_case_network();
    ExperimentSettings settings;
    settings.realization = RealizationModel::Discrete;
    settings.deviation_all = 0.0;
    const auto partial = run_monte_carlo(net, strategy(SharingMode::Hybrid, Knowledge::Partial), three_bs_links(),
                                         settings, 3, 1);
    const auto perfect = run_monte_carlo(net, strategy(SharingMode::Hybrid, Knowledge::Perfect), three_bs_links(),
                                         settings, 3, 1);
    CHECK(partial.cost.mean == doctest::Approx(perfect.cost.mean).epsilon(1e-9));
}

TEST_CASE("three-station case") {
    const Network net = three_bs_network();
    CHECK(net.size() == 3);
    CHECK(net.distance(0, 1) == doctest::Approx(2.0));
    CHECK(net.distance(0, 2) > 2.0);
    CHECK(net.distance(1, 2) > 2.0);
    const double cmax = net.stations[0].consumption.peak_power_w();
    CHECK(net.stations[0].generation.peak_power_w() == doctest::Approx(1.5 * cmax));
    CHECK(net.stations[1].generation.peak_power_w() == doctest::Approx(0.8 * cmax));
    CHECK(net.stations[2].generation.peak_power_w() == doctest::Approx(0.6 * cmax));

    const auto rows = replicate_three_bs({0.1, 0.8});
    REQUIRE(rows.size() == 8);
    for (int m = 1; m < 4; ++m) CHECK(rows[m].cost == doctest::Approx(rows[0].cost).epsilon(1e-9));
    CHECK(rows[4].cost >= rows[5].cost);
    CHECK(rows[5].cost >= rows[7].cost);
    CHECK(rows[4].cost >= rows[6].cost);
    CHECK(rows[6].cost >= rows[7].cost);
    CHECK(rows[7].saving > 0.0);
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1e-20) == "1e-20");
    CHECK(format_number(1234.5) == "1234.5");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("CSV headers") {
    const Network net = three_bs_network();
    std::ostringstream pos, assoc, edges;
    write_positions_csv(pos, net);
    write_association_csv(assoc, three_bs_links());
    write_edges_csv(edges, three_bs_links(), net);
    CHECK(pos.str().rfind("bs,x_km,y_km\n", 0) == 0);
    CHECK(assoc.str().find("0,1,0") != std::string::npos);
    CHECK(edges.str().find("total") != std::string::npos);

    DispatchContext ctx;
    ctx.network = &net;
    ctx.links = three_bs_links();
    const EnergySchedule s = dispatch_perfect(ctx, mean_generation_matrix(net), mean_consumption_matrix(net));
    std::ostringstream sched, flows;
    write_schedule_csv(sched, s);
    write_link_flows_csv(flows, s);
    CHECK(sched.str().rfind("bs,slot,q_g,q_e,q_b,q_s,q_beta,battery,curtailed\n", 0) == 0);
    CHECK(flows.str().rfind("from,to,slot,q_fwd,q_delivered\n", 0) == 0);
    // 3 stations x 24 slots plus the header
    const std::string text = sched.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 73);
}

}
