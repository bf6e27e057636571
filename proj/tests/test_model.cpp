#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gridshare/model.hpp"
#include "support.hpp"

using namespace gridshare;

TEST_SUITE("model") {

TEST_CASE("placement keeps the exclusion distance") {
    NetworkConfig cfg;  // 20 stations, 5 km, 0.5 km
    for (std::uint64_t seed : {1u, 2u, 77u, 12345u}) {
        Rng rng(seed);
        const auto pts = generate_placement(cfg, rng);
        REQUIRE(pts.size() == 20);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            CHECK(pts[i].x >= 0.0);
            CHECK(pts[i].x <= 5.0);
            CHECK(pts[i].y >= 0.0);
            CHECK(pts[i].y <= 5.0);
            for (std::size_t j = i + 1; j < pts.size(); ++j) CHECK(distance(pts[i], pts[j]) >= 0.5);
        }
    }
}

TEST_CASE("placement is a function of the seed") {
    NetworkConfig cfg;
    Rng a(9), b(9), c(10);
    const auto pa = generate_placement(cfg, a);
    const auto pb = generate_placement(cfg, b);
    const auto pc = generate_placement(cfg, c);
    bool same = true, differs = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        same = same && pa[i].x == pb[i].x && pa[i].y == pb[i].y;
        differs = differs || pa[i].x != pc[i].x;
    }
    CHECK(same);
    CHECK(differs);
}

TEST_CASE("single station and impossible packing") {
    NetworkConfig one;
    one.bs_count = 1;
    Rng rng(3);
    CHECK(generate_placement(one, rng).size() == 1);

    NetworkConfig crowded;
    crowded.bs_count = 100;
    crowded.region_side_km = 1.0;
    Rng rng2(3);
    CHECK_THROWS_AS(generate_placement(crowded, rng2, 20000), PlacementInfeasible);
}

TEST_CASE("generation profile") {
    GenerationModel g;  // 1 m2, 1 kW/m2, 20 %
    CHECK(g.peak_power_w() == doctest::Approx(200.0));
    CHECK(mean_generation(g, 12, 1.0) == doctest::Approx(200.0).epsilon(1e-12));
    CHECK(mean_generation(g, 15, 1.0) == doctest::Approx(200.0 * std::exp(-1.0)).epsilon(1e-12));
    CHECK(mean_generation(g, 15, 1.0) == doctest::Approx(73.576).epsilon(1e-5));
    CHECK(mean_generation(g, 1, 1.0) < 1e-3);
    for (int n = 1; n <= 24; ++n) {
        CHECK(mean_generation(g, n, 1.0) >= 0.0);
        CHECK(mean_generation(g, n, 1.0) <= 200.0);
    }
}

TEST_CASE("generation sampling") {
    GenerationModel quiet;
    quiet.noise_std_wh = 0.0;
    Rng rng(5);
    CHECK(sample_generation(quiet, 14, 1.0, rng) == mean_generation(quiet, 14, 1.0));

    GenerationModel g;
    const int draws = 100000;
    double sum = 0.0;
    for (int k = 0; k < draws; ++k) sum += sample_generation(g, 15, 1.0, rng);
    CHECK(std::abs(sum / draws - mean_generation(g, 15, 1.0)) < 0.1);

    // At the peak the upper clamp removes the top half of the noise:
    // E[min(X, m)] = m - s / sqrt(2 pi).
    sum = 0.0;
    for (int k = 0; k < draws; ++k) {
        const double v = sample_generation(g, 12, 1.0, rng);
        CHECK(v <= 200.0);
        sum += v;
    }
    CHECK(std::abs(sum / draws - (200.0 - 5.0 / std::sqrt(2.0 * std::numbers::pi))) < 0.1);

    GenerationModel noisy;
    noisy.noise_std_wh = 500.0;
    for (int k = 0; k < 1000; ++k) CHECK(sample_generation(noisy, 1, 1.0, rng) >= 0.0);
}

TEST_CASE("consumption peak is C_max") {
    ConsumptionModel c;
    CHECK(c.max_energy_wh(1.0) == doctest::Approx(200.5).epsilon(1e-12));
    const auto profile = consumption_profile(c, 24, 1.0);
    double peak = 0.0;
    int arg = 0;
    for (int n = 0; n < 24; ++n) {
        CHECK(profile[n] >= 0.0);
        CHECK(profile[n] <= 200.5 + 1e-12);
        if (profile[n] > peak) peak = profile[n], arg = n + 1;
    }
    CHECK(arg == 10);
    CHECK(peak == c.max_energy_wh(1.0));
    CHECK(mean_consumption(c, 10, 24, 1.0) == c.max_energy_wh(1.0));
    CHECK(mean_consumption(c, 2, 24, 1.0) < 0.01 * 200.5);
}

TEST_CASE("degenerate mixture peaks at the first mode") {
    ConsumptionModel c;
    c.weight_a = 1.0;
    c.weight_b = 0.0;
    c.mode_a_hour = 7.0;
    const auto profile = consumption_profile(c, 24, 1.0);
    CHECK(std::max_element(profile.begin(), profile.end()) - profile.begin() == 6);
    for (int n = 1; n < 6; ++n) CHECK(profile[n] > profile[n - 1]);
    for (int n = 7; n < 24; ++n) CHECK(profile[n] < profile[n - 1]);
}

TEST_CASE("consumption sampling") {
    ConsumptionModel quiet;
    quiet.noise_std_wh = 0.0;
    Rng rng(11);
    CHECK(sample_consumption(quiet, 8, 24, 1.0, rng) == mean_consumption(quiet, 8, 24, 1.0));

    ConsumptionModel c;
    const int draws = 100000;
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < draws; ++k) {
        const double v = sample_consumption(c, 14, 24, 1.0, rng);  // far from both clamps
        sum += v;
        sq += v * v;
    }
    const double mean = sum / draws;
    const double sd = std::sqrt(sq / draws - mean * mean);
    CHECK(std::abs(sd - 5.0) < 0.05 * 5.0);

    ConsumptionModel noisy;
    noisy.noise_std_wh = 400.0;
    for (int k = 0; k < 1000; ++k) {
        const double v = sample_consumption(noisy, 2, 24, 1.0, rng);
        CHECK(v >= 0.0);
        CHECK(v <= noisy.max_energy_wh(1.0));
    }
}

TEST_CASE("NRE statistics") {
    BaseStation bs;
    const NreStat s = nre_stats(bs, 12, 24, 1.0);
    CHECK(s.std == doctest::Approx(std::sqrt(50.0)).epsilon(1e-12));
    CHECK(s.std == doctest::Approx(7.0711).epsilon(1e-5));
    CHECK(s.mean == doctest::Approx(200.0 - mean_consumption(bs.consumption, 12, 24, 1.0)));

    // Generation shaped exactly like the first consumption mode, no second mode.
    BaseStation flat;
    flat.consumption.weight_a = 1.0;
    flat.consumption.weight_b = 0.0;
    flat.consumption.mode_a_hour = 12.0;
    flat.consumption.mode_a_width_hours = 3.0;
    flat.generation.panel_area_m2 = flat.consumption.max_energy_wh(1.0) / 200.0;
    for (int n = 1; n <= 24; ++n) CHECK(std::abs(nre_stats(flat, n, 24, 1.0).mean) < 1e-9);
}

TEST_CASE("average NRE identity on a placed network") {
    Network net = fixture::line_network(5, 24);
    for (int i = 0; i < 5; ++i) net.stations[i].generation.panel_area_m2 = 0.5 + 0.4 * i;
    const EnergyMatrix g = mean_generation_matrix(net);
    const EnergyMatrix c = mean_consumption_matrix(net);
    for (int n = 0; n < 24; ++n) {
        double lhs = 0.0, gsum = 0.0, csum = 0.0;
        for (int i = 0; i < 5; ++i) {
            lhs += nre_stats(net.stations[i], n + 1, 24, 1.0).mean;
            gsum += g(i, n);
            csum += c(i, n);
        }
        CHECK(lhs / 5 == doctest::Approx(gsum / 5 - csum / 5).epsilon(1e-12));
    }
}

TEST_CASE("slot hours") {
    CHECK(slot_hour(1, 1.0) == 1.0);
    CHECK(slot_hour(24, 1.0) == 24.0);
    // three 8-hour slots: midpoints 4, 12, 20, shifted by half an hour
    CHECK(slot_hour(2, 8.0) == doctest::Approx(12.5));
}

TEST_CASE("price ordering flag") {
    CHECK(PriceSchedule::constant(3, 0.8, 0.2, 0.6, 0.4).strict_ordering());
    CHECK_FALSE(PriceSchedule::constant(3, 0.6, 0.2, 0.6, 0.4).strict_ordering());
    CHECK_FALSE(PriceSchedule::constant(3, 0.8, 0.5, 0.6, 0.4).strict_ordering());
    PriceSchedule p = PriceSchedule::constant(2, 0.8, 0.2, 0.6, 0.4);
    p.grid[1] = 0.1;
    CHECK_FALSE(p.strict_ordering());
}

TEST_CASE("sampled days stay inside the physical ranges") {
    Network net = fixture::line_network(4, 24);
    Rng rng(21);
    const Realization day = sample_realization(net, rng);
    for (int i = 0; i < 4; ++i) {
        for (int n = 0; n < 24; ++n) {
            CHECK(day.generation(i, n) >= 0.0);
            CHECK(day.generation(i, n) <= 200.0);
            CHECK(day.consumption(i, n) >= 0.0);
            CHECK(day.consumption(i, n) <= 200.5);
        }
    }
}

}
