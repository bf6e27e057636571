#include "gridshare/scenarios.hpp"

#include <stdexcept>
#include <string>

namespace gridshare {

std::vector<double> scenario_support(int points) {
    if (points < 1) throw std::invalid_argument("scenario support needs at least one point");
    if (points == 1) return {0.0};
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) out[k] = 2.0 * k / (points - 1) - 1.0;
    return out;
}

long long scenario_count(int points, int cells, long long cap) {
    long long total = 1;
    for (int c = 0; c < cells; ++c) {
        if (points == 1) break;
        if (total > cap / points) return cap + 1;
        total *= points;
    }
    return total;
}

namespace {

void check_deviation(const EnergyMatrix& mean, const std::vector<double>& deviation) {
    if (static_cast<int>(deviation.size()) != mean.stations) {
        throw std::invalid_argument("one deviation per station is required");
    }
    for (double d : deviation) {
        if (!(d >= 0.0 && d < 1.0)) throw std::invalid_argument("deviation must lie in [0, 1)");
    }
}

}  // namespace

ScenarioSet enumerate_scenarios(const EnergyMatrix& mean, const std::vector<double>& deviation,
                                int points, long long cap, Rng& rng, bool require_exhaustive) {
    check_deviation(mean, deviation);
    if (cap < 1) throw std::invalid_argument("scenario cap must be positive");
    const auto support = scenario_support(points);
    const int cells = mean.stations * mean.slots;
    const long long count = scenario_count(points, cells, cap);

    ScenarioSet set;
    auto apply = [&](const std::vector<int>& digit) {
        EnergyMatrix alpha = mean;
        for (int c = 0; c < cells; ++c) {
            const int i = c / mean.slots;
            alpha.values[c] = mean.values[c] * (1.0 + deviation[i] * support[digit[c]]);
        }
        set.generation.push_back(std::move(alpha));
    };

    std::vector<int> digit(static_cast<std::size_t>(cells), 0);
    if (count <= cap) {
        set.mode = ScenarioMode::Exhaustive;
        set.generation.reserve(static_cast<std::size_t>(count));
        for (long long m = 0; m < count; ++m) {
            apply(digit);
            // Odometer over cells, last cell fastest.
            for (int c = cells - 1; c >= 0; --c) {
                if (++digit[c] < points) break;
                digit[c] = 0;
            }
        }
    } else {
        if (require_exhaustive) {
            throw ScenarioExplosion("exhaustive scenario set exceeds the cap of " + std::to_string(cap));
        }
        set.mode = ScenarioMode::Sampled;
        set.generation.reserve(static_cast<std::size_t>(cap));
        for (long long m = 0; m < cap; ++m) {
            for (int c = 0; c < cells; ++c) digit[c] = static_cast<int>(rng.below(static_cast<std::uint64_t>(points)));
            apply(digit);
        }
    }
    set.weights.assign(set.generation.size(), 1.0 / static_cast<double>(set.generation.size()));
    return set;
}

ScenarioSet enumerate_scenarios(const EnergyMatrix& mean, double deviation, int points,
                                long long cap, Rng& rng, bool require_exhaustive) {
    return enumerate_scenarios(mean, std::vector<double>(static_cast<std::size_t>(mean.stations), deviation),
                               points, cap, rng, require_exhaustive);
}

EnergyMatrix sample_scenario(const EnergyMatrix& mean, const std::vector<double>& deviation,
                             int points, Rng& rng) {
    check_deviation(mean, deviation);
    const auto support = scenario_support(points);
    EnergyMatrix alpha = mean;
    for (int c = 0; c < mean.stations * mean.slots; ++c) {
        const double xi = support[rng.below(static_cast<std::uint64_t>(points))];
        alpha.values[c] = mean.values[c] * (1.0 + deviation[c / mean.slots] * xi);
    }
    return alpha;
}

}  // namespace gridshare
