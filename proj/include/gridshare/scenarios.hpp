#pragma once

#include <stdexcept>
#include <vector>

#include "gridshare/model.hpp"
#include "gridshare/rng.hpp"

namespace gridshare {

enum class ScenarioMode { Exhaustive, Sampled };

/// Discretized generation uncertainty: alpha_m = mean * (1 + d_i * xi), with
/// xi drawn per cell from a symmetric M-point support.
struct ScenarioSet {
    std::vector<EnergyMatrix> generation;
    std::vector<double> weights;
    ScenarioMode mode = ScenarioMode::Exhaustive;

    int size() const { return static_cast<int>(generation.size()); }
};

class ScenarioExplosion : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// M equally spaced points on [-1, 1]; {0} for M = 1.
std::vector<double> scenario_support(int points);

/// M^(cells) if it does not exceed `cap`, otherwise cap + 1.
long long scenario_count(int points, int cells, long long cap);

/// Exhaustive enumeration when M^(K N) <= cap, otherwise `cap` equally
/// weighted i.i.d. draws. `require_exhaustive` turns the fallback into a
/// ScenarioExplosion.
ScenarioSet enumerate_scenarios(const EnergyMatrix& mean, const std::vector<double>& deviation,
                                int points, long long cap, Rng& rng,
                                bool require_exhaustive = false);
ScenarioSet enumerate_scenarios(const EnergyMatrix& mean, double deviation, int points,
                                long long cap, Rng& rng, bool require_exhaustive = false);

/// One realization drawn from the same discrete model.
EnergyMatrix sample_scenario(const EnergyMatrix& mean, const std::vector<double>& deviation,
                             int points, Rng& rng);

}  // namespace gridshare
