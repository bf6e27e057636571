#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridshare/clustering.hpp"
#include "gridshare/config.hpp"
#include "gridshare/dispatch.hpp"
#include "gridshare/rng.hpp"

namespace gridshare {

enum class Knowledge { Zero, Perfect, Partial };
enum class ClusteringMethod { None, AgglomerativeAea, AgglomerativeSea, DivisiveAea, DivisiveSea };

const char* to_string(Knowledge k);
const char* to_string(ClusteringMethod c);
SharingMode parse_sharing(const std::string& name);
Knowledge parse_knowledge(const std::string& name);
ClusteringMethod parse_clustering(const std::string& name);

struct Strategy {
    SharingMode sharing = SharingMode::Hybrid;
    Knowledge knowledge = Knowledge::Perfect;
    ClusteringMethod clustering = ClusteringMethod::AgglomerativeAea;

    /// Physical sharing needs a clustering method to install lines.
    void validate() const;
    std::string label() const;
};

/// Lines installed by a clustering method; the zero matrix for None.
AssociationMatrix plan_links(const Network& net, ClusteringMethod method, const ClusteringParams& params);

enum class RealizationModel {
    Gaussian,  // mean profiles plus clamped Gaussian noise on generation and consumption
    Discrete   // generation on the scenario support, consumption at its mean
};

struct ExperimentSettings {
    RealizationModel realization = RealizationModel::Gaussian;
    std::vector<double> deviation;  // per station; empty means `deviation_all` everywhere
    double deviation_all = 0.2;
    int scenario_points = 2;
    long long scenario_cap = 4096;
    int loss_segments = 8;
    SolverOptions solver;
    ClusteringParams clustering;
    bool resample_placement = false;

    static ExperimentSettings from_config(const Config& config);
    std::vector<double> deviations(int stations) const;
};

struct Stat {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Network-wide totals of one simulated day.
struct DayTotals {
    double cost = 0.0;
    double grid = 0.0;          // q^g
    double shared_sg = 0.0;     // q^b, energy bought from other stations
    double extra = 0.0;         // q^e
    double shared_lines = 0.0;  // delivered over physical lines
    double battery_use = 0.0;   // q^beta
};

DayTotals day_totals(const EnergySchedule& schedule, const PriceSchedule& prices);

struct AggregateReport {
    std::string strategy;
    int iterations = 0;
    Stat cost, grid, shared_sg, extra, shared_lines, battery_use;
    double cable_length_km = 0.0;
    int link_count = 0;
    std::vector<DayTotals> samples;  // iteration order
};

class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IterationError : public std::runtime_error {
public:
    IterationError(int iteration, const std::string& what)
        : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
    int iteration() const { return iteration_; }

private:
    int iteration_;
};

/// Runs one strategy over a fixed set of lines. Iteration t always draws its
/// day from Rng::child(seed, t), so strategies compared under the same seed
/// see identical days.
AggregateReport run_monte_carlo(const Network& net, const Strategy& strategy,
                                const AssociationMatrix& links, const ExperimentSettings& settings,
                                int iterations, std::uint64_t seed);

/// As above, with lines from the strategy's clustering method.
AggregateReport run_monte_carlo(const Network& net, const Strategy& strategy,
                                const ExperimentSettings& settings, int iterations, std::uint64_t seed);

/// First-stage plan from the scenario model around the mean day. Sampled
/// scenario sets use a stream derived from `seed`, apart from the days.
PartialPlan plan_partial(const Network& net, const Strategy& strategy, const AssociationMatrix& links,
                         const ExperimentSettings& settings, std::uint64_t seed);

/// One day under the settings' realization model.
Realization draw_day(const Network& net, const ExperimentSettings& settings, Rng& rng);

/// Dispatches one day under a strategy and audits the schedule.
EnergySchedule simulate_day(const Network& net, const Strategy& strategy, const AssociationMatrix& links,
                            const ExperimentSettings& settings, const EnergyMatrix& generation,
                            const EnergyMatrix& consumption, const PartialPlan* plan);

/// Throws InvariantViolation when a schedule breaks balance, market clearing,
/// battery bounds, line physics or (when prices are strictly ordered and the
/// purchase was not committed in advance) buy/sell exclusivity.
void check_schedule(const EnergySchedule& schedule, const Network& net, const EnergyMatrix& generation,
                    const EnergyMatrix& consumption, bool committed_purchase);

enum class SweepParameter { SharingRange, GridPrice, Deviation };

const char* to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(const std::string& name);

struct SweepSpec {
    SweepParameter parameter = SweepParameter::SharingRange;
    std::vector<double> values;
    int iterations = 1000;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SweepRow {
    double value = 0.0;
    AggregateReport report;
};

/// One report per (value, strategy), values outermost.
std::vector<SweepRow> sweep(const SweepSpec& spec, const Network& net, const ExperimentSettings& settings,
                            const std::vector<Strategy>& strategies);

/// Three stations with generation at 150%, 80% and 60% of the peak
/// consumption, identical consumption, a single 2 km line between the first
/// two and a third station out of range.
Network three_bs_network(double grid_price = 0.8);
AssociationMatrix three_bs_links();

struct ThreeBsRow {
    double grid_price = 0.0;
    SharingMode sharing = SharingMode::NoSharing;
    double cost = 0.0;
    double saving = 0.0;  // relative to no sharing at the same price
};

/// Perfect-knowledge cost of every sharing mode on the mean day of the
/// three-station network, for each grid price.
std::vector<ThreeBsRow> replicate_three_bs(const std::vector<double>& grid_prices);
std::vector<double> default_three_bs_prices();

/// The three-station network over three 8-hour slots with 800 Wh batteries
/// starting at 100 Wh and traffic peaks at 12 h and 20 h.
Network stochastic_case_network();

/// Stochastic-programming grid purchases next to the Monte Carlo mean of the
/// perfect-knowledge purchases on days drawn from the same scenario model.
struct StochasticComparison {
    EnergyMatrix sp_grid;
    EnergyMatrix mc_grid;
    int scenarios = 0;
    int iterations = 0;
};

StochasticComparison compare_sp_with_monte_carlo(const Network& net, const AssociationMatrix& links,
                                                 const ExperimentSettings& settings, int iterations,
                                                 std::uint64_t seed);

/// Locale-independent shortest round-trip formatting for CSV cells.
std::string format_number(double value);

void write_positions_csv(std::ostream& out, const Network& net);
void write_association_csv(std::ostream& out, const AssociationMatrix& links);
void write_edges_csv(std::ostream& out, const AssociationMatrix& links, const Network& net);
void write_schedule_csv(std::ostream& out, const EnergySchedule& schedule);
void write_link_flows_csv(std::ostream& out, const EnergySchedule& schedule);
void write_report_csv(std::ostream& out, const std::vector<SweepRow>& rows, const std::string& parameter);
void write_samples_csv(std::ostream& out, const AggregateReport& report);
void write_three_bs_csv(std::ostream& out, const std::vector<ThreeBsRow>& rows);
void write_comparison_csv(std::ostream& out, const StochasticComparison& cmp);

}  // namespace gridshare
