// gridshare command line: placement, clustering, single-day dispatch and the
// Monte Carlo experiments, all driven by one JSON config.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridshare/config.hpp"
#include "gridshare/harness.hpp"
#include "gridshare/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gridshare;

namespace {

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> placement_seed;
    std::string output = ".";
    std::optional<int> iterations;
};

// Overrides shared by the dispatch-style subcommands.
struct StrategyFlags {
    std::optional<std::string> sharing;
    std::optional<std::string> knowledge;
    std::optional<std::string> clustering;
    std::optional<double> range;
    std::optional<double> deviation;
    std::optional<long long> scenario_cap;
    std::optional<std::string> realization;
};

class Run {
public:
    Run(std::string command, const Globals& g) : command_(std::move(command)), globals_(g) {
        config_ = g.config_path.empty() ? Config{} : load_config(g.config_path);
        if (g.placement_seed) config_.network.rng_seed = *g.placement_seed;
        if (g.iterations) config_.harness.iterations = *g.iterations;
        seed_ = g.seed.value_or(1);
        fs::create_directories(g.output);
    }

    Config& config() { return config_; }
    std::uint64_t seed() const { return seed_; }

    void apply(const StrategyFlags& f) {
        if (f.sharing) config_.harness.sharing = *f.sharing;
        if (f.knowledge) config_.dispatch.knowledge = *f.knowledge;
        if (f.clustering) config_.harness.clustering = *f.clustering;
        if (f.range) config_.cable.sharing_range_km = *f.range;
        if (f.deviation) config_.dispatch.deviation = *f.deviation;
        if (f.scenario_cap) config_.dispatch.scenario_cap = *f.scenario_cap;
        if (f.realization) config_.harness.realization = *f.realization;
    }

    Strategy strategy() const {
        Strategy s;
        s.sharing = parse_sharing(config_.harness.sharing);
        s.knowledge = parse_knowledge(config_.dispatch.knowledge);
        s.clustering = parse_clustering(config_.harness.clustering);
        s.validate();
        return s;
    }

    template <class Writer>
    void write(const std::string& name, Writer&& writer) {
        const fs::path path = fs::path(globals_.output) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
        writer(out);
        if (!out) throw std::runtime_error("failed writing " + path.string());
        outputs_.push_back(name);
    }

    void set(const std::string& key, json value) { arguments_[key] = std::move(value); }

    void finish() {
        json manifest;
        manifest["command"] = command_;
        manifest["seed"] = seed_;
        manifest["arguments"] = arguments_;
        manifest["config"] = config_to_json(config_);
        manifest["outputs"] = outputs_;
        write("run_manifest.json", [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
        for (const auto& name : outputs_) std::cout << (fs::path(globals_.output) / name).string() << '\n';
    }

private:
    std::string command_;
    Globals globals_;
    Config config_;
    std::uint64_t seed_ = 1;
    json arguments_ = json::object();
    std::vector<std::string> outputs_;
};

void add_strategy_flags(CLI::App* cmd, StrategyFlags& f, bool with_knowledge) {
    cmd->add_option("--sharing", f.sharing, "no_sharing | sg_only | physical_only | hybrid");
    if (with_knowledge) {
        cmd->add_option("--knowledge", f.knowledge, "zero | perfect | partial")
            ->check(CLI::IsMember({"zero", "perfect", "partial"}));
    }
    cmd->add_option("--clustering", f.clustering,
                    "none | agglomerative_aea | agglomerative_sea | divisive_aea | divisive_sea");
    cmd->add_option("--range", f.range, "sharing range in km");
    cmd->add_option("--deviation", f.deviation, "relative generation deviation of the scenario model");
    cmd->add_option("--scenario-cap", f.scenario_cap, "largest scenario set solved exhaustively");
    cmd->add_option("--realization", f.realization, "gaussian | discrete")
        ->check(CLI::IsMember({"gaussian", "discrete"}));
}

AssociationMatrix lines_for(const Network& net, const Strategy& s, const Config& c) {
    const bool lines = s.sharing == SharingMode::PhysicalOnly || s.sharing == SharingMode::Hybrid;
    return lines ? plan_links(net, s.clustering, clustering_params(c)) : AssociationMatrix(net.size());
}

json cost_summary(const EnergySchedule& schedule, const Network& net, const Strategy& strategy,
                  const std::optional<PartialPlan>& plan) {
    const CostReport report = cost(schedule, net.prices);
    const DayTotals totals = day_totals(schedule, net.prices);
    json j;
    j["strategy"] = strategy.label();
    j["total_cost"] = report.total;
    j["per_station"] = report.per_station;
    j["per_slot"] = report.per_slot_total;
    j["grid"] = totals.grid;
    j["extra"] = totals.extra;
    j["shared_sg"] = totals.shared_sg;
    j["shared_lines"] = totals.shared_lines;
    j["battery_use"] = totals.battery_use;
    if (plan) {
        j["scenarios"] = plan->scenarios;
        j["planned_objective"] = plan->objective;
        j["expected_recourse"] = plan->expected_recourse;
    }
    return j;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad number in list: " + item);
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty value list");
    return out;
}

std::vector<Strategy> parse_strategies(const std::string& text, const Strategy& base) {
    std::vector<Strategy> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        Strategy s = base;
        s.sharing = parse_sharing(item);
        if (s.sharing == SharingMode::NoSharing || s.sharing == SharingMode::SgOnly) {
            s.clustering = ClusteringMethod::None;
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy sharing between renewable-powered base stations"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    Globals g;
    app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "seed for sampled days and scenarios (default 1)");
    app.add_option("--placement-seed", g.placement_seed, "overrides network.rng_seed");
    app.add_option("--output", g.output, "output directory");
    app.add_option("--iterations", g.iterations, "Monte Carlo iterations")->check(CLI::PositiveNumber);

    auto* place = app.add_subcommand("place", "hard-core placement of the stations");

    auto* cluster = app.add_subcommand("cluster", "plan power lines with a clustering method");
    std::optional<std::string> cluster_method;
    std::optional<double> cluster_range;
    cluster->add_option("--method", cluster_method,
                        "agglomerative_aea | agglomerative_sea | divisive_aea | divisive_sea");
    cluster->add_option("--range", cluster_range, "sharing range in km");

    auto* dispatch = app.add_subcommand("dispatch", "dispatch one day and write its schedule");
    StrategyFlags dispatch_flags;
    bool mean_day = false;
    add_strategy_flags(dispatch, dispatch_flags, true);
    dispatch->add_flag("--mean-day", mean_day, "use the mean profiles instead of a sampled day");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of one strategy");
    StrategyFlags simulate_flags;
    add_strategy_flags(simulate, simulate_flags, true);

    auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo sweep over one parameter");
    StrategyFlags sweep_flags;
    std::string sweep_parameter = "sharing_range";
    std::string sweep_values = "0.5,1,1.5,2,2.5,3";
    std::string sweep_strategies = "no_sharing,sg_only,physical_only,hybrid";
    add_strategy_flags(sweep_cmd, sweep_flags, true);
    sweep_cmd->add_option("--parameter", sweep_parameter, "sharing_range | grid_price | deviation")
        ->check(CLI::IsMember({"sharing_range", "grid_price", "deviation"}));
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values");
    sweep_cmd->add_option("--strategies", sweep_strategies, "comma-separated sharing modes");

    auto* three = app.add_subcommand("replicate-three-bs", "three-station price study");
    std::optional<std::string> three_prices;
    bool stochastic = false;
    three->add_option("--prices", three_prices, "comma-separated grid prices");
    three->add_flag("--stochastic", stochastic,
                    "also compare stochastic-programming purchases with the Monte Carlo mean");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*place) {
            Run run("place", g);
            const Network net = build_network(run.config());
            run.write("positions.csv", [&](std::ostream& o) { write_positions_csv(o, net); });
            run.finish();
        } else if (*cluster) {
            Run run("cluster", g);
            if (cluster_method) run.config().harness.clustering = *cluster_method;
            if (cluster_range) run.config().cable.sharing_range_km = *cluster_range;
            const Network net = build_network(run.config());
            const ClusteringMethod method = parse_clustering(run.config().harness.clustering);
            const AssociationMatrix links = plan_links(net, method, clustering_params(run.config()));
            run.write("positions.csv", [&](std::ostream& o) { write_positions_csv(o, net); });
            run.write("association.csv", [&](std::ostream& o) { write_association_csv(o, links); });
            run.write("edges.csv", [&](std::ostream& o) { write_edges_csv(o, links, net); });
            run.finish();
        } else if (*dispatch) {
            Run run("dispatch", g);
            run.apply(dispatch_flags);
            run.set("mean_day", mean_day);
            const Network net = build_network(run.config());
            const Strategy strategy = run.strategy();
            const ExperimentSettings settings = ExperimentSettings::from_config(run.config());
            const AssociationMatrix links = lines_for(net, strategy, run.config());

            Realization day;
            if (mean_day) {
                day.generation = mean_generation_matrix(net);
                day.consumption = mean_consumption_matrix(net);
            } else {
                // Same day as iteration 0 of `simulate` under this seed.
                Rng rng = Rng::child(run.seed(), 0);
                day = draw_day(net, settings, rng);
            }
            std::optional<PartialPlan> plan;
            if (strategy.knowledge == Knowledge::Partial) {
                plan = plan_partial(net, strategy, links, settings, run.seed());
            }
            const EnergySchedule schedule = simulate_day(net, strategy, links, settings, day.generation,
                                                         day.consumption, plan ? &*plan : nullptr);
            run.write("schedule.csv", [&](std::ostream& o) { write_schedule_csv(o, schedule); });
            run.write("link_flows.csv", [&](std::ostream& o) { write_link_flows_csv(o, schedule); });
            run.write("cost_summary.json", [&](std::ostream& o) {
                o << cost_summary(schedule, net, strategy, plan).dump(2) << '\n';
            });
            run.finish();
        } else if (*simulate) {
            Run run("simulate", g);
            run.apply(simulate_flags);
            const Network net = build_network(run.config());
            const Strategy strategy = run.strategy();
            const ExperimentSettings settings = ExperimentSettings::from_config(run.config());
            const AggregateReport report =
                run_monte_carlo(net, strategy, settings, run.config().harness.iterations, run.seed());
            run.write("report.csv", [&](std::ostream& o) {
                write_report_csv(o, {SweepRow{run.config().cable.sharing_range_km, report}}, "sharing_range");
            });
            run.write("samples.csv", [&](std::ostream& o) { write_samples_csv(o, report); });
            run.finish();
        } else if (*sweep_cmd) {
            Run run("sweep", g);
            run.apply(sweep_flags);
            run.set("parameter", sweep_parameter);
            run.set("values", parse_list(sweep_values));
            run.set("strategies", sweep_strategies);
            const Network net = build_network(run.config());
            const ExperimentSettings settings = ExperimentSettings::from_config(run.config());
            SweepSpec spec;
            spec.parameter = parse_sweep_parameter(sweep_parameter);
            spec.values = parse_list(sweep_values);
            spec.iterations = run.config().harness.iterations;
            spec.seed = run.seed();
            Strategy base;
            base.knowledge = parse_knowledge(run.config().dispatch.knowledge);
            base.clustering = parse_clustering(run.config().harness.clustering);
            const auto rows = sweep(spec, net, settings, parse_strategies(sweep_strategies, base));
            run.write("sweep.csv", [&](std::ostream& o) { write_report_csv(o, rows, sweep_parameter); });
            run.finish();
        } else if (*three) {
            Run run("replicate-three-bs", g);
            const auto prices = three_prices ? parse_list(*three_prices) : default_three_bs_prices();
            run.set("prices", prices);
            run.set("stochastic", stochastic);
            const auto rows = replicate_three_bs(prices);
            run.write("three_bs.csv", [&](std::ostream& o) { write_three_bs_csv(o, rows); });
            if (stochastic) {
                const Network net = stochastic_case_network();
                ExperimentSettings settings = ExperimentSettings::from_config(run.config());
                settings.realization = RealizationModel::Discrete;
                const auto cmp = compare_sp_with_monte_carlo(net, three_bs_links(), settings,
                                                             run.config().harness.iterations, run.seed());
                run.write("sp_vs_mc.csv", [&](std::ostream& o) { write_comparison_csv(o, cmp); });
            }
            run.finish();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
