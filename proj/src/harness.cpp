#include "gridshare/harness.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>

namespace gridshare {

const char* to_string(Knowledge k) {
    switch (k) {
        case Knowledge::Zero: return "zero";
        case Knowledge::Perfect: return "perfect";
        case Knowledge::Partial: return "partial";
    }
    return "unknown";
}

const char* to_string(ClusteringMethod c) {
    switch (c) {
        case ClusteringMethod::None: return "none";
        case ClusteringMethod::AgglomerativeAea: return "agglomerative_aea";
        case ClusteringMethod::AgglomerativeSea: return "agglomerative_sea";
        case ClusteringMethod::DivisiveAea: return "divisive_aea";
        case ClusteringMethod::DivisiveSea: return "divisive_sea";
    }
    return "unknown";
}

const char* to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::SharingRange: return "sharing_range";
        case SweepParameter::GridPrice: return "grid_price";
        case SweepParameter::Deviation: return "deviation";
    }
    return "unknown";
}

namespace {

template <typename E, std::size_t N>
E parse_enum(const std::string& name, const E (&all)[N], const char* what) {
    for (E e : all) {
        if (name == to_string(e)) return e;
    }
    std::string options;
    for (E e : all) options += std::string(options.empty() ? "" : ", ") + to_string(e);
    throw std::invalid_argument("unknown " + std::string(what) + " '" + name + "' (expected " + options + ")");
}

}  // namespace

SharingMode parse_sharing(const std::string& name) {
    static constexpr SharingMode all[] = {SharingMode::NoSharing, SharingMode::SgOnly, SharingMode::PhysicalOnly,
                                          SharingMode::Hybrid};
    return parse_enum(name, all, "sharing mode");
}

Knowledge parse_knowledge(const std::string& name) {
    static constexpr Knowledge all[] = {Knowledge::Zero, Knowledge::Perfect, Knowledge::Partial};
    return parse_enum(name, all, "knowledge level");
}

ClusteringMethod parse_clustering(const std::string& name) {
    static constexpr ClusteringMethod all[] = {ClusteringMethod::None, ClusteringMethod::AgglomerativeAea,
                                               ClusteringMethod::AgglomerativeSea, ClusteringMethod::DivisiveAea,
                                               ClusteringMethod::DivisiveSea};
    return parse_enum(name, all, "clustering method");
}

SweepParameter parse_sweep_parameter(const std::string& name) {
    static constexpr SweepParameter all[] = {SweepParameter::SharingRange, SweepParameter::GridPrice,
                                             SweepParameter::Deviation};
    return parse_enum(name, all, "sweep parameter");
}

void Strategy::validate() const {
    const bool physical = sharing == SharingMode::PhysicalOnly || sharing == SharingMode::Hybrid;
    if (physical && clustering == ClusteringMethod::None) {
        throw std::invalid_argument("physical sharing needs a clustering method");
    }
}

std::string Strategy::label() const {
    std::string out = std::string(to_string(sharing)) + "/" + to_string(knowledge);
    if (sharing == SharingMode::PhysicalOnly || sharing == SharingMode::Hybrid) {
        out += std::string("/") + to_string(clustering);
    }
    return out;
}

AssociationMatrix plan_links(const Network& net, ClusteringMethod method, const ClusteringParams& base) {
    if (method == ClusteringMethod::None) return AssociationMatrix(net.size());
    ClusteringParams params = base;
    params.metric = (method == ClusteringMethod::AgglomerativeAea || method == ClusteringMethod::DivisiveAea)
                        ? MetricKind::Aea
                        : MetricKind::Sea;
    const NreTable table = NreTable::from_network(net);
    const auto positions = net.positions();
    if (method == ClusteringMethod::AgglomerativeAea || method == ClusteringMethod::AgglomerativeSea) {
        return agglomerative_cluster(table, positions, params, net.cable, net.tau());
    }
    return divisive_cluster(table, positions, params, net.cable, net.tau());
}

ExperimentSettings ExperimentSettings::from_config(const Config& c) {
    ExperimentSettings s;
    s.realization = c.harness.realization == "discrete" ? RealizationModel::Discrete : RealizationModel::Gaussian;
    s.deviation_all = c.dispatch.deviation;
    s.scenario_points = c.dispatch.scenario_points;
    s.scenario_cap = c.dispatch.scenario_cap;
    s.loss_segments = c.dispatch.loss_segments;
    s.solver = c.dispatch.solver;
    s.clustering = clustering_params(c);
    s.resample_placement = c.harness.average_placements;
    return s;
}

std::vector<double> ExperimentSettings::deviations(int stations) const {
    if (deviation.empty()) return std::vector<double>(static_cast<std::size_t>(stations), deviation_all);
    if (static_cast<int>(deviation.size()) != stations) {
        throw std::invalid_argument("per-station deviation list does not match the network");
    }
    return deviation;
}

DayTotals day_totals(const EnergySchedule& s, const PriceSchedule& prices) {
    DayTotals t;
    t.cost = cost(s, prices).total;
    for (int i = 0; i < s.stations(); ++i) {
        for (int n = 0; n < s.slots(); ++n) {
            t.grid += s.grid(i, n);
            t.shared_sg += s.buy(i, n);
            t.extra += s.extra(i, n);
            t.battery_use += s.battery_use(i, n);
        }
    }
    for (const auto& l : s.links) {
        for (double d : l.delivered) t.shared_lines += d;
    }
    return t;
}

void check_schedule(const EnergySchedule& schedule, const Network& net, const EnergyMatrix& generation,
                    const EnergyMatrix& consumption, bool committed_purchase) {
    std::vector<double> initial;
    for (const auto& bs : net.stations) initial.push_back(bs.battery.initial_wh);
    try {
        battery_trajectory(schedule, generation, initial);
    } catch (const TrajectoryMismatch& e) {
        throw InvariantViolation(e.what());
    }
    const ScheduleAudit audit = audit_schedule(schedule, net, generation, consumption);
    const bool exclusive = net.prices.strict_ordering() && !committed_purchase;
    if (!audit.ok(1e-6, exclusive)) throw InvariantViolation("schedule audit failed: " + audit.describe());
}

namespace {

DispatchContext make_context(const Network& net, const Strategy& strategy, const AssociationMatrix& links,
                             const ExperimentSettings& settings) {
    DispatchContext ctx;
    ctx.network = &net;
    ctx.links = links;
    ctx.sharing = strategy.sharing;
    ctx.loss_segments = settings.loss_segments;
    ctx.solver = settings.solver;
    return ctx;
}

}  // namespace

PartialPlan plan_partial(const Network& net, const Strategy& strategy, const AssociationMatrix& links,
                      const ExperimentSettings& settings, std::uint64_t seed) {
    const EnergyMatrix mean_gen = mean_generation_matrix(net);
    const EnergyMatrix mean_cons = mean_consumption_matrix(net);
    // Sampled scenario sets draw from their own stream, apart from the days.
    Rng rng(mix_seed(seed ^ 0x5ce7a210u));
    const ScenarioSet set = enumerate_scenarios(mean_gen, settings.deviations(net.size()),
                                                settings.scenario_points, settings.scenario_cap, rng);
    return dispatch_partial(make_context(net, strategy, links, settings), set, mean_cons);
}

Realization draw_day(const Network& net, const ExperimentSettings& settings, Rng& rng) {
    if (settings.realization == RealizationModel::Gaussian) return sample_realization(net, rng);
    Realization day;
    day.generation = sample_scenario(mean_generation_matrix(net), settings.deviations(net.size()),
                                     settings.scenario_points, rng);
    day.consumption = mean_consumption_matrix(net);
    return day;
}

namespace {

AggregateReport summarize(std::string label, std::vector<DayTotals> samples) {
    AggregateReport r;
    r.strategy = std::move(label);
    r.iterations = static_cast<int>(samples.size());
    auto stat = [&](double DayTotals::*field) {
        Stat s;
        const double n = static_cast<double>(samples.size());
        for (const auto& d : samples) s.mean += d.*field;
        s.mean /= n;
        if (samples.size() > 1) {
            double ss = 0.0;
            for (const auto& d : samples) ss += (d.*field - s.mean) * (d.*field - s.mean);
            s.std_error = std::sqrt(ss / (n - 1.0) / n);
        }
        return s;
    };
    r.cost = stat(&DayTotals::cost);
    r.grid = stat(&DayTotals::grid);
    r.shared_sg = stat(&DayTotals::shared_sg);
    r.extra = stat(&DayTotals::extra);
    r.shared_lines = stat(&DayTotals::shared_lines);
    r.battery_use = stat(&DayTotals::battery_use);
    r.samples = std::move(samples);
    return r;
}

bool uses_lines(const Strategy& s) {
    return s.sharing == SharingMode::PhysicalOnly || s.sharing == SharingMode::Hybrid;
}

}  // namespace

EnergySchedule simulate_day(const Network& net, const Strategy& strategy, const AssociationMatrix& links,
                            const ExperimentSettings& settings, const EnergyMatrix& generation,
                            const EnergyMatrix& consumption, const PartialPlan* plan) {
    const DispatchContext ctx = make_context(net, strategy, links, settings);
    EnergySchedule schedule;
    switch (strategy.knowledge) {
        case Knowledge::Zero: schedule = dispatch_zero(ctx, generation, consumption); break;
        case Knowledge::Perfect: schedule = dispatch_perfect(ctx, generation, consumption); break;
        case Knowledge::Partial:
            if (!plan) throw std::invalid_argument("partial knowledge needs a first-stage plan");
            schedule = evaluate_partial(ctx, *plan, generation, consumption);
            break;
    }
    check_schedule(schedule, net, generation, consumption, strategy.knowledge == Knowledge::Partial);
    return schedule;
}

AggregateReport run_monte_carlo(const Network& net, const Strategy& strategy, const AssociationMatrix& links,
                                const ExperimentSettings& settings, int iterations, std::uint64_t seed) {
    strategy.validate();
    if (iterations < 1) throw std::invalid_argument("at least one iteration is required");
    std::optional<PartialPlan> plan;
    if (strategy.knowledge == Knowledge::Partial) plan = plan_partial(net, strategy, links, settings, seed);

    std::vector<DayTotals> samples;
    samples.reserve(static_cast<std::size_t>(iterations));
    for (int t = 0; t < iterations; ++t) {
        try {
            Rng rng = Rng::child(seed, static_cast<std::uint64_t>(t));
            const Realization day = draw_day(net, settings, rng);
            const EnergySchedule s = simulate_day(net, strategy, links, settings, day.generation,
                                                  day.consumption, plan ? &*plan : nullptr);
            samples.push_back(day_totals(s, net.prices));
        } catch (const std::exception& e) {
            throw IterationError(t, e.what());
        }
    }
    AggregateReport r = summarize(strategy.label(), std::move(samples));
    if (uses_lines(strategy)) {
        r.link_count = links.edge_count();
        r.cable_length_km = total_cable_length(links, net.positions());
    }
    return r;
}

AggregateReport run_monte_carlo(const Network& net, const Strategy& strategy, const ExperimentSettings& settings,
                                int iterations, std::uint64_t seed) {
    strategy.validate();
    if (!settings.resample_placement) {
        const AssociationMatrix links = uses_lines(strategy) ? plan_links(net, strategy.clustering, settings.clustering)
                                                             : AssociationMatrix(net.size());
        return run_monte_carlo(net, strategy, links, settings, iterations, seed);
    }
    // A fresh placement, and fresh lines, for every iteration.
    std::vector<DayTotals> samples;
    double cable = 0.0;
    double link_count = 0.0;
    for (int t = 0; t < iterations; ++t) {
        Network local = net;
        Rng place_rng = Rng::child(mix_seed(seed ^ 0x91acedu), static_cast<std::uint64_t>(t));
        const auto positions = generate_placement(net.config, place_rng);
        for (int i = 0; i < local.size(); ++i) local.stations[i].position = positions[i];
        const AssociationMatrix links = uses_lines(strategy)
                                            ? plan_links(local, strategy.clustering, settings.clustering)
                                            : AssociationMatrix(local.size());
        try {
            std::optional<PartialPlan> plan;
            if (strategy.knowledge == Knowledge::Partial) plan = plan_partial(local, strategy, links, settings, seed);
            Rng rng = Rng::child(seed, static_cast<std::uint64_t>(t));
            const Realization day = draw_day(local, settings, rng);
            const EnergySchedule s = simulate_day(local, strategy, links, settings, day.generation,
                                                  day.consumption, plan ? &*plan : nullptr);
            samples.push_back(day_totals(s, local.prices));
        } catch (const std::exception& e) {
            throw IterationError(t, e.what());
        }
        if (uses_lines(strategy)) {
            cable += total_cable_length(links, positions);
            link_count += links.edge_count();
        }
    }
    AggregateReport r = summarize(strategy.label(), std::move(samples));
    r.cable_length_km = cable / iterations;
    r.link_count = static_cast<int>(std::lround(link_count / iterations));
    return r;
}

void SweepSpec::validate() const {
    if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
    if (iterations < 1) throw std::invalid_argument("sweep needs at least one iteration");
}

std::vector<SweepRow> sweep(const SweepSpec& spec, const Network& base, const ExperimentSettings& base_settings,
                            const std::vector<Strategy>& strategies) {
    spec.validate();
    for (const auto& s : strategies) s.validate();
    std::vector<SweepRow> rows;
    for (double value : spec.values) {
        Network net = base;
        ExperimentSettings settings = base_settings;
        switch (spec.parameter) {
            case SweepParameter::SharingRange:
                if (value < 0.0) throw std::invalid_argument("sharing range must be >= 0");
                net.cable.sharing_range_km = value;
                settings.clustering.sharing_range_km = value;
                break;
            case SweepParameter::GridPrice:
                if (value < 0.0) throw std::invalid_argument("grid price must be >= 0");
                std::fill(net.prices.grid.begin(), net.prices.grid.end(), value);
                break;
            case SweepParameter::Deviation:
                settings.deviation.clear();
                settings.deviation_all = value;
                break;
        }
        std::map<ClusteringMethod, AssociationMatrix> cache;
        for (const auto& strategy : strategies) {
            SweepRow row;
            row.value = value;
            if (settings.resample_placement) {
                row.report = run_monte_carlo(net, strategy, settings, spec.iterations, spec.seed);
            } else {
                const ClusteringMethod method = uses_lines(strategy) ? strategy.clustering : ClusteringMethod::None;
                auto it = cache.find(method);
                if (it == cache.end()) it = cache.emplace(method, plan_links(net, method, settings.clustering)).first;
                row.report = run_monte_carlo(net, strategy, it->second, settings, spec.iterations, spec.seed);
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

namespace {

Network canned_network(int slots, double slot_hours, double grid_price) {
    Network net;
    net.config.bs_count = 3;
    net.config.slot_count = slots;
    net.config.slot_hours = slot_hours;
    net.cable.sharing_range_km = 2.0;
    const Point positions[] = {{1.0, 1.0}, {3.0, 1.0}, {2.0, 4.0}};
    const double share[] = {1.5, 0.8, 0.6};
    const ConsumptionModel consumption;
    for (int i = 0; i < 3; ++i) {
        BaseStation bs;
        bs.id = i;
        bs.position = positions[i];
        bs.consumption = consumption;
        // Peak generation power as a share of the peak consumption power.
        bs.generation.panel_area_m2 = share[i] * consumption.peak_power_w() /
                                      (1000.0 * bs.generation.peak_irradiance_kw_m2 * bs.generation.efficiency);
        net.stations.push_back(bs);
    }
    net.prices = PriceSchedule::constant(slots, grid_price, 0.2, 0.6, 0.4);
    return net;
}

}  // namespace

Network three_bs_network(double grid_price) {
    Network net = canned_network(24, 1.0, grid_price);
    net.validate();
    return net;
}

AssociationMatrix three_bs_links() {
    AssociationMatrix a(3);
    a.link(0, 1);
    return a;
}

std::vector<double> default_three_bs_prices() {
    return {0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
}

std::vector<ThreeBsRow> replicate_three_bs(const std::vector<double>& grid_prices) {
    static constexpr SharingMode modes[] = {SharingMode::NoSharing, SharingMode::SgOnly,
                                            SharingMode::PhysicalOnly, SharingMode::Hybrid};
    std::vector<ThreeBsRow> rows;
    const AssociationMatrix links = three_bs_links();
    for (double price : grid_prices) {
        const Network net = three_bs_network(price);
        const EnergyMatrix gen = mean_generation_matrix(net);
        const EnergyMatrix cons = mean_consumption_matrix(net);
        double baseline = 0.0;
        for (SharingMode mode : modes) {
            DispatchContext ctx;
            ctx.network = &net;
            ctx.links = links;
            ctx.sharing = mode;
            const EnergySchedule s = dispatch_perfect(ctx, gen, cons);
            check_schedule(s, net, gen, cons, false);
            ThreeBsRow row;
            row.grid_price = price;
            row.sharing = mode;
            row.cost = cost(s, net.prices).total;
            if (mode == SharingMode::NoSharing) baseline = row.cost;
            row.saving = baseline != 0.0 ? (baseline - row.cost) / std::abs(baseline) : 0.0;
            rows.push_back(row);
        }
    }
    return rows;
}

Network stochastic_case_network() {
    Network net = canned_network(3, 8.0, 0.8);
    for (auto& bs : net.stations) {
        bs.consumption.mode_a_hour = 12.0;
        bs.consumption.mode_b_hour = 20.0;
        bs.battery.capacity_wh = 800.0;
        bs.battery.initial_wh = 100.0;
        bs.battery.sell_threshold_wh = 400.0;
    }
    net.validate();
    return net;
}

StochasticComparison compare_sp_with_monte_carlo(const Network& net, const AssociationMatrix& links,
                                                 const ExperimentSettings& settings, int iterations,
                                                 std::uint64_t seed) {
    if (iterations < 1) throw std::invalid_argument("at least one iteration is required");
    Strategy strategy;
    strategy.sharing = SharingMode::Hybrid;
    strategy.knowledge = Knowledge::Partial;
    const PartialPlan plan = plan_partial(net, strategy, links, settings, seed);

    StochasticComparison out;
    out.sp_grid = plan.grid;
    out.scenarios = plan.scenarios;
    out.iterations = iterations;
    out.mc_grid = EnergyMatrix(net.size(), net.slots());
    const DispatchContext ctx = make_context(net, strategy, links, settings);
    const EnergyMatrix mean_gen = mean_generation_matrix(net);
    const EnergyMatrix mean_cons = mean_consumption_matrix(net);
    const auto dev = settings.deviations(net.size());
    for (int t = 0; t < iterations; ++t) {
        Rng rng = Rng::child(seed, static_cast<std::uint64_t>(t));
        const EnergyMatrix gen = sample_scenario(mean_gen, dev, settings.scenario_points, rng);
        const EnergySchedule s = dispatch_perfect(ctx, gen, mean_cons);
        check_schedule(s, net, gen, mean_cons, false);
        for (std::size_t c = 0; c < s.grid.values.size(); ++c) out.mc_grid.values[c] += s.grid.values[c];
    }
    for (double& v : out.mc_grid.values) v /= iterations;
    return out;
}

std::string format_number(double value) {
    if (value == 0.0) return "0";  // folds -0
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

void write_positions_csv(std::ostream& out, const Network& net) {
    out << "bs,x_km,y_km\n";
    for (const auto& bs : net.stations) {
        out << bs.id + 1 << ',' << format_number(bs.position.x) << ',' << format_number(bs.position.y) << '\n';
    }
}

void write_association_csv(std::ostream& out, const AssociationMatrix& links) {
    for (int i = 0; i < links.size(); ++i) {
        for (int j = 0; j < links.size(); ++j) out << (j ? "," : "") << (links.linked(i, j) ? 1 : 0);
        out << '\n';
    }
}

void write_edges_csv(std::ostream& out, const AssociationMatrix& links, const Network& net) {
    out << "from,to,length_km\n";
    double total = 0.0;
    for (const auto& [i, j] : links.edges()) {
        const double len = net.distance(i, j);
        total += len;
        out << i + 1 << ',' << j + 1 << ',' << format_number(len) << '\n';
    }
    out << "total,," << format_number(total) << '\n';
}

void write_schedule_csv(std::ostream& out, const EnergySchedule& s) {
    out << "bs,slot,q_g,q_e,q_b,q_s,q_beta,battery,curtailed\n";
    for (int i = 0; i < s.stations(); ++i) {
        for (int n = 0; n < s.slots(); ++n) {
            const double curtailed = s.curtailed.slots ? s.curtailed(i, n) : 0.0;
            out << i + 1 << ',' << n + 1 << ',' << format_number(s.grid(i, n)) << ','
                << format_number(s.extra(i, n)) << ',' << format_number(s.buy(i, n)) << ','
                << format_number(s.sell(i, n)) << ',' << format_number(s.battery_use(i, n)) << ','
                << format_number(s.battery(i, n)) << ',' << format_number(curtailed) << '\n';
        }
    }
}

void write_link_flows_csv(std::ostream& out, const EnergySchedule& s) {
    out << "from,to,slot,q_fwd,q_delivered\n";
    for (const auto& l : s.links) {
        for (int n = 0; n < s.slots(); ++n) {
            out << l.from + 1 << ',' << l.to + 1 << ',' << n + 1 << ',' << format_number(l.forward[n]) << ','
                << format_number(l.delivered[n]) << '\n';
        }
    }
}

void write_report_csv(std::ostream& out, const std::vector<SweepRow>& rows, const std::string& parameter) {
    out << "parameter,value,strategy,iterations,cost_mean,cost_se,grid_mean,grid_se,shared_sg_mean,"
           "shared_sg_se,extra_mean,extra_se,shared_lines_mean,shared_lines_se,battery_use_mean,"
           "battery_use_se,cable_length_km,links\n";
    for (const auto& row : rows) {
        const auto& r = row.report;
        out << parameter << ',' << format_number(row.value) << ',' << r.strategy << ',' << r.iterations;
        for (const Stat* s : {&r.cost, &r.grid, &r.shared_sg, &r.extra, &r.shared_lines, &r.battery_use}) {
            out << ',' << format_number(s->mean) << ',' << format_number(s->std_error);
        }
        out << ',' << format_number(r.cable_length_km) << ',' << r.link_count << '\n';
    }
}

void write_samples_csv(std::ostream& out, const AggregateReport& report) {
    out << "iteration,cost,grid,shared_sg,extra,shared_lines,battery_use\n";
    for (std::size_t t = 0; t < report.samples.size(); ++t) {
        const auto& d = report.samples[t];
        out << t << ',' << format_number(d.cost) << ',' << format_number(d.grid) << ','
            << format_number(d.shared_sg) << ',' << format_number(d.extra) << ','
            << format_number(d.shared_lines) << ',' << format_number(d.battery_use) << '\n';
    }
}

void write_three_bs_csv(std::ostream& out, const std::vector<ThreeBsRow>& rows) {
    out << "grid_price,strategy,cost,saving_vs_no_sharing\n";
    for (const auto& r : rows) {
        out << format_number(r.grid_price) << ',' << to_string(r.sharing) << ',' << format_number(r.cost) << ','
            << format_number(r.saving) << '\n';
    }
}

void write_comparison_csv(std::ostream& out, const StochasticComparison& cmp) {
    out << "bs,slot,q_g_sp,q_g_mc_mean\n";
    for (int i = 0; i < cmp.sp_grid.stations; ++i) {
        for (int n = 0; n < cmp.sp_grid.slots; ++n) {
            out << i + 1 << ',' << n + 1 << ',' << format_number(cmp.sp_grid(i, n)) << ','
                << format_number(cmp.mc_grid(i, n)) << '\n';
        }
    }
}

}  // namespace gridshare
