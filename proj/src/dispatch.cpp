#include "gridshare/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "gridshare/affinity.hpp"
#include "gridshare/loss_segments.hpp"

namespace gridshare {

const char* to_string(SharingMode mode) {
    switch (mode) {
        case SharingMode::NoSharing: return "no_sharing";
        case SharingMode::SgOnly: return "sg_only";
        case SharingMode::PhysicalOnly: return "physical_only";
        case SharingMode::Hybrid: return "hybrid";
    }
    return "unknown";
}

EnergySchedule::EnergySchedule(int stations, int slots)
    : grid(stations, slots),
      extra(stations, slots),
      buy(stations, slots),
      sell(stations, slots),
      battery_use(stations, slots),
      battery(stations, slots),
      curtailed(stations, slots) {}

double EnergySchedule::received(int i, int n) const {
    double total = 0.0;
    for (const auto& l : links) {
        if (l.to == i) total += l.delivered[n];
    }
    return total;
}

double EnergySchedule::sent(int i, int n) const {
    double total = 0.0;
    for (const auto& l : links) {
        if (l.from == i) total += l.forward[n];
    }
    return total;
}

CostReport cost(const EnergySchedule& s, const PriceSchedule& prices) {
    const int k = s.stations();
    const int slots = s.slots();
    if (prices.slot_count() < slots) throw std::invalid_argument("price schedule shorter than the schedule");
    CostReport report;
    report.per_slot = EnergyMatrix(k, slots);
    report.per_station.assign(static_cast<std::size_t>(k), 0.0);
    report.per_slot_total.assign(static_cast<std::size_t>(slots), 0.0);
    for (int i = 0; i < k; ++i) {
        for (int n = 0; n < slots; ++n) {
            const double paid = s.grid(i, n) + (s.curtailed.slots ? s.curtailed(i, n) : 0.0);
            const double psi = prices.grid[n] * paid + prices.buy[n] * s.buy(i, n) -
                               prices.sell[n] * s.sell(i, n) - prices.extra[n] * s.extra(i, n);
            report.per_slot(i, n) = psi;
            report.per_station[i] += psi;
            report.per_slot_total[n] += psi;
            report.total += psi;
        }
    }
    return report;
}

namespace {

struct DirectedLink {
    int from = 0;
    int to = 0;
    LossSegments segments;
};

// Largest generation any scenario can hand a station in one slot.
std::vector<double> generation_peaks(const Network& net, const std::vector<const EnergyMatrix*>& gens) {
    std::vector<double> peak(static_cast<std::size_t>(net.size()), 0.0);
    for (int i = 0; i < net.size(); ++i) {
        peak[i] = net.stations[i].generation.peak_power_w() * net.tau();
        for (const auto* g : gens) {
            for (int n = 0; n < g->slots; ++n) peak[i] = std::max(peak[i], (*g)(i, n));
        }
    }
    return peak;
}

std::vector<DirectedLink> directed_links(const DispatchContext& ctx, const std::vector<double>& peaks) {
    std::vector<DirectedLink> out;
    if (!ctx.physical_links()) return out;
    const Network& net = ctx.net();
    for (const auto& [i, j] : ctx.links.edges()) {
        const double length = net.distance(i, j);
        for (const auto& [from, to] : {std::pair{i, j}, std::pair{j, i}}) {
            const double cap = net.stations[from].battery.capacity_wh + peaks[from];
            out.push_back({from, to, build_loss_segments(length, cap, ctx.loss_segments, net.cable, net.tau())});
        }
    }
    return out;
}

enum class BlockKind { SingleSlot, Horizon };

// Variable indices of one program block, [station * count + local slot].
struct Block {
    int first = 0;
    int count = 0;
    std::vector<int> g, b, s, beta, e, B;
    std::vector<std::vector<LinkVars>> links;  // [directed link][local slot]
};

struct BlockSpec {
    BlockKind kind = BlockKind::Horizon;
    int first = 0;
    int count = 0;
    double weight = 1.0;                     // scenario probability on recourse costs
    const std::vector<int>* shared_grid = nullptr;  // first-stage q^g, [i * N + n]
    bool owns_shared = false;                       // this block's copy seeds the crash basis
    const EnergyMatrix* grid_floor = nullptr;
    std::vector<int>* start = nullptr;              // crash basis, grown row by row
};

Block add_block(LinearProgram& lp, const DispatchContext& ctx, const std::vector<DirectedLink>& links,
                const EnergyMatrix& gen, const EnergyMatrix& cons,
                const std::vector<double>& battery_in, const BlockSpec& spec) {
    const Network& net = ctx.net();
    const auto& prices = net.prices;
    const int k = net.size();
    const int count = spec.count;
    const bool trading = ctx.grid_trading();
    const bool horizon = spec.kind == BlockKind::Horizon;

    Block blk;
    blk.first = spec.first;
    blk.count = count;
    const auto cells = static_cast<std::size_t>(k) * count;
    blk.g.assign(cells, -1);
    blk.b.assign(cells, -1);
    blk.s.assign(cells, -1);
    blk.beta.assign(cells, -1);
    blk.e.assign(cells, -1);
    blk.B.assign(cells, -1);

    for (int l = 0; l < count; ++l) {
        const int n = spec.first + l;
        for (int i = 0; i < k; ++i) {
            const auto c = static_cast<std::size_t>(i) * count + l;
            if (spec.shared_grid) {
                // Scenario copy of the first-stage purchase, tied to it below.
                blk.g[c] = lp.add_variable(0.0);
            } else {
                // A commitment above this day's consumption cannot all be used.
                const double floor =
                    spec.grid_floor ? std::clamp((*spec.grid_floor)(i, n), 0.0, cons(i, n)) : 0.0;
                blk.g[c] = lp.add_variable(prices.grid[n], floor);
            }
            if (trading) {
                blk.b[c] = lp.add_variable(spec.weight * prices.buy[n]);
                blk.s[c] = lp.add_variable(-spec.weight * prices.sell[n]);
            }
            blk.beta[c] = lp.add_variable(0.0);
            if (horizon) {
                blk.e[c] = lp.add_variable(-spec.weight * prices.extra[n]);
                blk.B[c] = lp.add_variable(0.0, 0.0, net.stations[i].battery.capacity_wh);
            }
        }
    }
    blk.links.resize(links.size());
    for (std::size_t d = 0; d < links.size(); ++d) {
        for (int l = 0; l < count; ++l) blk.links[d].push_back(embed_link(lp, links[d].segments));
    }

    // Crash basis: the grid covers all consumption, generation is sold as
    // extra energy and batteries sit empty. Always feasible.
    auto& start = *spec.start;
    start.resize(static_cast<std::size_t>(lp.row_count()), -1);
    auto basic = [&](int row, int column) {
        start.resize(static_cast<std::size_t>(lp.row_count()), -1);
        start[static_cast<std::size_t>(row)] = column;
    };

    std::vector<std::pair<int, double>> terms;
    if (spec.shared_grid) {
        for (int l = 0; l < count; ++l) {
            for (int i = 0; i < k; ++i) {
                const auto c = static_cast<std::size_t>(i) * count + l;
                const int shared = (*spec.shared_grid)[static_cast<std::size_t>(i) * net.slots() + spec.first + l];
                const int row = lp.add_row({{blk.g[c], 1.0}, {shared, -1.0}}, RowSense::Equal, 0.0);
                if (spec.owns_shared) basic(row, shared);
            }
        }
    }
    for (int l = 0; l < count; ++l) {
        const int n = spec.first + l;
        for (int i = 0; i < k; ++i) {
            const auto c = static_cast<std::size_t>(i) * count + l;
            // Supply meets consumption.
            terms.clear();
            terms.emplace_back(blk.g[c], 1.0);
            if (trading) terms.emplace_back(blk.b[c], 1.0);
            terms.emplace_back(blk.beta[c], 1.0);
            for (std::size_t d = 0; d < links.size(); ++d) {
                if (links[d].to == i) terms.emplace_back(blk.links[d][l].delivered_var, 1.0);
            }
            basic(lp.add_row(terms, RowSense::Equal, cons(i, n)), blk.g[c]);

            // Battery: everything drawn from it in this slot.
            terms.clear();
            terms.emplace_back(blk.beta[c], 1.0);
            if (trading) terms.emplace_back(blk.s[c], 1.0);
            for (std::size_t d = 0; d < links.size(); ++d) {
                if (links[d].from != i) continue;
                for (int f : blk.links[d][l].segment_vars) terms.emplace_back(f, 1.0);
            }
            if (horizon) {
                terms.emplace_back(blk.e[c], 1.0);
                terms.emplace_back(blk.B[c], 1.0);
                double rhs = gen(i, n);
                if (l == 0) {
                    rhs += battery_in[i];
                } else {
                    terms.emplace_back(blk.B[c - 1], -1.0);
                }
                basic(lp.add_row(terms, RowSense::Equal, rhs), blk.e[c]);
            } else {
                basic(lp.add_row(terms, RowSense::LessEqual, battery_in[i] + gen(i, n)), -1);
            }
        }
        if (trading) {
            terms.clear();
            for (int i = 0; i < k; ++i) {
                const auto c = static_cast<std::size_t>(i) * count + l;
                terms.emplace_back(blk.b[c], 1.0);
                terms.emplace_back(blk.s[c], -1.0);
            }
            basic(lp.add_row(terms, RowSense::Equal, 0.0), -1);
        }
    }
    start.resize(static_cast<std::size_t>(lp.row_count()), -1);
    return blk;
}

double value(const Solution& sol, int j) {
    return j < 0 ? 0.0 : sol.values[static_cast<std::size_t>(j)];
}

void ensure_optimal(const Solution& sol, const char* what) {
    if (sol.status != SolveStatus::Optimal) {
        throw DispatchError(std::string(what) + ": program is " + to_string(sol.status));
    }
}

std::vector<LinkSchedule> empty_link_schedules(const Network& net, const std::vector<DirectedLink>& links,
                                               int slots) {
    std::vector<LinkSchedule> out;
    for (const auto& d : links) {
        LinkSchedule ls;
        ls.from = d.from;
        ls.to = d.to;
        ls.length_km = net.distance(d.from, d.to);
        ls.forward.assign(static_cast<std::size_t>(slots), 0.0);
        ls.delivered.assign(static_cast<std::size_t>(slots), 0.0);
        out.push_back(std::move(ls));
    }
    return out;
}

void extract_links(const Block& blk, const Solution& sol, std::vector<LinkSchedule>& out, int offset) {
    for (std::size_t d = 0; d < blk.links.size(); ++d) {
        for (int l = 0; l < blk.count; ++l) {
            const auto& lv = blk.links[d][l];
            double fwd = 0.0;
            for (int f : lv.segment_vars) fwd += value(sol, f);
            out[d].forward[offset + l] = fwd;
            out[d].delivered[offset + l] = value(sol, lv.delivered_var);
        }
    }
}

void check_dimensions(const Network& net, const EnergyMatrix& m, const char* what) {
    if (m.stations != net.size() || m.slots != net.slots()) {
        throw std::invalid_argument(std::string(what) + " matrix does not match the network size");
    }
}

std::vector<double> initial_levels(const Network& net) {
    std::vector<double> out;
    for (const auto& bs : net.stations) out.push_back(bs.battery.initial_wh);
    return out;
}

}  // namespace

SlotSchedule dispatch_zero_slot(const DispatchContext& ctx, const SlotInputs& in) {
    const Network& net = ctx.net();
    const int k = net.size();
    if (static_cast<int>(in.consumption.size()) != k || static_cast<int>(in.generation.size()) != k ||
        static_cast<int>(in.battery_in.size()) != k) {
        throw std::invalid_argument("slot inputs do not match the network size");
    }
    // Present the slot as a one-column block at its own slot index.
    EnergyMatrix gen(k, net.slots());
    EnergyMatrix cons(k, net.slots());
    for (int i = 0; i < k; ++i) {
        gen(i, in.slot) = in.generation[i];
        cons(i, in.slot) = in.consumption[i];
    }
    std::vector<double> peaks = generation_peaks(net, {&gen});
    const auto links = directed_links(ctx, peaks);

    LinearProgram lp;
    BlockSpec spec;
    spec.kind = BlockKind::SingleSlot;
    spec.first = in.slot;
    spec.count = 1;
    std::vector<int> start;
    spec.start = &start;
    const Block blk = add_block(lp, ctx, links, gen, cons, in.battery_in, spec);
    const Solution sol = solve_lp(lp, ctx.solver, start);
    ensure_optimal(sol, "zero-knowledge slot");

    SlotSchedule out;
    out.links = empty_link_schedules(net, links, 1);
    extract_links(blk, sol, out.links, 0);
    for (int i = 0; i < k; ++i) {
        const double g = value(sol, blk.g[i]);
        const double b = value(sol, blk.b[i]);
        const double s = value(sol, blk.s[i]);
        const double beta = value(sol, blk.beta[i]);
        double sent = 0.0;
        for (const auto& l : out.links) {
            if (l.from == i) sent += l.forward[0];
        }
        const double x = in.battery_in[i] + in.generation[i] - beta - s - sent;
        const double extra = std::max(0.0, x - net.stations[i].battery.sell_threshold_wh);
        out.grid.push_back(g);
        out.buy.push_back(b);
        out.sell.push_back(s);
        out.battery_use.push_back(beta);
        out.extra.push_back(extra);
        out.battery.push_back(x - extra);
    }
    return out;
}

EnergySchedule dispatch_zero(const DispatchContext& ctx, const EnergyMatrix& generation,
                             const EnergyMatrix& consumption) {
    const Network& net = ctx.net();
    check_dimensions(net, generation, "generation");
    check_dimensions(net, consumption, "consumption");
    const int k = net.size();
    EnergySchedule out(k, net.slots());
    std::vector<double> level = initial_levels(net);
    for (int n = 0; n < net.slots(); ++n) {
        SlotInputs in;
        in.slot = n;
        in.battery_in = level;
        for (int i = 0; i < k; ++i) {
            in.generation.push_back(generation(i, n));
            in.consumption.push_back(consumption(i, n));
        }
        const SlotSchedule slot = dispatch_zero_slot(ctx, in);
        if (out.links.empty() && !slot.links.empty()) {
            for (const auto& l : slot.links) {
                LinkSchedule ls{l.from, l.to, l.length_km, {}, {}};
                ls.forward.assign(static_cast<std::size_t>(net.slots()), 0.0);
                ls.delivered.assign(static_cast<std::size_t>(net.slots()), 0.0);
                out.links.push_back(std::move(ls));
            }
        }
        for (std::size_t d = 0; d < slot.links.size(); ++d) {
            out.links[d].forward[n] = slot.links[d].forward[0];
            out.links[d].delivered[n] = slot.links[d].delivered[0];
        }
        for (int i = 0; i < k; ++i) {
            out.grid(i, n) = slot.grid[i];
            out.buy(i, n) = slot.buy[i];
            out.sell(i, n) = slot.sell[i];
            out.battery_use(i, n) = slot.battery_use[i];
            out.extra(i, n) = slot.extra[i];
            out.battery(i, n) = slot.battery[i];
            level[i] = slot.battery[i];
        }
    }
    out.objective = cost(out, net.prices).total;
    return out;
}

EnergySchedule dispatch_perfect(const DispatchContext& ctx, const EnergyMatrix& generation,
                                const EnergyMatrix& consumption, const EnergyMatrix* grid_floor) {
    const Network& net = ctx.net();
    check_dimensions(net, generation, "generation");
    check_dimensions(net, consumption, "consumption");
    if (grid_floor) check_dimensions(net, *grid_floor, "grid floor");
    const int k = net.size();
    const int slots = net.slots();
    const auto links = directed_links(ctx, generation_peaks(net, {&generation}));

    LinearProgram lp;
    BlockSpec spec;
    spec.first = 0;
    spec.count = slots;
    spec.grid_floor = grid_floor;
    std::vector<int> start;
    spec.start = &start;
    const Block blk = add_block(lp, ctx, links, generation, consumption, initial_levels(net), spec);
    const Solution sol = solve_lp(lp, ctx.solver, start);
    ensure_optimal(sol, "perfect-knowledge dispatch");

    EnergySchedule out(k, slots);
    out.links = empty_link_schedules(net, links, slots);
    extract_links(blk, sol, out.links, 0);
    for (int i = 0; i < k; ++i) {
        for (int n = 0; n < slots; ++n) {
            const auto c = static_cast<std::size_t>(i) * slots + n;
            out.grid(i, n) = value(sol, blk.g[c]);
            out.buy(i, n) = value(sol, blk.b[c]);
            out.sell(i, n) = value(sol, blk.s[c]);
            out.battery_use(i, n) = value(sol, blk.beta[c]);
            out.extra(i, n) = value(sol, blk.e[c]);
            out.battery(i, n) = value(sol, blk.B[c]);
            if (grid_floor) {
                const double excess = (*grid_floor)(i, n) - out.grid(i, n);
                out.curtailed(i, n) = excess > 1e-9 * (1.0 + std::abs((*grid_floor)(i, n))) ? excess : 0.0;
            }
        }
    }
    out.objective = sol.objective;
    if (grid_floor) {
        for (int i = 0; i < k; ++i) {
            for (int n = 0; n < slots; ++n) out.objective += net.prices.grid[n] * out.curtailed(i, n);
        }
    }
    return out;
}

PartialPlan dispatch_partial(const DispatchContext& ctx, const ScenarioSet& scenarios,
                             const EnergyMatrix& consumption) {
    const Network& net = ctx.net();
    check_dimensions(net, consumption, "consumption");
    if (scenarios.size() == 0 || scenarios.weights.size() != scenarios.generation.size()) {
        throw std::invalid_argument("partial knowledge needs a non-empty, weighted scenario set");
    }
    std::vector<const EnergyMatrix*> gens;
    for (const auto& g : scenarios.generation) {
        check_dimensions(net, g, "scenario generation");
        gens.push_back(&g);
    }
    const int k = net.size();
    const int slots = net.slots();
    const auto links = directed_links(ctx, generation_peaks(net, gens));

    LinearProgram lp;
    std::vector<int> grid(static_cast<std::size_t>(k) * slots);
    for (int i = 0; i < k; ++i) {
        for (int n = 0; n < slots; ++n) {
            grid[static_cast<std::size_t>(i) * slots + n] = lp.add_variable(net.prices.grid[n]);
        }
    }
    // Identical scenarios share one recourse block.
    std::map<std::vector<double>, std::size_t> seen;
    std::vector<const EnergyMatrix*> distinct;
    std::vector<double> weight;
    for (int m = 0; m < scenarios.size(); ++m) {
        const auto& g = scenarios.generation[m];
        const auto [it, fresh] = seen.emplace(g.values, distinct.size());
        if (fresh) {
            distinct.push_back(&g);
            weight.push_back(0.0);
        }
        weight[it->second] += scenarios.weights[m];
    }

    const auto levels = initial_levels(net);
    std::vector<int> start;
    for (std::size_t m = 0; m < distinct.size(); ++m) {
        BlockSpec spec;
        spec.first = 0;
        spec.count = slots;
        spec.weight = weight[m];
        spec.shared_grid = &grid;
        spec.owns_shared = m == 0;
        spec.start = &start;
        add_block(lp, ctx, links, *distinct[m], consumption, levels, spec);
    }
    const Solution sol = solve_lp(lp, ctx.solver, start);
    ensure_optimal(sol, "partial-knowledge dispatch");

    PartialPlan plan;
    plan.grid = EnergyMatrix(k, slots);
    double first_stage = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int n = 0; n < slots; ++n) {
            const double g = value(sol, grid[static_cast<std::size_t>(i) * slots + n]);
            plan.grid(i, n) = g;
            first_stage += net.prices.grid[n] * g;
        }
    }
    plan.objective = sol.objective;
    plan.expected_recourse = sol.objective - first_stage;
    plan.scenarios = scenarios.size();
    plan.iterations = sol.iterations;
    return plan;
}

EnergySchedule evaluate_partial(const DispatchContext& ctx, const PartialPlan& plan,
                                const EnergyMatrix& generation, const EnergyMatrix& consumption) {
    return dispatch_perfect(ctx, generation, consumption, &plan.grid);
}

EnergyMatrix battery_trajectory(const EnergySchedule& s, const EnergyMatrix& generation,
                                const std::vector<double>& initial) {
    const int k = s.stations();
    const int slots = s.slots();
    if (generation.stations != k || generation.slots != slots || static_cast<int>(initial.size()) != k) {
        throw std::invalid_argument("battery trajectory inputs do not match the schedule");
    }
    EnergyMatrix level(k, slots);
    for (int i = 0; i < k; ++i) {
        double recursive = initial[i];
        double inflow = 0.0;
        double outflow = 0.0;
        double scale = 1.0 + std::abs(initial[i]);
        for (int n = 0; n < slots; ++n) {
            const double out = s.battery_use(i, n) + s.sell(i, n) + s.extra(i, n) + s.sent(i, n);
            recursive = recursive + generation(i, n) - out;
            inflow += generation(i, n);
            outflow += out;
            const double cumulative = initial[i] + inflow - outflow;
            scale = std::max({scale, std::abs(generation(i, n)), std::abs(out), std::abs(s.battery(i, n))});
            const double tol = 1e-9 * scale * (n + 1);
            if (std::abs(recursive - cumulative) > tol || std::abs(recursive - s.battery(i, n)) > tol) {
                std::ostringstream msg;
                msg << "battery of station " << i << " in slot " << n + 1 << ": stored " << s.battery(i, n)
                    << ", recursion " << recursive << ", cumulative " << cumulative;
                throw TrajectoryMismatch(msg.str());
            }
            level(i, n) = recursive;
        }
    }
    return level;
}

bool ScheduleAudit::ok(double tol, bool check_exclusivity) const {
    return balance <= tol && market <= tol && battery_low <= tol && battery_high <= tol &&
           link_loss <= tol && negativity <= tol && (!check_exclusivity || exclusivity <= tol);
}

std::string ScheduleAudit::describe() const {
    std::ostringstream out;
    out << "balance=" << balance << " market=" << market << " battery_low=" << battery_low
        << " battery_high=" << battery_high << " link_loss=" << link_loss
        << " exclusivity=" << exclusivity << " negativity=" << negativity;
    return out.str();
}

ScheduleAudit audit_schedule(const EnergySchedule& s, const Network& net, const EnergyMatrix& generation,
                             const EnergyMatrix& consumption) {
    (void)generation;
    ScheduleAudit a;
    const int k = s.stations();
    for (int n = 0; n < s.slots(); ++n) {
        double bought = 0.0;
        double sold = 0.0;
        for (int i = 0; i < k; ++i) {
            const double supply = s.grid(i, n) + s.buy(i, n) + s.battery_use(i, n) + s.received(i, n);
            a.balance = std::max(a.balance, std::abs(supply - consumption(i, n)));
            bought += s.buy(i, n);
            sold += s.sell(i, n);
            a.battery_low = std::max(a.battery_low, -s.battery(i, n));
            a.battery_high = std::max(a.battery_high, s.battery(i, n) - net.stations[i].battery.capacity_wh);
            a.exclusivity = std::max(a.exclusivity, s.grid(i, n) * s.extra(i, n));
            for (double v : {s.grid(i, n), s.buy(i, n), s.sell(i, n), s.battery_use(i, n), s.extra(i, n)}) {
                a.negativity = std::max(a.negativity, -v);
            }
        }
        a.market = std::max(a.market, std::abs(bought - sold));
        for (const auto& l : s.links) {
            const double fwd = l.forward[n];
            const double limit = fwd - energy_loss(fwd, l.length_km, net.cable, net.tau());
            a.link_loss = std::max(a.link_loss, l.delivered[n] - limit);
            a.negativity = std::max({a.negativity, -fwd, -l.delivered[n]});
        }
    }
    return a;
}

}  // namespace gridshare
