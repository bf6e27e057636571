#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gridshare/clustering.hpp"
#include "gridshare/lp.hpp"
#include "gridshare/model.hpp"
#include "gridshare/scenarios.hpp"

namespace gridshare {

enum class SharingMode { NoSharing, SgOnly, PhysicalOnly, Hybrid };

const char* to_string(SharingMode mode);

/// Everything a dispatch program needs besides the energy data.
struct DispatchContext {
    const Network* network = nullptr;
    AssociationMatrix links;
    SharingMode sharing = SharingMode::Hybrid;
    int loss_segments = 8;
    SolverOptions solver;

    bool grid_trading() const {
        return sharing == SharingMode::SgOnly || sharing == SharingMode::Hybrid;
    }
    bool physical_links() const {
        return sharing == SharingMode::PhysicalOnly || sharing == SharingMode::Hybrid;
    }
    const Network& net() const { return *network; }
};

/// Flows over one directed line i -> j.
struct LinkSchedule {
    int from = 0;
    int to = 0;
    double length_km = 0.0;
    std::vector<double> forward;    // q->, energy leaving `from`
    std::vector<double> delivered;  // q<-, energy reaching `to`
};

struct EnergySchedule {
    EnergyMatrix grid;         // q^g
    EnergyMatrix extra;        // q^e
    EnergyMatrix buy;          // q^b
    EnergyMatrix sell;         // q^s
    EnergyMatrix battery_use;  // q^beta
    EnergyMatrix battery;      // B_i(n) at the end of slot n
    EnergyMatrix curtailed;    // committed grid energy beyond consumption, paid but unused
    std::vector<LinkSchedule> links;
    double objective = 0.0;

    EnergySchedule() = default;
    EnergySchedule(int stations, int slots);
    int stations() const { return grid.stations; }
    int slots() const { return grid.slots; }

    double received(int i, int n) const;
    double sent(int i, int n) const;
};

/// Inputs of one zero-knowledge slot.
struct SlotInputs {
    int slot = 0;  // 0-based
    std::vector<double> consumption;
    std::vector<double> generation;
    std::vector<double> battery_in;
};

/// Per-slot part of a zero-knowledge schedule.
struct SlotSchedule {
    std::vector<double> grid, extra, buy, sell, battery_use, battery;
    std::vector<LinkSchedule> links;  // one entry per directed link, single slot
};

struct CostReport {
    EnergyMatrix per_slot;  // Psi_i(n)
    std::vector<double> per_station;
    std::vector<double> per_slot_total;
    double total = 0.0;
};

class DispatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TrajectoryMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

CostReport cost(const EnergySchedule& schedule, const PriceSchedule& prices);

SlotSchedule dispatch_zero_slot(const DispatchContext& ctx, const SlotInputs& inputs);
EnergySchedule dispatch_zero(const DispatchContext& ctx, const EnergyMatrix& generation,
                             const EnergyMatrix& consumption);

/// Full-horizon program. `grid_floor`, when given, is a committed purchase:
/// q^g may only exceed it (top-up at the grid price). Where the commitment
/// exceeds consumption the excess is paid for and reported as curtailed.
EnergySchedule dispatch_perfect(const DispatchContext& ctx, const EnergyMatrix& generation,
                                const EnergyMatrix& consumption,
                                const EnergyMatrix* grid_floor = nullptr);

/// First-stage grid purchases of the deterministic equivalent.
struct PartialPlan {
    EnergyMatrix grid;
    double objective = 0.0;        // first-stage cost + expected recourse cost
    double expected_recourse = 0.0;
    int scenarios = 0;
    long iterations = 0;
};

PartialPlan dispatch_partial(const DispatchContext& ctx, const ScenarioSet& scenarios,
                             const EnergyMatrix& consumption);

/// Realized schedule once generation is known: the committed purchases stay,
/// the rest is re-optimized, shortfalls are topped up from the grid.
EnergySchedule evaluate_partial(const DispatchContext& ctx, const PartialPlan& plan,
                                const EnergyMatrix& generation, const EnergyMatrix& consumption);

/// Recomputes the battery levels from the energy balance recursion and checks
/// them against both the stored trajectory and the cumulative-sum form.
EnergyMatrix battery_trajectory(const EnergySchedule& schedule, const EnergyMatrix& generation,
                                const std::vector<double>& initial);

/// Worst violations of the physical and bookkeeping invariants.
struct ScheduleAudit {
    double balance = 0.0;      // |supply - consumption|
    double market = 0.0;       // |sum q^b - sum q^s| per slot
    double battery_low = 0.0;  // how far B dips below zero
    double battery_high = 0.0; // how far B exceeds B_max
    double link_loss = 0.0;    // delivered - (sent - true loss), positive part
    double exclusivity = 0.0;  // max q^g * q^e
    double negativity = 0.0;   // most negative decision value

    bool ok(double tol, bool check_exclusivity) const;
    std::string describe() const;
};

ScheduleAudit audit_schedule(const EnergySchedule& schedule, const Network& net,
                             const EnergyMatrix& generation, const EnergyMatrix& consumption);

}  // namespace gridshare
