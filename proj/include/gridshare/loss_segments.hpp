#pragma once

#include <string>
#include <vector>

#include "gridshare/lp.hpp"
#include "gridshare/model.hpp"

namespace gridshare {

/// Secant approximation of the line loss on [0, cap] with uniform breakpoints.
/// Slopes increase, so the modelled loss never falls below the true loss.
struct LossSegments {
    double length_km = 0.0;
    double cap_wh = 0.0;
    std::vector<double> breakpoints;  // k + 1 values, 0 .. cap
    std::vector<double> slopes;       // k chord slopes

    int count() const { return static_cast<int>(slopes.size()); }
    double width() const { return count() > 0 ? cap_wh / count() : 0.0; }
    /// Piecewise-linear loss with segments filled in order.
    double modeled_loss(double energy_wh) const;
};

LossSegments build_loss_segments(double length_km, double cap_wh, int segments,
                                 const CableModel& cable, double slot_hours);

/// Variables for one directed link in one slot.
struct LinkVars {
    std::vector<int> segment_vars;  // f_m, sum is the energy sent
    int delivered_var = -1;         // energy arriving at the far end
    int row = -1;                   // delivered - sum (1 - s_m) f_m <= 0
};

/// Adds the segment flows and the delivered-energy bound of one directed link.
/// The caller wires the flows into the sender's battery row and the delivered
/// energy into the receiver's balance row.
LinkVars embed_link(LinearProgram& program, const LossSegments& segments,
                    const std::string& tag = {});

}  // namespace gridshare
