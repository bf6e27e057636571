#include "gridshare/loss_segments.hpp"

#include <algorithm>
#include <stdexcept>

#include "gridshare/affinity.hpp"

namespace gridshare {

double LossSegments::modeled_loss(double energy_wh) const {
    double loss = 0.0;
    double left = std::clamp(energy_wh, 0.0, cap_wh);
    for (int m = 0; m < count() && left > 0.0; ++m) {
        const double take = std::min(left, breakpoints[m + 1] - breakpoints[m]);
        loss += slopes[m] * take;
        left -= take;
    }
    return loss;
}

LossSegments build_loss_segments(double length_km, double cap_wh, int segments,
                                 const CableModel& cable, double slot_hours) {
    if (!(cap_wh > 0.0) || segments < 1 || length_km < 0.0) {
        throw std::invalid_argument("loss segments need cap > 0, k >= 1 and length >= 0");
    }
    LossSegments out;
    out.length_km = length_km;
    out.cap_wh = cap_wh;
    out.breakpoints.resize(static_cast<std::size_t>(segments) + 1);
    for (int m = 0; m <= segments; ++m) out.breakpoints[m] = cap_wh * m / segments;
    out.breakpoints.back() = cap_wh;
    out.slopes.resize(static_cast<std::size_t>(segments));
    for (int m = 0; m < segments; ++m) {
        const double lo = out.breakpoints[m];
        const double hi = out.breakpoints[m + 1];
        out.slopes[m] = (energy_loss(hi, length_km, cable, slot_hours) -
                         energy_loss(lo, length_km, cable, slot_hours)) /
                        (hi - lo);
    }
    return out;
}

LinkVars embed_link(LinearProgram& program, const LossSegments& segments, const std::string& tag) {
    LinkVars vars;
    std::vector<std::pair<int, double>> terms;
    for (int m = 0; m < segments.count(); ++m) {
        const double width = segments.breakpoints[m + 1] - segments.breakpoints[m];
        const int f = program.add_variable(0.0, 0.0, width,
                                           tag.empty() ? std::string{} : tag + "_f" + std::to_string(m));
        vars.segment_vars.push_back(f);
        terms.emplace_back(f, -(1.0 - segments.slopes[m]));
    }
    vars.delivered_var = program.add_variable(0.0, 0.0, kInfinity, tag.empty() ? std::string{} : tag + "_d");
    terms.emplace_back(vars.delivered_var, 1.0);
    vars.row = program.add_row(terms, RowSense::LessEqual, 0.0, tag.empty() ? std::string{} : tag + "_loss");
    return vars;
}

}  // namespace gridshare
