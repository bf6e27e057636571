#include "gridshare/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gridshare {

double energy_loss(double energy_wh, double length_km, const CableModel& cable,
                   double slot_hours) {
    const double resistance = cable.specific_resistance_ohm_per_m * length_km * 1000.0;
    const double v = cable.rms_voltage_v;
    return energy_wh * energy_wh * resistance / (v * v * slot_hours);
}

double PairStats::diff_std() const {
    return std::hypot(std_i, std_j);
}

double prob_abs_diff_exceeds(const PairStats& pair, double gap_wh) {
    const double mu = pair.diff_mean();
    const double s = pair.diff_std() * std::numbers::sqrt2;
    const double p = 1.0 - 0.5 * (std::erf((gap_wh - mu) / s) - std::erf((-gap_wh - mu) / s));
    return std::clamp(p, 0.0, 1.0);
}

double prob_same_sign(double mean_i, double std_i, double mean_j, double std_j) {
    // Equal to (1 + erf(-mu_i/(sqrt2 s_i)) erf(-mu_j/(sqrt2 s_j))) / 2, expanded as
    // P[-]P[-] + P[+]P[+] so that neither tail cancels.
    const double neg_i = prob_negative(mean_i, std_i);
    const double neg_j = prob_negative(mean_j, std_j);
    const double pos_i = prob_negative(-mean_i, std_i);
    const double pos_j = prob_negative(-mean_j, std_j);
    return std::clamp(neg_i * neg_j + pos_i * pos_j, 0.0, 1.0);
}

double prob_negative(double mean, double std) {
    return 0.5 * std::erfc(mean / (std::numbers::sqrt2 * std));
}

double log_prob_negative(double mean, double std) {
    const double z = mean / std;
    if (z < 25.0) return std::log(prob_negative(mean, std));
    // Mills ratio asymptotics: Q(z) ~ phi(z)/z * (1 - 1/z^2 + 3/z^4).
    const double z2 = z * z;
    return -0.5 * z2 - std::log(z) - 0.5 * std::log(2.0 * std::numbers::pi) +
           std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

}  // namespace gridshare
