#pragma once

#include "gridshare/model.hpp"

namespace gridshare {

/// Joule heating loss in Wh when `energy_wh` crosses a line of `length_km`
/// during one slot: E^2 * rho * l / (V^2 * tau), with l converted to metres.
double energy_loss(double energy_wh, double length_km, const CableModel& cable,
                   double slot_hours);

/// NRE statistics of a pair of stations for one slot.
struct PairStats {
    double mean_i = 0.0;
    double std_i = 0.0;
    double mean_j = 0.0;
    double std_j = 0.0;

    double diff_mean() const { return mean_i - mean_j; }
    double diff_std() const;
};

/// P[|E_i - E_j| > gap] for independent Gaussian NREs.
double prob_abs_diff_exceeds(const PairStats& pair, double gap_wh);

/// P[E_i and E_j have the same sign] for independent Gaussian NREs.
double prob_same_sign(double mean_i, double std_i, double mean_j, double std_j);

/// P[E < 0] for a Gaussian NRE.
double prob_negative(double mean, double std);

/// log P[E < 0], accurate deep in the upper tail where P underflows slowly.
double log_prob_negative(double mean, double std);

}  // namespace gridshare
